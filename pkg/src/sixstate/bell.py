"""
Bell-diagonal pair states and the symmetrizing twirls.

A Bell-diagonal state of one shared pair is described by four probabilities
``(a, b, c, d)``. The slot convention is fixed throughout the package:

    a: no error (I)
    b: bit-flip only (X)
    c: phase flip only (Z)
    d: both bit-flip and phase flip (Y)

The Hadamard twirl swaps the X and Z slots and the cyclic operator T maps
X -> Y -> Z -> X. Neither is materialized as a matrix; both act as
permutations of the four slots.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

PROB_TOL = 1e-12
RENORM_TOL = 1e-9

RNG_ALGORITHM = "numpy.PCG64"

# Error-class indices, matching the slot order of BellDiagonal.
NONE, BITFLIP, PHASE, BOTH = 0, 1, 2, 3
CLASS_NAMES = ("none", "bitflip", "phase", "both")


@dataclass(frozen=True)
class BellDiagonal:
    """Probabilities of (no error, bit-flip only, phase only, both) on one pair.

    Entries that miss normalization by at most ``1e-9`` are rescaled; larger
    violations, or any entry below ``-1e-12``, raise :class:`DomainError`.
    """

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        vals = [float(v) for v in (self.a, self.b, self.c, self.d)]
        if any(not math.isfinite(v) for v in vals):
            raise DomainError(f"non-finite Bell-diagonal entry in {vals}")
        if min(vals) < -PROB_TOL:
            raise DomainError(f"negative Bell-diagonal entry in {vals}")
        vals = [max(v, 0.0) for v in vals]
        total = math.fsum(vals)
        if abs(total - 1.0) > RENORM_TOL:
            raise DomainError(f"Bell-diagonal entries sum to {total!r}, not 1")
        if abs(total - 1.0) > PROB_TOL:
            vals = [v / total for v in vals]
        for name, v in zip("abcd", vals):
            object.__setattr__(self, name, v)

    @classmethod
    def from_array(cls, probs) -> BellDiagonal:
        a, b, c, d = (float(x) for x in probs)
        return cls(a, b, c, d)

    def as_array(self) -> np.ndarray:
        return np.array([self.a, self.b, self.c, self.d], dtype=np.float64)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.a, self.b, self.c, self.d)

    @property
    def fidelity(self) -> float:
        return self.a

    @property
    def bit_error_rate(self) -> float:
        """Marginal probability of a bit flip, ``b + d``."""
        return self.b + self.d

    @property
    def phase_error_rate(self) -> float:
        """Marginal probability of a phase flip, ``c + d``."""
        return self.c + self.d


@dataclass(frozen=True)
class PauliPattern:
    """Bit-flip and phase error patterns on ``n`` pairs (uint8 0/1 arrays)."""

    z_pattern: np.ndarray
    x_pattern: np.ndarray

    def __post_init__(self):
        z = np.asarray(self.z_pattern, dtype=np.uint8)
        x = np.asarray(self.x_pattern, dtype=np.uint8)
        if z.ndim != 1 or x.ndim != 1 or z.shape != x.shape or z.size < 1:
            raise ValueError(
                f"patterns must be 1-d of equal length >= 1, got {z.shape} and {x.shape}"
            )
        if np.any(z > 1) or np.any(x > 1):
            raise ValueError("patterns must be 0/1 vectors")
        z.flags.writeable = False
        x.flags.writeable = False
        object.__setattr__(self, "z_pattern", z)
        object.__setattr__(self, "x_pattern", x)

    @property
    def n(self) -> int:
        return int(self.z_pattern.size)

    @classmethod
    def from_classes(cls, classes) -> PauliPattern:
        classes = np.asarray(classes)
        z = (classes == BITFLIP) | (classes == BOTH)
        x = (classes == PHASE) | (classes == BOTH)
        return cls(z.astype(np.uint8), x.astype(np.uint8))

    def classes(self) -> np.ndarray:
        """Per-pair error class index (0 none, 1 bitflip, 2 phase, 3 both)."""
        z, x = self.z_pattern == 1, self.x_pattern == 1
        out = np.zeros(self.n, dtype=np.int8)
        out[z & ~x] = BITFLIP
        out[~z & x] = PHASE
        out[z & x] = BOTH
        return out


class TwirlOp(enum.Enum):
    """Symmetry operations acting on the error classes by conjugation.

    ``perm[i]`` is the class an error of class ``i`` becomes.
    """

    IDENTITY = "I"
    HADAMARD = "H"
    T = "T"
    T_SQUARED = "T2"

    @property
    def perm(self) -> tuple[int, int, int, int]:
        return _CLASS_MAPS[self]

    def relabel(self, classes):
        """Map an array of error-class indices through this operation."""
        return np.asarray(self.perm, dtype=np.int8)[np.asarray(classes)]

    def apply(self, s: BellDiagonal) -> BellDiagonal:
        out = np.zeros(4)
        out[list(self.perm)] = s.as_array()
        return BellDiagonal.from_array(out)

    def __matmul__(self, other: TwirlOp) -> TwirlOp:
        """``(self @ other)`` applies ``other`` first, then ``self``."""
        composed = tuple(self.perm[other.perm[i]] for i in range(4))
        for op in TwirlOp:
            if op.perm == composed:
                return op
        raise ValueError(f"{self.name} @ {other.name} leaves the tagged set")


# I fixes everything; H swaps X<->Z; T sends X->Y, Y->Z, Z->X.
_CLASS_MAPS = {
    TwirlOp.IDENTITY: (NONE, BITFLIP, PHASE, BOTH),
    TwirlOp.HADAMARD: (NONE, PHASE, BITFLIP, BOTH),
    TwirlOp.T: (NONE, BOTH, BITFLIP, PHASE),
    TwirlOp.T_SQUARED: (NONE, PHASE, BOTH, BITFLIP),
}

TRIT_OPS = (TwirlOp.IDENTITY, TwirlOp.T, TwirlOp.T_SQUARED)


def _check_probability(p: float, upper: float, name: str = "p") -> float:
    p = float(p)
    if not (0.0 <= p <= upper):
        raise DomainError(f"{name}={p!r} outside [0, {upper:.6g}]")
    return p


def from_bit_error_depolarizing(p: float) -> BellDiagonal:
    """Depolarizing pair state with bit error rate ``p``: ``(1-3p/2, p/2, p/2, p/2)``."""
    p = _check_probability(p, 2.0 / 3.0)
    return BellDiagonal(1.0 - 1.5 * p, p / 2, p / 2, p / 2)


def hadamard_conjugate(s: BellDiagonal) -> BellDiagonal:
    return BellDiagonal(s.a, s.c, s.b, s.d)


def t_conjugate(s: BellDiagonal) -> BellDiagonal:
    """Conjugate by T: X-weight moves to Y, Y to Z, Z to X. Returns ``(a, c, d, b)``."""
    return BellDiagonal(s.a, s.c, s.d, s.b)


def bb84_symmetrize(s: BellDiagonal) -> BellDiagonal:
    """Average over identity and Hadamard: ``(a, (b+c)/2, (b+c)/2, d)``."""
    e = (s.b + s.c) / 2
    return BellDiagonal(s.a, e, e, s.d)


def six_state_symmetrize(s: BellDiagonal) -> BellDiagonal:
    """Average over I, T and T^2.

    The result is computed from the three conjugated states, which lands on
    ``(a, (b+c+d)/3, (b+c+d)/3, (b+c+d)/3)``.
    """
    once = t_conjugate(s)
    twice = t_conjugate(once)
    avg = (s.as_array() + once.as_array() + twice.as_array()) / 3.0
    return BellDiagonal.from_array(avg)


def _plogp(probs) -> float:
    probs = np.asarray(probs, dtype=np.float64)
    nz = probs[probs > 0]
    # + 0.0 turns -0.0 into 0.0
    return float(-np.sum(nz * np.log2(nz))) + 0.0


def binary_entropy(p: float) -> float:
    """Binary Shannon entropy in bits, with ``H2(0) = H2(1) = 0``."""
    p = float(p)
    if not (0.0 <= p <= 1.0):
        raise DomainError(f"p={p!r} outside [0, 1]")
    return _plogp([p, 1.0 - p])


def entropy4(s: BellDiagonal) -> float:
    """Shannon entropy (bits) of the four error-class probabilities."""
    return _plogp(s.as_array())


def marginals_and_mutual_info(s: BellDiagonal) -> tuple[float, float, float]:
    """Return ``(H(Z), H(X), I(X;Z))`` for the bit-flip and phase indicators.

    ``H(Z)`` is the entropy of the bit-flip indicator (rate ``b + d``) and
    ``H(X)`` that of the phase indicator (rate ``c + d``).
    """
    h_z = binary_entropy(min(s.b + s.d, 1.0))
    h_x = binary_entropy(min(s.c + s.d, 1.0))
    mutual = h_x + h_z - entropy4(s)
    # float noise around the independent case
    if -1e-13 < mutual < 0:
        mutual = 0.0
    return h_z, h_x, mutual


def sample_classes(s: BellDiagonal, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``n`` i.i.d. error-class indices from ``s`` using ``rng``."""
    return rng.choice(4, size=n, p=s.as_array()).astype(np.int8)


def sample_pattern(s: BellDiagonal, n: int, rng_seed: int) -> PauliPattern:
    """Sample i.i.d. Pauli errors on ``n`` pairs. Deterministic in ``rng_seed``."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    rng = np.random.default_rng(rng_seed)
    return PauliPattern.from_classes(sample_classes(s, n, rng))
