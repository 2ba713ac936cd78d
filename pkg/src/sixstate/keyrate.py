"""
One-way key rates as functions of the sifted bit error rate ``p``.

All rates are asymptotic bits per shared pair. Negative values are returned
unclamped so that a root finder sees the sign change at the threshold.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .bell import binary_entropy, entropy4, from_bit_error_depolarizing
from .errors import BracketError, ConfigError, DomainError

MAX_CAT_M = 12
BISECTION_MAX_ITER = 200
DEFAULT_CAT_MS = tuple(range(2, 8))


@dataclass(frozen=True)
class CatHashConfig:
    """Block length of the cat (repetition) code that precedes random hashing."""

    m: int

    def __post_init__(self):
        if int(self.m) != self.m or not (1 <= self.m <= MAX_CAT_M):
            raise ConfigError(f"cat code length m={self.m!r} must be an integer in [1, {MAX_CAT_M}]")


@dataclass(frozen=True)
class RatePoint:
    p: float
    rate: float


@dataclass(frozen=True)
class RateCurve:
    """Rate function ``name`` sampled on the grid ``p``."""

    name: str
    p: np.ndarray
    rate: np.ndarray

    def __len__(self):
        return len(self.p)

    def points(self) -> list[RatePoint]:
        return [RatePoint(float(p), float(r)) for p, r in zip(self.p, self.rate)]


def _domain(p: float, upper: float) -> float:
    p = float(p)
    if not (0.0 <= p <= upper):
        raise DomainError(f"p={p!r} outside [0, {upper:.6g}]")
    return p


def bb84_worst_case_rate(p: float) -> float:
    """``1 - 2 H2(p)``: bit-flip and phase errors independent, each at rate ``p``."""
    p = _domain(p, 0.5)
    return 1.0 - 2.0 * binary_entropy(p)


def six_state_hashing_rate(p: float) -> float:
    """Hashing rate ``1 - S`` of the depolarizing state with bit error rate ``p``."""
    return 1.0 - entropy4(from_bit_error_depolarizing(_domain(p, 2.0 / 3.0)))


def subroutine_a_decomposition(p: float) -> tuple[float, float, float]:
    """Split the hashing cost into bit-flip rounds and conditional phase rounds.

    Returns ``(h_z, h_x_given_z, rate)`` where ``h_z = H2(p)`` is spent
    identifying the bit-flip pattern and ``h_x_given_z = S - H2(p)`` the phase
    pattern once the bit flips are known.
    """
    p = _domain(p, 2.0 / 3.0)
    h_z = binary_entropy(p)
    h_x_given_z = entropy4(from_bit_error_depolarizing(p)) - h_z
    return h_z, h_x_given_z, 1.0 - h_z - h_x_given_z


def _as_cat_config(cfg) -> CatHashConfig:
    return cfg if isinstance(cfg, CatHashConfig) else CatHashConfig(int(cfg))


def _plogp_rows(probs: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(probs > 0, -probs * np.log2(np.where(probs > 0, probs, 1.0)), 0.0)
    return terms.sum(axis=-1)


def cat_class_table(p: float, m: int, rep_position: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Joint law of (syndrome, logical class) for the m-qubit cat code.

    Each qubit suffers an i.i.d. depolarizing error. The X-part ``x`` gives the
    syndrome ``s_i = x_i ^ x_{i+1}``; every syndrome has two consistent X
    patterns, told apart by the bit at ``rep_position`` (``lx``). The Z-part is
    degenerate and only its parity ``lz`` acts on the logical qubit.

    Returns ``(syndromes, probs)`` with ``syndromes`` of shape ``(2**(m-1),)``
    as integers and ``probs`` of shape ``(2**(m-1), 4)`` indexed by
    ``2*lx + lz``.

    The Z-parity split uses the product form
    ``P(x, lz) = (prod(u + v) + (-1)**lz * prod(u - v)) / 2`` where ``u`` and
    ``v`` are the per-qubit weights of no phase flip and a phase flip given
    that qubit's X bit.
    """
    m = _as_cat_config(m).m
    if not 0 <= rep_position < m:
        raise ConfigError(f"rep_position {rep_position} outside [0, {m})")
    s = from_bit_error_depolarizing(p)
    # indexed by the qubit's X bit
    no_phase = np.array([s.a, s.b])
    phase = np.array([s.c, s.d])
    tot_w, diff_w = no_phase + phase, no_phase - phase

    idx = np.arange(2**m)
    bits = (idx[:, None] >> np.arange(m)) & 1
    total = np.prod(tot_w[bits], axis=1)
    diff = np.prod(diff_w[bits], axis=1)
    even = (total + diff) / 2
    odd = (total - diff) / 2

    syn = np.zeros(2**m, dtype=np.int64)
    for i in range(m - 1):
        syn |= (bits[:, i] ^ bits[:, i + 1]) << i
    lx = bits[:, rep_position]

    probs = np.zeros((2 ** (m - 1), 4))
    np.add.at(probs, (syn, 2 * lx), even)
    np.add.at(probs, (syn, 2 * lx + 1), odd)
    return np.arange(2 ** (m - 1)), probs


def cat_conditional_entropy(p: float, m: int, rep_position: int = 0) -> float:
    """``H(logical class | syndrome)`` in bits per cat block."""
    _, probs = cat_class_table(p, m, rep_position)
    p_s = probs.sum(axis=1)
    keep = p_s > 0
    cond = probs[keep] / p_s[keep, None]
    return float(np.sum(p_s[keep] * _plogp_rows(cond)))


def cat_hash_rate(p: float, cfg) -> float:
    """Rate of an m-qubit cat code followed by random hashing, per pair.

    ``(1 - H(logical | syndrome)) / m``. ``cfg`` is a :class:`CatHashConfig`
    or a plain integer ``m``. For ``m = 1`` this is the hashing rate.
    """
    p = _domain(p, 2.0 / 3.0)
    m = _as_cat_config(cfg).m
    return (1.0 - cat_conditional_entropy(p, m)) / m


def cat_hash_best(p: float, ms: Sequence[int] = DEFAULT_CAT_MS) -> tuple[float, int]:
    """Largest cat-hash rate over block lengths ``ms``; returns ``(rate, m)``."""
    rates = [(cat_hash_rate(p, m), m) for m in ms]
    return max(rates, key=lambda t: t[0])


def cat_hash_best_rate(p: float) -> float:
    return cat_hash_best(p)[0]


def _cat_fn(m: int) -> Callable[[float], float]:
    cfg = CatHashConfig(m)

    def rate(p: float) -> float:
        return cat_hash_rate(p, cfg)

    rate.__name__ = f"cat_m{m}"
    return rate


RATE_FUNCTIONS: dict[str, Callable[[float], float]] = {
    "bb84": bb84_worst_case_rate,
    "six_state": six_state_hashing_rate,
    "cat_best": cat_hash_best_rate,
    **{f"cat_m{m}": _cat_fn(m) for m in range(1, MAX_CAT_M + 1)},
}


def resolve_rate_fn(rate_fn) -> tuple[str, Callable[[float], float]]:
    if callable(rate_fn):
        return getattr(rate_fn, "__name__", "rate"), rate_fn
    try:
        return rate_fn, RATE_FUNCTIONS[rate_fn]
    except KeyError:
        raise ConfigError(
            f"unknown rate function {rate_fn!r}; choose from {sorted(RATE_FUNCTIONS)}"
        ) from None


def threshold(rate_fn, bracket: tuple[float, float] = (0.05, 0.2), tol: float = 1e-8) -> float:
    """Bisect for the error rate where ``rate_fn`` crosses zero.

    ``rate_fn`` is a callable or a key of :data:`RATE_FUNCTIONS`. The bracket
    must have a positive rate at its lower end and a negative rate at its
    upper end. Stops when the bracket is narrower than ``tol`` or after 200
    halvings, and returns the midpoint.
    """
    _, fn = resolve_rate_fn(rate_fn)
    if tol < 1e-10:
        raise ConfigError(f"tol={tol!r} below 1e-10")
    lo, hi = float(bracket[0]), float(bracket[1])
    f_lo, f_hi = fn(lo), fn(hi)
    if not (lo < hi and f_lo > 0 > f_hi):
        raise BracketError(
            f"invalid bracket ({lo}, {hi}): rate({lo}) = {f_lo!r}, rate({hi}) = {f_hi!r}"
        )
    for _ in range(BISECTION_MAX_ITER):
        if hi - lo < tol:
            break
        mid = 0.5 * (lo + hi)
        f_mid = fn(mid)
        if f_mid > 0:
            lo = mid
        elif f_mid < 0:
            hi = mid
        else:
            return mid
    return 0.5 * (lo + hi)


def rate_curve(rate_fn, p_grid) -> RateCurve:
    """Evaluate a rate function on a strictly increasing grid."""
    name, fn = resolve_rate_fn(rate_fn)
    grid = np.asarray(p_grid, dtype=np.float64)
    if grid.ndim != 1 or grid.size == 0:
        raise DomainError("p_grid must be a non-empty 1-d sequence")
    bad = np.flatnonzero(np.diff(grid) <= 0)
    if bad.size:
        raise DomainError(f"p_grid not strictly increasing at index {int(bad[0]) + 1}")
    rates = np.empty_like(grid)
    for i, p in enumerate(grid):
        try:
            rates[i] = fn(p)
        except DomainError as exc:
            raise DomainError(f"p_grid[{i}] = {p!r}: {exc}") from None
    return RateCurve(name, grid, rates)
