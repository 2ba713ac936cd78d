"""
GF(2) linear codes, nested CSS pairs and coset key extraction.

Bit vectors and matrices are numpy ``uint8`` arrays holding 0/1 entries.
Products are taken modulo 2.

Code files are plain text: the first line is ``n k``, followed by ``k`` lines
each holding a generator row as a string of ``n`` characters ``0``/``1``.
Blank lines and lines starting with ``#`` are ignored.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import ConfigError

# Largest number of candidate patterns ml_hash_decode will enumerate.
ML_SEARCH_LIMIT = 2**24


def as_bits(v) -> np.ndarray:
    """Coerce a 0/1 sequence or a ``"0101"`` string to a uint8 array."""
    if isinstance(v, str):
        v = [int(ch) for ch in v.strip()]
    arr = np.asarray(v, dtype=np.uint8)
    if np.any(arr > 1):
        raise ValueError("bit vector entries must be 0 or 1")
    return arr


def bits_to_str(v) -> str:
    return "".join(str(int(b)) for b in np.asarray(v).ravel())


def syndrome(h, v) -> np.ndarray:
    """``h @ v`` over GF(2)."""
    h = np.atleast_2d(as_bits(h))
    v = as_bits(v)
    if v.ndim != 1 or v.size != h.shape[1]:
        raise ValueError(f"vector length {v.size} does not match {h.shape[1]} columns")
    return ((h.astype(np.int64) @ v) & 1).astype(np.uint8)


def rref(mat) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form over GF(2). Returns ``(rows, pivot_columns)``
    with zero rows dropped."""
    a = np.array(np.atleast_2d(mat), dtype=np.uint8) & 1
    rows, cols = a.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        hits = np.flatnonzero(a[r:, c])
        if hits.size == 0:
            continue
        p = r + hits[0]
        if p != r:
            a[[r, p]] = a[[p, r]]
        others = np.flatnonzero(a[:, c])
        others = others[others != r]
        a[others] ^= a[r]
        pivots.append(c)
        r += 1
    return a[:r], pivots


def rank(mat) -> int:
    return len(rref(mat)[1])


def nullspace(mat) -> np.ndarray:
    """Basis (as rows) of ``{v : mat @ v = 0}``."""
    red, pivots = rref(mat)
    n = np.atleast_2d(mat).shape[1]
    free = [c for c in range(n) if c not in pivots]
    basis = np.zeros((len(free), n), dtype=np.uint8)
    for i, f in enumerate(free):
        basis[i, f] = 1
        for row, pc in zip(red, pivots):
            basis[i, pc] = row[f]
    return basis


@dataclass(frozen=True)
class LinearCode:
    """Binary linear ``[n, k]`` code given by a full-rank generator matrix."""

    generator: np.ndarray
    parity_check: np.ndarray = field(default=None)

    def __post_init__(self):
        g = np.atleast_2d(as_bits(self.generator))
        if g.shape[0] < 1 or g.shape[1] < 1:
            raise ConfigError("generator must have at least one row and column")
        if rank(g) != g.shape[0]:
            raise ConfigError("generator rows are linearly dependent")
        h = nullspace(g) if self.parity_check is None else np.atleast_2d(as_bits(self.parity_check))
        if h.size and np.any((g.astype(np.int64) @ h.T.astype(np.int64)) & 1):
            raise ConfigError("generator and parity check are not orthogonal")
        if h.shape[0] != g.shape[1] - g.shape[0]:
            raise ConfigError("parity check has the wrong number of independent rows")
        g.flags.writeable = False
        h.flags.writeable = False
        object.__setattr__(self, "generator", g)
        object.__setattr__(self, "parity_check", h)

    @property
    def n(self) -> int:
        return self.generator.shape[1]

    @property
    def k(self) -> int:
        return self.generator.shape[0]

    def encode(self, message) -> np.ndarray:
        msg = as_bits(message)
        return ((msg.astype(np.int64) @ self.generator) & 1).astype(np.uint8)

    def contains(self, word) -> bool:
        if self.parity_check.shape[0] == 0:
            return True
        return not syndrome(self.parity_check, word).any()

    def codewords(self) -> np.ndarray:
        """All ``2**k`` codewords, ordered by message integer (bit 0 first)."""
        msgs = (np.arange(2**self.k)[:, None] >> np.arange(self.k)) & 1
        return ((msgs @ self.generator) & 1).astype(np.uint8)

    @cached_property
    def min_distance(self) -> int:
        if self.k > 20:
            raise ConfigError(f"min distance by enumeration needs k <= 20, got {self.k}")
        return int(self.codewords()[1:].sum(axis=1).min())

    @cached_property
    def t(self) -> int:
        """Number of bit errors the code is guaranteed to correct."""
        return (self.min_distance - 1) // 2

    @cached_property
    def _decode_table(self) -> dict[bytes, np.ndarray]:
        table = {}
        h = self.parity_check
        for w in range(self.t + 1):
            for pos in itertools.combinations(range(self.n), w):
                e = np.zeros(self.n, dtype=np.uint8)
                e[list(pos)] = 1
                table.setdefault(syndrome(h, e).tobytes(), e)
        return table


def bounded_distance_decode(code: LinearCode, word) -> tuple[np.ndarray, bool]:
    """Correct up to ``code.t`` bit errors.

    Returns ``(codeword, True)`` on success and ``(word, False)`` when the
    syndrome matches no error of weight at most ``t``.
    """
    word = as_bits(word)
    if word.size != code.n:
        raise ValueError(f"word length {word.size} != n = {code.n}")
    if code.parity_check.shape[0] == 0:
        return word.copy(), True
    err = code._decode_table.get(syndrome(code.parity_check, word).tobytes())
    if err is None:
        return word.copy(), False
    return word ^ err, True


@dataclass(frozen=True)
class CssPair:
    """Nested codes ``C2 < C1``; keys are cosets of C2 inside C1."""

    c1: LinearCode
    c2: LinearCode

    def __post_init__(self):
        if self.c1.n != self.c2.n:
            raise ConfigError(f"block lengths differ: {self.c1.n} vs {self.c2.n}")
        for row in self.c2.generator:
            if not self.c1.contains(row):
                raise ConfigError("C2 is not a subcode of C1")
        if self.key_length < 1:
            raise ConfigError("C1 and C2 have equal dimension; no key bits")

    @property
    def n(self) -> int:
        return self.c1.n

    @property
    def key_length(self) -> int:
        return self.c1.k - self.c2.k

    @cached_property
    def _labeling(self) -> tuple[np.ndarray, list[int], np.ndarray]:
        # echelonized C2 basis, extended by C1 rows independent modulo C2
        basis, _ = rref(self.c2.generator)
        transversal = []
        for row in rref(self.c1.generator)[0]:
            trial = np.vstack([basis, *transversal, row])
            if rank(trial) == trial.shape[0]:
                transversal.append(row)
        full = np.vstack([basis, *transversal])
        # pivot columns of a full-rank basis give an invertible square block
        _, info_cols = rref(full)
        inv = _gf2_inverse(full[:, info_cols])
        return inv, info_cols, np.array(transversal, dtype=np.uint8)

    @property
    def transversal(self) -> np.ndarray:
        """Rows spanning C1 modulo C2, in label-coordinate order."""
        return self._labeling[2]

    def coset_representative(self, label) -> np.ndarray:
        label = as_bits(label)
        return ((label.astype(np.int64) @ self.transversal) & 1).astype(np.uint8)


def _gf2_inverse(a: np.ndarray) -> np.ndarray:
    n = a.shape[0]
    red, pivots = rref(np.concatenate([a, np.eye(n, dtype=np.uint8)], axis=1))
    if pivots[:n] != list(range(n)) or len(pivots) < n:
        raise ValueError("matrix is singular over GF(2)")
    return red[:, n:]


def coset_label(css: CssPair, codeword) -> np.ndarray:
    """Canonical ``(k1 - k2)``-bit label of the coset ``codeword + C2``.

    Two codewords of C1 share a label exactly when their sum lies in C2.
    """
    word = as_bits(codeword)
    if word.size != css.n:
        raise ValueError(f"codeword length {word.size} != n = {css.n}")
    if not css.c1.contains(word):
        raise ValueError("input is not a codeword of C1")
    inv, info_cols, _ = css._labeling
    coeffs = (word[info_cols].astype(np.int64) @ inv) & 1
    return coeffs[css.c2.k:].astype(np.uint8)


def coset_key_extract(css: CssPair, broadcast_u_plus_v, received_v_plus_e) -> tuple[np.ndarray | None, bool]:
    """Bob's side of the coset key: decode ``u + e`` and label its coset.

    ``broadcast_u_plus_v`` is Alice's public string (codeword ``u`` of C1 plus
    her raw bits ``v``); ``received_v_plus_e`` is Bob's noisy copy of ``v``.
    Returns ``(key, True)``, or ``(None, False)`` if decoding fails.
    """
    pub = as_bits(broadcast_u_plus_v)
    recv = as_bits(received_v_plus_e)
    if pub.size != css.n or recv.size != css.n:
        raise ValueError(f"expected two length-{css.n} vectors, got {pub.size} and {recv.size}")
    u_hat, ok = bounded_distance_decode(css.c1, pub ^ recv)
    if not ok:
        return None, False
    return coset_label(css, u_hat), True


def random_parity_hash(pattern, rounds: int, rng_seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Draw ``rounds`` uniform parity rows and return them with their parities
    on ``pattern``."""
    pattern = as_bits(pattern)
    if rounds < 0:
        raise ValueError(f"rounds must be >= 0, got {rounds}")
    rng = np.random.default_rng(rng_seed)
    rows = rng.integers(0, 2, size=(rounds, pattern.size), dtype=np.uint8)
    return rows, ((rows.astype(np.int64) @ pattern) & 1).astype(np.uint8)


def ml_hash_decode(parity_rows, parities, prior_p: float, max_weight: int | None = None) -> tuple[np.ndarray | None, bool]:
    """Most likely error pattern consistent with the observed parities.

    Enumerates every pattern of weight at most ``max_weight`` (default: all
    weights), keeps those reproducing ``parities``, and ranks them by the
    i.i.d. prior with flip probability ``prior_p``. ``unique`` is True when the
    winner carries more than half of the posterior mass among the consistent
    candidates, so ties, empty candidate sets and unconstrained searches are
    all reported as not unique.
    """
    rows = np.asarray(parity_rows, dtype=np.uint8)
    par = as_bits(parities)
    n = rows.shape[1]
    if rows.ndim != 2 or rows.shape[0] != par.size:
        raise ValueError("parity_rows must be (rounds, n) with one parity per row")
    if not 0.0 <= prior_p <= 1.0:
        raise ValueError(f"prior_p={prior_p!r} outside [0, 1]")
    max_weight = n if max_weight is None else min(int(max_weight), n)
    space = sum(math.comb(n, w) for w in range(max_weight + 1))
    if space > ML_SEARCH_LIMIT:
        raise ConfigError(f"search space of {space} patterns exceeds 2**24")

    # each column's syndrome contribution, packed to bytes
    cols = np.packbits(rows.T, axis=1) if rows.shape[0] else np.zeros((n, 0), dtype=np.uint8)
    target = np.packbits(par) if par.size else np.zeros(0, dtype=np.uint8)

    if 2**n <= ML_SEARCH_LIMIT:
        candidates = _consistent_full(cols, target, n)
    else:
        candidates = _consistent_by_weight(cols, target, n, max_weight)
    weights = candidates.sum(axis=1)
    candidates = candidates[weights <= max_weight]
    weights = weights[weights <= max_weight]
    logw = np.array([_log_prior(prior_p, n, int(w)) for w in weights])
    keep = logw > -np.inf
    candidates, logw = candidates[keep], logw[keep]
    if candidates.shape[0] == 0:
        return None, False
    order = np.argsort(-logw, kind="stable")
    top = order[0]
    ties = int(np.sum(np.abs(logw - logw[top]) <= 1e-12))
    # posterior share of the winner among all consistent candidates
    share = 1.0 / np.sum(np.exp(logw - logw[top]))
    unique = bool(ties == 1 and share > 0.5)
    return candidates[top].astype(np.uint8), unique


def _consistent_full(cols: np.ndarray, target: np.ndarray, n: int) -> np.ndarray:
    # syndrome of every pattern, indexed by its integer value, built by doubling
    syn = np.zeros((1, cols.shape[1]), dtype=np.uint8)
    for j in range(n):
        syn = np.concatenate([syn, syn ^ cols[j]])
    hits = np.flatnonzero(np.all(syn == target, axis=1))
    return ((hits[:, None] >> np.arange(n)) & 1).astype(np.uint8)


def _consistent_by_weight(cols: np.ndarray, target: np.ndarray, n: int, max_weight: int) -> np.ndarray:
    found = [np.zeros((0, n), dtype=np.uint8)]
    if not target.any():
        found.append(np.zeros((1, n), dtype=np.uint8))
    for w in range(1, max_weight + 1):
        combos = np.array(list(itertools.combinations(range(n), w)), dtype=np.intp)
        syn = np.bitwise_xor.reduce(cols[combos], axis=1)
        hits = combos[np.all(syn == target, axis=1)]
        pats = np.zeros((hits.shape[0], n), dtype=np.uint8)
        np.put_along_axis(pats, hits, 1, axis=1)
        found.append(pats)
    return np.concatenate(found)


def _log_prior(p: float, n: int, w: int) -> float:
    if p == 0.0:
        return 0.0 if w == 0 else -np.inf
    if p == 1.0:
        return 0.0 if w == n else -np.inf
    return w * math.log(p) + (n - w) * math.log1p(-p)


def hamming_7_4() -> LinearCode:
    """The [7,4] Hamming code; column j of the parity check is j+1 in binary."""
    h = ((np.arange(1, 8)[None, :] >> np.arange(3)[:, None]) & 1).astype(np.uint8)
    return LinearCode(nullspace(h), parity_check=h)


def steane_pair() -> CssPair:
    """C1 = [7,4] Hamming, C2 = its [7,3] dual (simplex) subcode."""
    c1 = hamming_7_4()
    return CssPair(c1, LinearCode(c1.parity_check))


CSS_PRESETS = {"steane": steane_pair}


def css_preset(name: str) -> CssPair:
    try:
        return CSS_PRESETS[name]()
    except KeyError:
        raise ConfigError(f"unknown css preset {name!r}; choose from {sorted(CSS_PRESETS)}") from None


def parse_code(text: str) -> LinearCode:
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise ConfigError("empty code file")
    try:
        n, k = (int(x) for x in lines[0].split())
    except ValueError:
        raise ConfigError(f"first line must be 'n k', got {lines[0]!r}") from None
    rows = lines[1:]
    if len(rows) != k:
        raise ConfigError(f"expected {k} generator rows, found {len(rows)}")
    for i, row in enumerate(rows):
        if len(row) != n or set(row) - {"0", "1"}:
            raise ConfigError(f"generator row {i} is not a length-{n} 0/1 string: {row!r}")
    return LinearCode(np.array([[int(ch) for ch in row] for row in rows], dtype=np.uint8))


def format_code(code: LinearCode) -> str:
    lines = [f"{code.n} {code.k}"] + [bits_to_str(row) for row in code.generator]
    return "\n".join(lines) + "\n"


def load_code(path) -> LinearCode:
    return parse_code(Path(path).read_text())


def save_code(code: LinearCode, path) -> None:
    Path(path).write_text(format_code(code))


def load_css_pair(c1_path, c2_path) -> CssPair:
    return CssPair(load_code(c1_path), load_code(c2_path))
