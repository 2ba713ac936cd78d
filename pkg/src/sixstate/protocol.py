"""
Seeded Monte Carlo simulation of prepare-and-measure BB84 and six-state QKD.

The measurement model is classical. A pulse measured in the basis it was
prepared in yields the prepared bit, flipped when the sampled error class
carries a bit flip; a pulse measured in any other basis yields a uniform
bit. Bases are encoded as ``Basis.X``, ``Basis.Y`` and ``Basis.Z``.

A run draws from five independent streams spawned from ``rng_seed``
(preparation, channel, measurement, permutation, key), so changing the
channel strength leaves every other random choice untouched.
"""

from __future__ import annotations

import dataclasses
import enum
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import codes
from .bell import BITFLIP, BOTH, NONE, PHASE, RNG_ALGORITHM, BellDiagonal, TRIT_OPS, sample_classes
from .errors import ConfigError

SCHEMES = ("bb84", "six_state", "six_state_biased")
ROLE_UNASSIGNED, ROLE_CHECK, ROLE_KEY = 0, 1, 2
NO_EVE = -1


class Basis(enum.IntEnum):
    X = 0
    Y = 1
    Z = 2


@dataclass(frozen=True)
class DepolarizingChannel:
    p: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 2.0 / 3.0:
            raise ConfigError(f"channel.p={self.p!r} must lie in [0, 2/3]")


@dataclass(frozen=True)
class InterceptResend:
    """Eve measures a fraction ``q`` of pulses in a uniformly chosen basis."""

    q: float

    def __post_init__(self):
        if not 0.0 <= self.q <= 1.0:
            raise ConfigError(f"channel.q={self.q!r} must lie in [0, 1]")


def _channel_from_dict(d) -> DepolarizingChannel | InterceptResend:
    if not isinstance(d, dict):
        raise ConfigError(f"channel must be an object, got {d!r}")
    kind = d.get("type")
    extra = set(d) - {"type", "p", "q"}
    if extra:
        raise ConfigError(f"channel: unknown field(s) {sorted(extra)}")
    if kind == "depolarizing" and "p" in d:
        return DepolarizingChannel(float(d["p"]))
    if kind == "intercept_resend" and "q" in d:
        return InterceptResend(float(d["q"]))
    raise ConfigError(
        "channel must be {'type': 'depolarizing', 'p': ...} or {'type': 'intercept_resend', 'q': ...}"
    )


def _channel_to_dict(ch) -> dict:
    if isinstance(ch, DepolarizingChannel):
        return {"type": "depolarizing", "p": ch.p}
    return {"type": "intercept_resend", "q": ch.q}


@dataclass(frozen=True)
class ProtocolConfig:
    """Parameters of one simulated run.

    ``e_max`` is a tolerated error rate when given as a float and a tolerated
    number of check-bit errors when given as an int. ``css_files`` (a pair of
    code-file paths for C1 and C2) overrides ``css_preset`` when set.
    """

    scheme: str = "six_state"
    n_pulses: int = 10_000
    epsilon: float | None = None
    channel: DepolarizingChannel | InterceptResend = DepolarizingChannel(0.0)
    check_fraction: float = 0.5
    e_max: float | int = 0.11
    min_check_per_basis: int = 200
    css_preset: str = "steane"
    css_files: tuple[str, str] | None = None
    confidence_fail: float = 1e-6
    rng_seed: int = 0

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ConfigError(f"scheme={self.scheme!r} must be one of {SCHEMES}")
        if isinstance(self.n_pulses, bool) or int(self.n_pulses) != self.n_pulses or self.n_pulses < 1:
            raise ConfigError(f"n_pulses={self.n_pulses!r} must be a positive integer")
        if not 0.0 < self.check_fraction < 1.0:
            raise ConfigError(f"check_fraction={self.check_fraction!r} must lie in (0, 1)")
        if isinstance(self.e_max, bool) or self.e_max < 0:
            raise ConfigError(f"e_max={self.e_max!r} must be a non-negative rate or count")
        if isinstance(self.e_max, float) and self.e_max > 1:
            raise ConfigError(f"e_max={self.e_max!r} as a rate must not exceed 1")
        if int(self.min_check_per_basis) != self.min_check_per_basis or self.min_check_per_basis < 1:
            raise ConfigError(f"min_check_per_basis={self.min_check_per_basis!r} must be a positive integer")
        if not 0.0 < self.confidence_fail < 1.0:
            raise ConfigError(f"confidence_fail={self.confidence_fail!r} must lie in (0, 1)")
        if not isinstance(self.channel, (DepolarizingChannel, InterceptResend)):
            raise ConfigError(f"channel={self.channel!r} is not a channel model")
        if self.scheme == "six_state_biased":
            eps = self.epsilon
            if eps is None or not 0.0 < eps <= 1.0 / 3.0:
                raise ConfigError(
                    f"epsilon={eps!r}: biased six-state needs 0 < epsilon <= 1/3 "
                    "(the scheme is insecure at epsilon = 0) and N*epsilon^2 > min_check_per_basis"
                )
            if self.n_pulses * eps**2 <= self.min_check_per_basis:
                raise ConfigError(
                    f"epsilon={eps!r}: N*epsilon^2 = {self.n_pulses * eps**2:.6g} must exceed "
                    f"min_check_per_basis = {self.min_check_per_basis} (rule N*epsilon^2 > m)"
                )
        elif self.epsilon is not None:
            raise ConfigError(f"epsilon is only meaningful for six_state_biased, not {self.scheme}")
        if self.css_files is not None and len(self.css_files) != 2:
            raise ConfigError("css_files must name two code files (C1, C2)")

    @classmethod
    def from_dict(cls, d: dict) -> ProtocolConfig:
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ConfigError(f"unknown config field(s): {sorted(unknown)}")
        kwargs = dict(d)
        if "channel" in kwargs:
            kwargs["channel"] = _channel_from_dict(kwargs["channel"])
        if kwargs.get("css_files") is not None:
            kwargs["css_files"] = tuple(kwargs["css_files"])
        try:
            return cls(**kwargs)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def from_json(cls, path) -> ProtocolConfig:
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from None
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["channel"] = _channel_to_dict(self.channel)
        if self.css_files is not None:
            d["css_files"] = list(self.css_files)
        return d

    def css_pair(self) -> codes.CssPair:
        if self.css_files is not None:
            return codes.load_css_pair(*self.css_files)
        return codes.css_preset(self.css_preset)

    def basis_probs(self) -> np.ndarray:
        return basis_probs(self.scheme, self.epsilon)


def basis_probs(scheme: str, epsilon: float | None = None) -> np.ndarray:
    """Probabilities of choosing X, Y, Z. The biased scheme favours Z."""
    if scheme == "bb84":
        return np.array([0.5, 0.0, 0.5])
    if scheme == "six_state":
        return np.full(3, 1.0 / 3.0)
    if scheme == "six_state_biased":
        return np.array([epsilon, epsilon, 1.0 - 2.0 * epsilon])
    raise ConfigError(f"unknown scheme {scheme!r}")


@dataclass
class Pulses:
    """Per-pulse records of a run, stored column-wise.

    ``eve_basis`` is ``-1`` for pulses Eve left alone. ``channel_flip`` is the
    error class (0 none, 1 bitflip, 2 phase, 3 both) relative to the
    transmission basis. ``bob_basis``/``bob_bit`` stay ``-1`` until
    :func:`measure`.
    """

    alice_bit: np.ndarray
    alice_basis: np.ndarray
    eve_basis: np.ndarray = None
    eve_bit: np.ndarray = None
    channel_flip: np.ndarray = None
    bob_basis: np.ndarray = None
    bob_bit: np.ndarray = None
    role: np.ndarray = None

    def __post_init__(self):
        n = len(self.alice_bit)
        for name, fill in [
            ("eve_basis", NO_EVE),
            ("eve_bit", 0),
            ("channel_flip", NONE),
            ("bob_basis", -1),
            ("bob_bit", -1),
            ("role", ROLE_UNASSIGNED),
        ]:
            if getattr(self, name) is None:
                setattr(self, name, np.full(n, fill, dtype=np.int8))

    def __len__(self):
        return len(self.alice_bit)

    def subset(self, idx) -> Pulses:
        return Pulses(**{f.name: getattr(self, f.name)[idx] for f in dataclasses.fields(self)})


def prepare(n: int, probs, rng: np.random.Generator) -> Pulses:
    """Alice's random bits and bases."""
    bits = rng.integers(0, 2, size=n, dtype=np.int8)
    bases = rng.choice(3, size=n, p=probs).astype(np.int8)
    return Pulses(alice_bit=bits, alice_basis=bases)


def apply_channel(pulses: Pulses, channel, rng: np.random.Generator, scheme: str = "six_state") -> Pulses:
    """Return a copy of ``pulses`` with the channel's effect recorded.

    Depolarizing noise draws an error class per pulse from
    ``(1 - 3p/2, p/2, p/2, p/2)``. The uniform draw is laid out so that the
    bit-flip-bearing classes occupy ``[0, p)``; for a fixed stream the set of
    flipped pulses therefore grows monotonically with ``p``.

    Intercept-resend lets Eve measure a fraction ``q`` of pulses in a basis
    drawn uniformly from the scheme's basis set and resend her outcome.
    """
    n = len(pulses)
    out = dataclasses.replace(pulses)
    if isinstance(channel, DepolarizingChannel):
        p = channel.p
        u = rng.random(n)
        cls = np.full(n, NONE, dtype=np.int8)
        cls[u < 1.5 * p] = PHASE
        cls[u < p] = BOTH
        cls[u < p / 2] = BITFLIP
        out.channel_flip = cls
        out.eve_basis = np.full(n, NO_EVE, dtype=np.int8)
    elif isinstance(channel, InterceptResend):
        hit = rng.random(n) < channel.q
        choices = np.array([Basis.X, Basis.Z] if scheme == "bb84" else list(Basis), dtype=np.int8)
        eve_basis = choices[rng.integers(0, len(choices), size=n)]
        guess = rng.integers(0, 2, size=n, dtype=np.int8)
        eve_bit = np.where(eve_basis == pulses.alice_basis, pulses.alice_bit, guess).astype(np.int8)
        out.eve_basis = np.where(hit, eve_basis, NO_EVE).astype(np.int8)
        out.eve_bit = np.where(hit, eve_bit, 0).astype(np.int8)
        out.channel_flip = np.full(n, NONE, dtype=np.int8)
    else:
        raise ConfigError(f"unsupported channel {channel!r}")
    return out


def measure(pulses: Pulses, probs, rng: np.random.Generator) -> Pulses:
    """Bob picks bases with ``probs`` and records outcomes."""
    n = len(pulses)
    bob_basis = rng.choice(3, size=n, p=probs).astype(np.int8)
    coin = rng.integers(0, 2, size=n, dtype=np.int8)
    intercepted = pulses.eve_basis != NO_EVE
    src_basis = np.where(intercepted, pulses.eve_basis, pulses.alice_basis)
    src_bit = np.where(intercepted, pulses.eve_bit, pulses.alice_bit)
    flip = ((pulses.channel_flip == BITFLIP) | (pulses.channel_flip == BOTH)).astype(np.int8)
    out = dataclasses.replace(pulses)
    out.bob_basis = bob_basis
    out.bob_bit = np.where(bob_basis == src_basis, src_bit ^ flip, coin).astype(np.int8)
    return out


def sift(pulses: Pulses) -> np.ndarray:
    """Indices of pulses where Alice's and Bob's bases agree."""
    if np.any(pulses.bob_basis < 0):
        raise ValueError("sift called before every pulse was measured")
    return np.flatnonzero(pulses.alice_basis == pulses.bob_basis)


@dataclass(frozen=True)
class ErrorEstimate:
    per_basis: dict[str, float]
    per_basis_counts: dict[str, int]
    insufficient: tuple[str, ...]
    pooled: float
    n_check: int
    n_errors: int
    delta: float


def estimate_errors(
    checks: Pulses,
    min_check_per_basis: int,
    confidence_fail: float = 1e-6,
    required_bases=(),
) -> ErrorEstimate:
    """Error rates on the check bits, per basis and pooled.

    Per-basis rates are reported only for bases with at least
    ``min_check_per_basis`` samples. Bases in ``required_bases`` that fall
    short are listed in ``insufficient``. ``delta`` is the two-sided Hoeffding
    margin ``sqrt(ln(2/confidence_fail) / (2 n_check))``.
    """
    n = len(checks)
    if n == 0:
        raise ValueError("no check bits to estimate from")
    err = checks.alice_bit != checks.bob_bit
    per_basis, counts = {}, {}
    for b in Basis:
        mask = checks.alice_basis == b
        counts[b.name] = int(mask.sum())
        if counts[b.name] >= min_check_per_basis:
            per_basis[b.name] = float(err[mask].mean())
    insufficient = tuple(
        Basis(b).name for b in required_bases if counts[Basis(b).name] < min_check_per_basis
    )
    return ErrorEstimate(
        per_basis=per_basis,
        per_basis_counts=counts,
        insufficient=insufficient,
        pooled=float(err.mean()),
        n_check=n,
        n_errors=int(err.sum()),
        delta=math.sqrt(math.log(2.0 / confidence_fail) / (2.0 * n)),
    )


@dataclass
class SimReport:
    """Outcome of :func:`run`. Keys are ``"0101"`` strings, ``None`` on abort.

    Bob's key marks blocks he failed to decode with ``-``.
    """

    scheme: str
    n_pulses: int
    sifted_count: int
    n_check: int
    n_key_bits: int
    per_basis_check_counts: dict[str, int]
    per_basis_error_rates: dict[str, float]
    insufficient_bases: list[str]
    pooled_error_rate: float | None
    check_errors: int
    confidence_delta: float | None
    e_max_rate: float | None
    aborted: bool
    abort_reason: str | None
    n_blocks: int
    blocks_agreed: int
    insufficient_key_bits: bool
    key_alice: str | None
    key_bob: str | None
    key_match: bool
    seed_echo: int
    rng_algorithm: str = RNG_ALGORITHM
    config: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def _split_roles(n_sifted: int, check_fraction: float, rng: np.random.Generator):
    order = rng.permutation(n_sifted)
    n_check = int(math.floor(n_sifted * check_fraction))
    return order[:n_check], order[n_check:]


def _extract_keys(css: codes.CssPair, alice_raw: np.ndarray, bob_raw: np.ndarray, rng: np.random.Generator):
    n = css.n
    n_blocks = len(alice_raw) // n
    if n_blocks == 0:
        return "", "", 0, 0
    v = alice_raw[: n_blocks * n].reshape(n_blocks, n).astype(np.uint8)
    w = bob_raw[: n_blocks * n].reshape(n_blocks, n).astype(np.uint8)
    msgs = rng.integers(0, 2, size=(n_blocks, css.c1.k), dtype=np.uint8)
    u = ((msgs.astype(np.int64) @ css.c1.generator) & 1).astype(np.uint8)
    broadcast = u ^ v
    alice_parts, bob_parts, agreed = [], [], 0
    for i in range(n_blocks):
        a_key = codes.coset_label(css, u[i])
        b_key, ok = codes.coset_key_extract(css, broadcast[i], w[i])
        alice_parts.append(codes.bits_to_str(a_key))
        if ok:
            bob_parts.append(codes.bits_to_str(b_key))
            agreed += bool(np.array_equal(a_key, b_key))
        else:
            bob_parts.append("-" * css.key_length)
    return "".join(alice_parts), "".join(bob_parts), n_blocks, agreed


def run(config: ProtocolConfig) -> SimReport:
    """Simulate one run: prepare, transmit, measure, sift, sample, extract.

    Sifted pulses are scrambled by a random permutation and split into check
    and key roles. The run aborts if a monitored error rate exceeds
    ``e_max``: the pooled rate for BB84 and six-state, each basis separately
    for the biased scheme (which also aborts when a basis has too few check
    bits). Surviving key bits are cut into blocks of the CSS code length and
    turned into coset keys.
    """
    css = config.css_pair()
    stream = [np.random.default_rng(s) for s in np.random.SeedSequence(config.rng_seed).spawn(5)]
    probs = config.basis_probs()

    pulses = prepare(config.n_pulses, probs, stream[0])
    pulses = apply_channel(pulses, config.channel, stream[1], config.scheme)
    pulses = measure(pulses, probs, stream[2])
    kept = sift(pulses)
    check_pos, key_pos = _split_roles(len(kept), config.check_fraction, stream[3])
    check_idx, key_idx = kept[check_pos], kept[key_pos]
    pulses.role[check_idx] = ROLE_CHECK
    pulses.role[key_idx] = ROLE_KEY

    report = dict(
        scheme=config.scheme,
        n_pulses=config.n_pulses,
        sifted_count=int(len(kept)),
        n_check=int(len(check_idx)),
        n_key_bits=int(len(key_idx)),
        per_basis_check_counts={},
        per_basis_error_rates={},
        insufficient_bases=[],
        pooled_error_rate=None,
        check_errors=0,
        confidence_delta=None,
        e_max_rate=None,
        aborted=False,
        abort_reason=None,
        n_blocks=0,
        blocks_agreed=0,
        insufficient_key_bits=False,
        key_alice=None,
        key_bob=None,
        key_match=False,
        seed_echo=config.rng_seed,
        config=config.to_dict(),
    )

    if len(check_idx) == 0:
        report.update(aborted=True, abort_reason="no check bits after sifting")
        return SimReport(**report)

    biased = config.scheme == "six_state_biased"
    est = estimate_errors(
        pulses.subset(check_idx),
        config.min_check_per_basis,
        config.confidence_fail,
        required_bases=tuple(Basis) if biased else (),
    )
    if isinstance(config.e_max, int):
        e_max_rate = config.e_max / est.n_check
    else:
        e_max_rate = float(config.e_max)
    report.update(
        per_basis_check_counts=est.per_basis_counts,
        per_basis_error_rates=est.per_basis,
        insufficient_bases=list(est.insufficient),
        pooled_error_rate=est.pooled,
        check_errors=est.n_errors,
        confidence_delta=est.delta,
        e_max_rate=e_max_rate,
    )

    if est.insufficient:
        report.update(aborted=True, abort_reason=f"insufficient check sample in basis {', '.join(est.insufficient)}")
        return SimReport(**report)
    monitored = est.per_basis if biased else {"pooled": est.pooled}
    over = [name for name, r in monitored.items() if r > e_max_rate]
    if over:
        report.update(aborted=True, abort_reason=f"error rate above e_max in {', '.join(over)}")
        return SimReport(**report)

    key_a, key_b, n_blocks, agreed = _extract_keys(
        css, pulses.alice_bit[key_idx], pulses.bob_bit[key_idx], stream[4]
    )
    report.update(
        n_blocks=n_blocks,
        blocks_agreed=agreed,
        insufficient_key_bits=n_blocks == 0,
        key_alice=key_a,
        key_bob=key_b,
        key_match=n_blocks > 0 and agreed == n_blocks,
    )
    return SimReport(**report)


@dataclass(frozen=True)
class TwirlTrace:
    """Error-class counts (none, bitflip, phase, both) before and after twirling."""

    n_pairs: int
    before: np.ndarray
    after: np.ndarray

    def frequencies(self) -> tuple[np.ndarray, np.ndarray]:
        return self.before / self.n_pairs, self.after / self.n_pairs


_TRIT_TABLE = np.array([op.perm for op in TRIT_OPS], dtype=np.int8)


def epp_twirl_trace(n_pairs: int, state: BellDiagonal, rng_seed: int, trits=None) -> TwirlTrace:
    """Sample error classes on ``n_pairs`` pairs and twirl each by I, T or T^2.

    ``trits`` (values 0, 1, 2 selecting I, T, T^2) defaults to a uniform
    random string drawn from the same seeded generator.
    """
    if n_pairs < 1:
        raise ValueError(f"n_pairs must be >= 1, got {n_pairs}")
    rng = np.random.default_rng(rng_seed)
    classes = sample_classes(state, n_pairs, rng)
    if trits is None:
        trits = rng.integers(0, 3, size=n_pairs)
    trits = np.asarray(trits)
    if trits.shape != (n_pairs,) or np.any((trits < 0) | (trits > 2)):
        raise ValueError("trits must be n_pairs values in {0, 1, 2}")
    twirled = _TRIT_TABLE[trits, classes]
    return TwirlTrace(
        n_pairs=n_pairs,
        before=np.bincount(classes, minlength=4),
        after=np.bincount(twirled, minlength=4),
    )
