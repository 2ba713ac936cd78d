import itertools
import json
import math

import numpy as np
import pytest

from oracles import span
from sixstate.bell import BellDiagonal, six_state_symmetrize
from sixstate.codes import bounded_distance_decode, steane_pair
from sixstate.errors import ConfigError
from sixstate.protocol import (
    Basis,
    DepolarizingChannel,
    InterceptResend,
    ProtocolConfig,
    Pulses,
    apply_channel,
    basis_probs,
    epp_twirl_trace,
    estimate_errors,
    measure,
    prepare,
    run,
    sift,
)

BIASED = dict(scheme="six_state_biased", epsilon=0.15, n_pulses=40_000)


def _pulses(n=1000, seed=0, probs=None):
    probs = basis_probs("six_state") if probs is None else probs
    return prepare(n, probs, np.random.default_rng(seed))


class TestConfig:
    def test_defaults(self):
        cfg = ProtocolConfig()
        assert cfg.scheme == "six_state" and cfg.check_fraction == 0.5

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(scheme="b92"),
            dict(n_pulses=0),
            dict(check_fraction=1.0),
            dict(e_max=-1),
            dict(e_max=1.5),
            dict(epsilon=0.1),
            dict(scheme="six_state_biased", epsilon=0.0),
            dict(scheme="six_state_biased", epsilon=None),
            dict(scheme="six_state_biased", epsilon=0.05, n_pulses=10_000),
        ],
    )
    def test_rejects(self, kwargs):
        with pytest.raises(ConfigError):
            ProtocolConfig(**kwargs)

    def test_epsilon_rule_message(self):
        with pytest.raises(ConfigError, match=r"N\*epsilon\^2"):
            ProtocolConfig(scheme="six_state_biased", epsilon=0.0, n_pulses=10_000)

    def test_n_eps2_boundary(self):
        ProtocolConfig(scheme="six_state_biased", epsilon=0.05, n_pulses=200_000, min_check_per_basis=200)
        with pytest.raises(ConfigError):
            ProtocolConfig(scheme="six_state_biased", epsilon=0.05, n_pulses=79_999, min_check_per_basis=200)

    def test_dict_roundtrip(self):
        cfg = ProtocolConfig(channel=InterceptResend(0.5), e_max=12, rng_seed=9)
        again = ProtocolConfig.from_dict(json.loads(json.dumps(cfg.to_dict())))
        assert again == cfg

    @pytest.mark.parametrize(
        "data, field",
        [
            ({"colour": 1}, "colour"),
            ({"channel": {"type": "loss", "p": 0.1}}, "channel"),
            ({"channel": {"type": "depolarizing", "p": 0.9}}, "channel.p"),
        ],
    )
    def test_from_dict_errors(self, data, field):
        with pytest.raises(ConfigError, match=field):
            ProtocolConfig.from_dict(data)


class TestChannel:
    def test_noiseless_unchanged(self):
        p = _pulses()
        out = apply_channel(p, DepolarizingChannel(0.0), np.random.default_rng(1))
        assert not out.channel_flip.any() and np.all(out.eve_basis == -1)
        assert np.array_equal(out.alice_bit, p.alice_bit)

    def test_no_eve_unchanged(self):
        out = apply_channel(_pulses(), InterceptResend(0.0), np.random.default_rng(1))
        assert np.all(out.eve_basis == -1) and not out.channel_flip.any()

    def test_depolarizing_class_law(self):
        n, p = 200_000, 0.2
        out = apply_channel(_pulses(n), DepolarizingChannel(p), np.random.default_rng(1))
        freq = np.bincount(out.channel_flip, minlength=4) / n
        want = np.array([1 - 1.5 * p, p / 2, p / 2, p / 2])
        assert np.all(np.abs(freq - want) <= 4 * np.sqrt(want * (1 - want) / n))

    def test_flips_monotone_in_p(self):
        prev = None
        for p in np.linspace(0, 0.3, 7):
            out = apply_channel(_pulses(5000), DepolarizingChannel(p), np.random.default_rng(3))
            flips = np.isin(out.channel_flip, [1, 3])
            if prev is not None:
                assert np.all(flips[prev])
            prev = flips

    @pytest.mark.parametrize("scheme, expected", [("bb84", 0.25), ("six_state", 1 / 3)])
    def test_intercept_resend_error(self, scheme, expected):
        n = 200_000
        probs = basis_probs(scheme)
        p = prepare(n, probs, np.random.default_rng(0))
        p = apply_channel(p, InterceptResend(1.0), np.random.default_rng(1), scheme)
        p = measure(p, probs, np.random.default_rng(2))
        kept = sift(p)
        rate = np.mean(p.alice_bit[kept] != p.bob_bit[kept])
        assert abs(rate - expected) < 3 * math.sqrt(expected * (1 - expected) / len(kept))

    def test_bb84_eve_stays_in_xz(self):
        p = apply_channel(_pulses(5000, probs=basis_probs("bb84")), InterceptResend(1.0), np.random.default_rng(1), "bb84")
        assert not np.any(p.eve_basis == Basis.Y)


class TestSift:
    def test_unbiased_fraction(self):
        n = 100_000
        p = measure(_pulses(n), basis_probs("six_state"), np.random.default_rng(5))
        frac = len(sift(p)) / n
        assert abs(frac - 1 / 3) <= 3 * math.sqrt((1 / 3) * (2 / 3) / n)

    @pytest.mark.parametrize("eps", [0.2, 0.1, 0.02])
    def test_biased_fraction(self, eps):
        n = 100_000
        probs = basis_probs("six_state_biased", eps)
        p = measure(_pulses(n, probs=probs), probs, np.random.default_rng(5))
        frac = len(sift(p)) / n
        want = (1 - 2 * eps) ** 2 + 2 * eps**2
        assert abs(frac - want) <= 3 * math.sqrt(want * (1 - want) / n)
        assert frac > (1 - 2 * eps) ** 2

    def test_forced_same_basis(self):
        probs = np.array([0.0, 0.0, 1.0])
        p = measure(_pulses(1000, probs=probs), probs, np.random.default_rng(1))
        assert len(sift(p)) == 1000

    def test_requires_measurement(self):
        with pytest.raises(ValueError):
            sift(_pulses(10))


class TestEstimate:
    def _checks(self, n, flips, bases=None):
        bits = np.zeros(n, np.int8)
        bob = bits.copy()
        bob[flips] = 1
        basis = np.full(n, Basis.Z, np.int8) if bases is None else np.asarray(bases, np.int8)
        return Pulses(alice_bit=bits, alice_basis=basis, bob_basis=basis, bob_bit=bob)

    def test_zero_errors(self):
        est = estimate_errors(self._checks(500, []), 100)
        assert est.pooled == 0 and est.per_basis == {"Z": 0.0}

    def test_exact_count(self):
        est = estimate_errors(self._checks(400, [1, 5, 9, 200, 399]), 100)
        assert est.pooled == 5 / 400 and est.n_errors == 5

    def test_delta(self):
        est = estimate_errors(self._checks(800, []), 100, confidence_fail=1e-3)
        assert est.delta == pytest.approx(math.sqrt(math.log(2e3) / 1600))

    def test_insufficient_basis(self):
        bases = [Basis.Z] * 300 + [Basis.X] * 50
        est = estimate_errors(self._checks(350, [], bases), 100, required_bases=tuple(Basis))
        assert set(est.insufficient) == {"X", "Y"}
        assert "X" not in est.per_basis

    def test_empty(self):
        with pytest.raises(ValueError):
            estimate_errors(self._checks(0, []), 1)

    def test_biased_basis_counts(self):
        rep = run(ProtocolConfig(scheme="six_state_biased", epsilon=0.05, n_pulses=200_000, e_max=0.2))
        expect = 200_000 * 0.05**2 * 0.5
        for b in ("X", "Y"):
            n_b = rep.per_basis_check_counts[b]
            assert abs(n_b - expect) < 4 * math.sqrt(expect)
            assert n_b >= 200
        assert not rep.aborted


class TestRun:
    def test_noiseless_six_state(self):
        rep = run(ProtocolConfig(n_pulses=10_000, rng_seed=1))
        assert not rep.aborted and rep.pooled_error_rate == 0
        assert all(r == 0 for r in rep.per_basis_error_rates.values())
        assert rep.key_match and rep.key_alice == rep.key_bob and len(rep.key_alice) == rep.n_blocks

    def test_depolarizing_rate(self):
        rep = run(ProtocolConfig(n_pulses=100_000, channel=DepolarizingChannel(0.12), check_fraction=0.5, e_max=0.2))
        sigma = math.sqrt(0.12 * 0.88 / rep.n_check)
        assert abs(rep.pooled_error_rate - 0.12) <= 3 * sigma

    def test_intercept_resend_aborts(self):
        rep = run(ProtocolConfig(n_pulses=100_000, channel=InterceptResend(1.0), e_max=0.15))
        assert abs(rep.pooled_error_rate - 1 / 3) < 0.01
        assert rep.aborted and rep.key_alice is None and rep.key_bob is None

    def test_deterministic(self):
        cfg = ProtocolConfig(n_pulses=20_000, channel=DepolarizingChannel(0.05), rng_seed=17)
        assert run(cfg).to_json() == run(cfg).to_json()

    def test_seed_changes_result(self):
        a = run(ProtocolConfig(n_pulses=5000, rng_seed=1))
        b = run(ProtocolConfig(n_pulses=5000, rng_seed=2))
        assert a.key_alice != b.key_alice

    @pytest.mark.parametrize("scheme", ["bb84", "six_state", "six_state_biased"])
    def test_key_match_noiseless(self, scheme):
        kwargs = BIASED if scheme == "six_state_biased" else dict(scheme=scheme, n_pulses=10_000)
        for seed in range(5):
            rep = run(ProtocolConfig(rng_seed=seed, **kwargs))
            assert rep.key_match, (scheme, seed, rep.abort_reason)

    def test_too_few_bits(self):
        rep = run(ProtocolConfig(n_pulses=12, rng_seed=0))
        assert rep.insufficient_key_bits or rep.aborted
        assert not rep.key_match

    def test_count_form_e_max(self):
        rep = run(ProtocolConfig(n_pulses=20_000, channel=DepolarizingChannel(0.05), e_max=10))
        assert rep.e_max_rate == pytest.approx(10 / rep.n_check)
        assert rep.aborted == (rep.check_errors > 10)

    def test_abort_monotone(self):
        aborted = [
            run(ProtocolConfig(n_pulses=20_000, channel=DepolarizingChannel(p), e_max=0.08, rng_seed=4)).aborted
            for p in np.linspace(0.0, 0.16, 17)
        ]
        first = aborted.index(True)
        assert all(aborted[first:]) and not any(aborted[:first])

    def test_biased_per_basis_abort(self):
        rep = run(ProtocolConfig(channel=InterceptResend(1.0), e_max=0.15, **BIASED))
        assert rep.aborted and set(rep.per_basis_error_rates) == {"X", "Y", "Z"}

    def test_block_agreement_matches_enumeration(self):
        """Per-block key agreement versus exact enumeration over all 2^7 errors."""
        css = steane_pair()
        c2 = span([tuple(r) for r in css.c2.generator], 7)
        p = 0.08
        agree = 0.0
        for e in itertools.product((0, 1), repeat=7):
            e = np.array(e, np.uint8)
            # decoding e from the zero codeword lands on e + leader, which must sit in C2
            out, ok = bounded_distance_decode(css.c1, e)
            w = int(e.sum())
            if ok and tuple(out) in c2:
                agree += p**w * (1 - p) ** (7 - w)
        assert agree > sum(math.comb(7, w) * p**w * (1 - p) ** (7 - w) for w in (0, 1))

        rep = run(ProtocolConfig(n_pulses=300_000, channel=DepolarizingChannel(p), e_max=1.0, rng_seed=8))
        frac = rep.blocks_agreed / rep.n_blocks
        assert abs(frac - agree) <= 3 * math.sqrt(agree * (1 - agree) / rep.n_blocks)

    def test_css_files(self, tmp_path):
        from sixstate.codes import save_code

        css = steane_pair()
        save_code(css.c1, tmp_path / "c1.txt")
        save_code(css.c2, tmp_path / "c2.txt")
        cfg = ProtocolConfig(n_pulses=5000, css_files=(str(tmp_path / "c1.txt"), str(tmp_path / "c2.txt")))
        assert run(cfg).key_match


class TestTwirlTrace:
    def test_noiseless(self):
        tr = epp_twirl_trace(1000, BellDiagonal(1, 0, 0, 0), 0)
        assert tr.before.tolist() == [1000, 0, 0, 0] == tr.after.tolist()

    def test_identity_trits(self):
        s = BellDiagonal(0.7, 0.2, 0.06, 0.04)
        tr = epp_twirl_trace(5000, s, 3, trits=np.zeros(5000, int))
        assert np.array_equal(tr.before, tr.after)

    def test_all_t_trits(self):
        s = BellDiagonal(0.7, 0.2, 0.06, 0.04)
        tr = epp_twirl_trace(5000, s, 3, trits=np.ones(5000, int))
        # X counts move to Y, Z to X, Y to Z
        assert tr.after.tolist() == [tr.before[0], tr.before[2], tr.before[3], tr.before[1]]

    def test_twirled_distribution(self):
        s = BellDiagonal(0.7, 0.2, 0.06, 0.04)
        n = 100_000
        _, after = epp_twirl_trace(n, s, 12).frequencies()
        exact = six_state_symmetrize(s).as_array()
        assert np.allclose(exact, [0.7, 0.1, 0.1, 0.1])
        assert np.all(np.abs(after - exact) <= 3 * np.sqrt(exact * (1 - exact) / n))

    def test_bad_trits(self):
        with pytest.raises(ValueError):
            epp_twirl_trace(3, BellDiagonal(1, 0, 0, 0), 0, trits=[0, 1, 3])
