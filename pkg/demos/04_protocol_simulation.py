"""
Simulating the prepare-and-measure protocol
===========================================

Run BB84, six-state and biased six-state over a noisy channel and against
an intercept-resend attacker.
"""

from sixstate.protocol import DepolarizingChannel, InterceptResend, ProtocolConfig, run

configs = {
    "six-state, p=0.05": ProtocolConfig(n_pulses=50_000, channel=DepolarizingChannel(0.05)),
    "bb84, p=0.05": ProtocolConfig(scheme="bb84", n_pulses=50_000, channel=DepolarizingChannel(0.05)),
    "biased eps=0.1, p=0.05": ProtocolConfig(
        scheme="six_state_biased", epsilon=0.1, n_pulses=50_000, channel=DepolarizingChannel(0.05)
    ),
    "six-state, Eve q=1": ProtocolConfig(n_pulses=50_000, channel=InterceptResend(1.0), e_max=0.15),
    "bb84, Eve q=1": ProtocolConfig(scheme="bb84", n_pulses=50_000, channel=InterceptResend(1.0), e_max=0.15),
}

for name, cfg in configs.items():
    rep = run(cfg)
    rates = {b: round(r, 4) for b, r in rep.per_basis_error_rates.items()}
    print(
        f"{name:24s} sifted={rep.sifted_count:6d} error={rep.pooled_error_rate:.4f} "
        f"+-{rep.confidence_delta:.3f} per-basis={rates}"
    )
    if rep.aborted:
        print(f"{'':24s} aborted: {rep.abort_reason}")
    else:
        print(f"{'':24s} {rep.blocks_agreed}/{rep.n_blocks} blocks agree")
