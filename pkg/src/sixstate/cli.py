"""Command-line interface: ``sixstate {rates,thresholds,simulate,twirl-demo}``.

Exit codes: 0 on success (a protocol abort is a result, not a failure),
2 for usage or configuration errors, 1 for anything unexpected.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from . import keyrate
from .bell import BellDiagonal, six_state_symmetrize
from .errors import ConfigError, DomainError
from .protocol import ProtocolConfig, epp_twirl_trace, run

EXIT_OK, EXIT_INTERNAL, EXIT_USAGE = 0, 1, 2
CSV_DIGITS = 12


class UsageError(Exception):
    pass


def _fmt(x: float) -> str:
    return f"{x:.{CSV_DIGITS}g}"


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _write(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def rates_csv(p_min: float, p_max: float, steps: int, cat_ms=(3, 5)) -> str:
    """CSV table of clamped and raw rates on an even grid of ``steps`` points."""
    if steps < 2:
        raise UsageError(f"--steps must be >= 2, got {steps}")
    if not 0.0 <= p_min < p_max <= 0.2:
        raise UsageError(f"need 0 <= p-min < p-max <= 0.2, got {p_min}, {p_max}")
    for m in cat_ms:
        if not 1 <= m <= keyrate.MAX_CAT_M:
            raise UsageError(f"--cat-m values must lie in [1, {keyrate.MAX_CAT_M}], got {m}")
    grid = np.linspace(p_min, p_max, steps)
    columns = [("bb84", "bb84"), ("six_state", "six_state")] + [(f"cat_m{m}", f"cat_m{m}") for m in cat_ms]
    curves = [keyrate.rate_curve(fn, grid) for _, fn in columns]

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = ["p"]
    for name, _ in columns:
        header += [name, f"{name}_raw"]
    writer.writerow(header)
    for i, p in enumerate(grid):
        row = [_fmt(p)]
        for curve in curves:
            raw = float(curve.rate[i])
            row += [_fmt(max(raw, 0.0)), _fmt(raw)]
        writer.writerow(row)
    return buf.getvalue()


def thresholds_json(tol: float = 1e-6) -> dict:
    """Zero-rate error thresholds of the BB84, six-state and best cat-hash rates."""
    if tol < 1e-8:
        raise UsageError(f"--tol must be >= 1e-8, got {tol}")
    per_m = {m: keyrate.threshold(f"cat_m{m}", (0.10, 0.14), tol) for m in keyrate.DEFAULT_CAT_MS}
    best_m = max(per_m, key=per_m.get)
    return {
        "bb84": keyrate.threshold("bb84", (0.05, 0.2), tol),
        "six_state": keyrate.threshold("six_state", (0.05, 0.2), tol),
        "cat_hash_best": keyrate.threshold("cat_best", (0.12, 0.14), tol),
        "cat_hash_best_m": best_m,
    }


def twirl_demo_json(a: float, b: float, c: float, d: float, n: int, seed: int = 0) -> dict:
    state = BellDiagonal(a, b, c, d)
    if n < 1:
        raise UsageError(f"--n must be >= 1, got {n}")
    exact = six_state_symmetrize(state)
    trace = epp_twirl_trace(n, state, seed)
    before, after = trace.frequencies()
    return {
        "input": list(state.as_tuple()),
        "exact_symmetrized": list(exact.as_tuple()),
        "n": n,
        "seed": seed,
        "counts_before": trace.before.tolist(),
        "counts_after": trace.after.tolist(),
        "empirical_before": before.tolist(),
        "empirical_after": after.tolist(),
        "sigma": np.sqrt(exact.as_array() * (1 - exact.as_array()) / n).tolist(),
    }


def _cat_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sixstate", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rates", help="tabulate key rates as CSV")
    p.add_argument("--p-min", type=float, default=0.0)
    p.add_argument("--p-max", type=float, default=0.2)
    p.add_argument("--steps", type=int, default=41)
    p.add_argument("--cat-m", type=_cat_list, default=[3, 5], help="comma-separated cat block lengths")
    p.add_argument("--out")

    p = sub.add_parser("thresholds", help="zero-rate thresholds as JSON")
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--out")

    p = sub.add_parser("simulate", help="run a protocol simulation from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--out")

    p = sub.add_parser("twirl-demo", help="exact and sampled I/T/T^2 twirl of a Bell-diagonal state")
    for name in "abcd":
        p.add_argument(f"--{name}", type=float, required=True)
    p.add_argument("--n", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "rates":
            text = rates_csv(args.p_min, args.p_max, args.steps, args.cat_m)
        elif args.command == "thresholds":
            text = _dump_json(thresholds_json(args.tol))
        elif args.command == "simulate":
            try:
                config = ProtocolConfig.from_json(args.config)
            except OSError as exc:
                raise UsageError(f"cannot read config: {exc}") from None
            text = run(config).to_json()
        else:
            text = _dump_json(twirl_demo_json(args.a, args.b, args.c, args.d, args.n, args.seed))
        _write(text, args.out)
    except (UsageError, ConfigError, DomainError) as exc:
        print(f"sixstate {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001
        print(f"sixstate {args.command}: internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
