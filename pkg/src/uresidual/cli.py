"""Command-line interface: divergence evaluation, verification campaigns, simulation."""

from __future__ import annotations

import argparse
import json
import sys

from . import io as wire
from .divergences import DivergenceKind, divergence
from .dynamics import (
    IntegrationAbort,
    check_bound_residual,
    check_bound_state,
    check_fisher_rate,
    check_purity_bound,
    integrate,
)
from .residual import residual_measure
from .suites import SUITE_NAMES, run_suite

_KIND_CHOICES = ("bures-angle", "trace-distance", "petz-renyi", "relative-entropy")


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _dims(text: str) -> tuple[int, ...]:
    try:
        dims = tuple(int(part) for part in text.split(",") if part)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad dims {text!r}") from exc
    if not dims or any(d < 1 for d in dims):
        raise argparse.ArgumentTypeError(f"bad dims {text!r}")
    return dims


def _kind_from_args(args) -> DivergenceKind:
    if args.kind == "petz-renyi":
        if args.alpha is None:
            raise SystemExit("--alpha is required for petz-renyi")
        return DivergenceKind("petz-renyi", args.alpha)
    if args.alpha is not None:
        raise SystemExit(f"--alpha does not apply to {args.kind}")
    return DivergenceKind(args.kind)


def _emit(payload: dict, pretty: bool) -> None:
    if pretty:
        width = max(len(key) for key in payload)
        for key, value in payload.items():
            print(f"{key:<{width}}  {value}")
    else:
        print(json.dumps(payload))


def cmd_divergence(args) -> int:
    kind = _kind_from_args(args)
    try:
        rho = wire.load_density(args.state_a)
        sigma = wire.load_density(args.state_b)
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        d = divergence(kind, rho, sigma)
        residual = residual_measure(kind, rho.spectrum(), sigma.spectrum())
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    _emit(
        {
            "kind": kind.label(),
            "divergence": d,
            "residual": residual,
            "gap": d - residual,
        },
        args.pretty,
    )
    return 0


def cmd_verify(args) -> int:
    report = run_suite(args.suite, trials=args.trials, dims=args.dims, seed=args.seed, jobs=args.jobs)
    payload = report.to_json()
    if args.pretty:
        print(f"suite {report.suite}: {report.passes}/{report.units} units passed")
        print(f"worst check: {report.worst_label} (excess {report.worst_excess:.3e})")
        if report.counterexample:
            print(f"counterexample: {report.counterexample}")
    else:
        print(json.dumps(payload))
    return 0 if report.ok else 1


def cmd_simulate(args) -> int:
    try:
        scenario = wire.load_scenario(args.scenario)
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    t_end = args.t_end if args.t_end is not None else scenario.t_end
    steps = args.steps if args.steps is not None else scenario.steps
    try:
        traj = integrate(scenario.generator, scenario.rho0, t_end, steps)
    except IntegrationAbort as exc:
        print(f"error: integration aborted at step {exc.step}: {exc}", file=sys.stderr)
        return 1
    if args.out:
        wire.write_trajectory_csv(traj, args.out)
    reports = [
        check_bound_state(scenario.generator, traj),
        check_bound_residual(traj),
        check_fisher_rate(traj),
        check_purity_bound(traj),
    ]
    payload = {
        "t_end": t_end,
        "steps": steps,
        "dim": traj.dim,
        "action_total": float(traj.action[-1]),
        "csv": args.out,
        "checks": [
            {
                "name": rep.name,
                "lhs": rep.lhs,
                "rhs": rep.rhs,
                "margin": rep.margin,
                "holds": rep.holds,
                "applicable": rep.applicable,
            }
            for rep in reports
        ],
    }
    if args.pretty:
        print(f"simulated {steps} steps to t = {t_end} (dim {traj.dim})")
        print(f"action total: {traj.action[-1]:.6f}")
        for rep in reports:
            status = "holds" if rep.holds else "VIOLATED"
            extra = "" if rep.applicable else " [not applicable]"
            print(f"{rep.name}: lhs {rep.lhs:.6f} rhs {rep.rhs:.6f} margin {rep.margin:+.2e} {status}{extra}")
        if args.out:
            print(f"trajectory written to {args.out}")
    else:
        print(json.dumps(payload))
    return 0 if all(rep.holds or not rep.applicable for rep in reports) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="uresidual",
        description="Divergences on density operators, their unitarily residual "
        "measures on sorted spectra, and non-Hermitian speed-limit checks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_div = sub.add_parser("divergence", help="compare two density-operator JSON files")
    p_div.add_argument("state_a")
    p_div.add_argument("state_b")
    p_div.add_argument("--kind", choices=_KIND_CHOICES, default="bures-angle")
    p_div.add_argument("--alpha", type=float, default=None)
    p_div.add_argument("--pretty", action="store_true")
    p_div.set_defaults(func=cmd_divergence)

    p_ver = sub.add_parser("verify", help="run a randomized verification suite")
    p_ver.add_argument("suite", choices=SUITE_NAMES)
    p_ver.add_argument("--trials", type=_positive_int, default=200)
    p_ver.add_argument("--dims", type=_dims, default=(2, 3))
    p_ver.add_argument("--seed", type=int, default=42)
    p_ver.add_argument("--jobs", type=_positive_int, default=1)
    p_ver.add_argument("--pretty", action="store_true")
    p_ver.set_defaults(func=cmd_verify)

    p_sim = sub.add_parser("simulate", help="integrate a scenario JSON and check the bounds")
    p_sim.add_argument("scenario")
    p_sim.add_argument("--out", default=None, help="trajectory CSV path")
    p_sim.add_argument("--steps", type=_positive_int, default=None)
    p_sim.add_argument("--t-end", type=float, default=None)
    p_sim.add_argument("--pretty", action="store_true")
    p_sim.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
