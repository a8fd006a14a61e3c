"""Command-line driver: ``classify``, ``bound``, ``recalibrate``, ``simulate``, ``sweep``.

Exit codes: 0 success, 2 validation error, 3 internal-consistency failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import fields
from pathlib import Path

import numpy as np

from .bounds import eb_bound, equivalent_sigma
from .channels import ConsistencyError, amplifier, classify, photon_loss, synthesize_recalibration
from .experiment import (
    PRIORS,
    STRATEGIES,
    SWEEP_HEADER,
    ExperimentConfig,
    ValidationError,
    read_ini,
    sweep,
    timed_estimate,
)
from .phasespace import GaussianChannel, identity_channel

EXIT_VALIDATION = 2
EXIT_CONSISTENCY = 3

CHANNELS = ("photon-loss", "amplifier", "identity", "custom")


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _matrix(text: str) -> np.ndarray:
    vals = _floats(text)
    if len(vals) != 4:
        raise argparse.ArgumentTypeError("2x2 matrices take four row-major entries a,b,c,d")
    return np.array(vals).reshape(2, 2)


def _channel_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("channel", choices=CHANNELS)
    p.add_argument("--eta", type=float, help="photon-loss transmissivity")
    p.add_argument("--nu", type=float, help="amplifier gain")
    p.add_argument("--K", type=_matrix, help="custom K as a,b,c,d")
    p.add_argument("--M", type=_matrix, help="custom M as a,b,c,d")
    p.add_argument("--c", type=_floats, help="custom displacement as cx,cp")
    p.add_argument("--out", choices=("text", "json"), default="text")


def _run_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="INI file with [alice], [eve], [run] sections")
    p.add_argument("--eta", type=float)
    p.add_argument("--nu", type=float)
    p.add_argument("--prior", choices=PRIORS)
    p.add_argument("--sigma-a", dest="sigma_a", type=float)
    p.add_argument("--sigma-b", dest="sigma_b", type=float)
    p.add_argument("--l", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--rounds", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--chunk-size", dest="chunk_size", type=int)
    p.add_argument("--z", type=float)
    p.add_argument("--threads", type=int, default=1, help="worker threads (does not change results)")
    p.add_argument("--timing", action="store_true", help="record wall_time_ms (otherwise null)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cvmemory", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="CP / EB / gIB decision for a channel")
    _channel_args(p)

    p = sub.add_parser("recalibrate", help="pre/post channels that make a non-gIB memory witnessable")
    _channel_args(p)

    p = sub.add_parser("bound", help="EB bound for the given priors")
    p.add_argument("--prior", choices=PRIORS, default="gauss")
    p.add_argument("--sigma-a", dest="sigma_a", type=float, default=5.0)
    p.add_argument("--sigma-b", dest="sigma_b", type=float, default=5.0)
    p.add_argument("--l", type=float, default=10.0)
    p.add_argument("--delta", type=float, default=1.0)
    p.add_argument("--out", choices=("text", "json"), default="text")

    p = sub.add_parser("simulate", help="Monte Carlo estimate of the witness with a verdict")
    p.add_argument("--strategy", choices=STRATEGIES)
    _run_args(p)
    p.add_argument("--out", choices=("json", "csv"), default="json")

    p = sub.add_parser("sweep", help="photon-loss regime table over an eta grid")
    p.add_argument("--etas", type=_floats, default=[round(0.05 * k, 2) for k in range(1, 21)])
    _run_args(p)
    p.add_argument("--out", choices=("csv", "json"), default="csv")
    return parser


def channel_from_args(args) -> GaussianChannel:
    def need(name):
        value = getattr(args, name)
        if value is None:
            raise ValidationError(f"--{name} is required for channel {args.channel!r}")
        return value

    try:
        if args.channel == "photon-loss":
            return photon_loss(need("eta"))
        if args.channel == "amplifier":
            return amplifier(need("nu"))
        if args.channel == "identity":
            return identity_channel()
        return GaussianChannel(need("K"), need("M"), args.c)
    except ValidationError:
        raise
    except ValueError as exc:
        raise ValidationError(str(exc)) from None


def config_from_args(args) -> ExperimentConfig:
    values = read_ini(args.config.read_text()) if args.config else {}
    names = {f.name for f in fields(ExperimentConfig)}
    for key in names:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    return ExperimentConfig.from_mapping(values).validate()


def _fmt_matrix(m: np.ndarray) -> str:
    return "[" + "; ".join(" ".join(f"{v:.6g}" for v in row) for row in np.atleast_2d(m)) + "]"


def cmd_classify(args) -> None:
    try:
        cls = classify(channel_from_args(args))
    except ValueError as exc:
        raise ValidationError(str(exc)) from None
    if args.out == "json":
        print(json.dumps(cls.__dict__, indent=2))
        return
    print(cls.summary())
    print(f"slack_cp={cls.slack_cp:.6g} slack_gib={cls.slack_gib:.6g} slack_eb={cls.slack_eb}")


def cmd_recalibrate(args) -> None:
    try:
        plan = synthesize_recalibration(channel_from_args(args))
    except ConsistencyError:
        raise
    except ValueError as exc:
        raise ValidationError(str(exc)) from None
    if args.out == "json":
        print(
            json.dumps(
                {
                    "lam": plan.lam,
                    "g1": {"K": plan.g1.K.tolist(), "M": plan.g1.M.tolist(), "c": plan.g1.c.tolist()},
                    "g2": {"K": plan.g2.K.tolist(), "M": plan.g2.M.tolist(), "c": plan.g2.c.tolist()},
                    "predicted_trace": plan.predicted_trace,
                    "predicted_witness": plan.predicted_witness,
                },
                indent=2,
            )
        )
        return
    print(f"lambda = {plan.lam:.6g}")
    print(f"G1: K={_fmt_matrix(plan.g1.K)} M={_fmt_matrix(plan.g1.M)} c={_fmt_matrix(plan.g1.c)}")
    print(f"G2: K={_fmt_matrix(plan.g2.K)} M={_fmt_matrix(plan.g2.M)} c={_fmt_matrix(plan.g2.c)}")
    print(f"predicted trace = {plan.predicted_trace:.6g}")
    print(f"predicted witness = {plan.predicted_witness:.6g}")


def cmd_bound(args) -> None:
    try:
        if args.prior == "gauss":
            report = {"prior": "gauss", "sigma_a": args.sigma_a, "sigma_b": args.sigma_b,
                      "bound": eb_bound(args.sigma_a, args.sigma_b)}
        else:
            s = equivalent_sigma(args.l, args.delta)
            report = {
                "prior": "smoothflat",
                "l": args.l,
                "delta": args.delta,
                "equivalent_sigma": s,
                "bound": eb_bound(s, s),
                "caveat": "Fisher-information equivalence only; the bound is not claimed "
                "to be tight or sound for smooth-flat priors",
            }
    except ValueError as exc:
        raise ValidationError(str(exc)) from None
    if args.out == "json":
        print(json.dumps(report, indent=2))
        return
    for key, value in report.items():
        print(f"{key}: {value:.6g}" if isinstance(value, float) else f"{key}: {value}")


def cmd_simulate(args) -> None:
    cfg = config_from_args(args)
    res, ms = timed_estimate(cfg, args.threads)
    if args.out == "json":
        print(res.to_json(ms if args.timing else None))
        return
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["strategy", "mean", "stderr", "n", "bound", "verdict", "seed"])
    w.writerow([cfg.strategy, repr(res.mean), repr(res.stderr), res.n, repr(res.bound), res.verdict, cfg.seed])


def cmd_sweep(args) -> None:
    base = config_from_args(args)
    rows = sweep(args.etas, base, args.threads)
    if args.out == "json":
        print(json.dumps(rows, indent=2))
        return
    w = csv.DictWriter(sys.stdout, fieldnames=SWEEP_HEADER, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})


COMMANDS = {
    "classify": cmd_classify,
    "recalibrate": cmd_recalibrate,
    "bound": cmd_bound,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        COMMANDS[args.command](args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ConsistencyError as exc:
        print(f"internal consistency failure: {exc}", file=sys.stderr)
        return EXIT_CONSISTENCY
    return 0


if __name__ == "__main__":
    sys.exit(main())
