"""Command-line interface: run, sweep, attack, and verify.

Exit codes: 0 on success, 1 when a run is partial or a verification check
fails, 2 on configuration errors.
"""

from __future__ import annotations

import argparse
import dataclasses
import math
import sys

from . import verify
from .configio import list_presets, load_config
from .errors import GsptoError
from .harness import default_output_dir, n_sweep, run_experiment, toy_attack_run
from .kernels import BACKEND


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gspto",
        description="Gaussian smoothing with power-transformed objectives: "
                    "benchmark runs, power sweeps, toy attacks, and theory checks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", required=True,
                       help=f"config file path or preset name ({', '.join(list_presets())})")
        p.add_argument("--out", default=None,
                       help="output directory (default: $GSPTO_OUTPUT_DIR or ./gspto_out)")

    run_p = sub.add_parser("run", help="run one experiment (repeated seeded trials)")
    add_common(run_p)
    run_p.add_argument("--seed", type=int, default=None, help="override the base seed")
    run_p.add_argument("--trials", type=int, default=None, help="override the trial count")

    sweep_p = sub.add_parser("sweep", help="run the transform-power sweep of a config")
    add_common(sweep_p)

    attack_p = sub.add_parser("attack", help="run the synthetic targeted-attack experiment")
    add_common(attack_p)

    sub.add_parser("verify", help="run the oracle verification suite")
    return parser


def _load(args):
    config = load_config(args.config)
    overrides = {}
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if getattr(args, "trials", None) is not None:
        overrides["trials"] = args.trials
    if overrides:
        config = dataclasses.replace(config, **overrides)
    return config, (args.out or config.output_dir or default_output_dir())


def _cmd_run(args) -> int:
    config, out = _load(args)
    report = run_experiment(config, out_dir=out)
    print(f"{report.label}: {report.completed}/{len(report.trials)} trials completed "
          f"(backend {BACKEND}) -> {out}")
    for metric, stats in report.aggregates.items():
        print(f"  {metric}: mean {stats['mean']:.6g}  std {stats['std']:.6g}")
    return 1 if report.partial else 0


def _cmd_sweep(args) -> int:
    config, out = _load(args)
    results = n_sweep(config, out_dir=out)
    print(f"{config.stem()}: swept {len(results)} powers (backend {BACKEND}) -> {out}")
    print(f"  {'power':>8}  {'mean_mse':>12}  {'mean_fitness':>12}")
    partial = False
    for power, report in results:
        partial |= report.partial
        print(f"  {power:8g}  {report.aggregates['mse']['mean']:12.6g}  "
              f"{report.aggregates['fitness']['mean']:12.6g}")
    return 1 if partial else 0


def _cmd_attack(args) -> int:
    config, out = _load(args)
    report = toy_attack_run(config, out_dir=out)
    print(f"{report.label}: success rate {report.success_rate:.2%} over "
          f"{len(report.instances)} instances (backend {BACKEND}) -> {out}")
    r2 = report.aggregates["r2"]
    iters = report.aggregates["iterations_to_best"]
    print(f"  r2: mean {r2['mean']:.4g}  std {r2['std']:.4g}")
    print(f"  iterations_to_best: mean {iters['mean']:.4g}  std {iters['std']:.4g}")
    failed = any(r.error for r in report.instances)
    return 1 if (failed or math.isnan(report.success_rate)) else 0


def _cmd_verify(_args) -> int:
    results = verify.run_all()
    for result in results:
        print(result.line())
    return 0 if all(r.passed for r in results) else 1


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "run": _cmd_run,
        "sweep": _cmd_sweep,
        "attack": _cmd_attack,
        "verify": _cmd_verify,
    }
    try:
        return handlers[args.command](args)
    except GsptoError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
