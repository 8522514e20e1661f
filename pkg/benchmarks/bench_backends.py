#!/usr/bin/env python3
"""Benchmark the compiled kernels against the numpy fallback.

Runs the fused gradient-estimate step and a short optimizer loop on both
backends and prints a timing table plus the cross-backend agreement. The
compiled module is imported directly, so this works regardless of which
backend the package selected at import.

Usage: python benchmarks/bench_backends.py [--repeats N]
"""

import argparse
import time

import numpy as np

from gspto import TransformMode, ackley_objective, two_log_objective
from gspto import _kernels_py as py
from gspto.kernels import _compiled_route

try:
    from gspto import _kernels_cy as cy
except ImportError:
    cy = None

CASES = [
    ("ackley d=2 exp N=1 K=100", ackley_objective(), TransformMode("epgs", 1.0), 100),
    ("two_log d=2 exp N=4.5 K=100", two_log_objective(2), TransformMode("epgs", 4.5), 100),
    ("two_log d=5 pow N=65 K=100", two_log_objective(5, shift=10.0), TransformMode("pgs", 65.0), 100),
    ("two_log d=5 pow N=65 K=500", two_log_objective(5, shift=10.0), TransformMode("pgs", 65.0), 500),
]


def time_call(fn, repeats):
    fn()  # warm up
    start = time.perf_counter()
    for _ in range(repeats):
        fn()
    return (time.perf_counter() - start) / repeats * 1e6  # us


def bench_estimates(repeats):
    print(f"{'case':34} {'numpy us':>10} {'compiled us':>12} {'speedup':>8} {'max rel diff':>13}")
    rng = np.random.default_rng(0)
    for label, objective, mode, count in CASES:
        d = objective.dimension
        mu = rng.uniform(-1.0, 1.0, d)
        z = rng.standard_normal((count, d))
        g_py, _, _ = py.gspto_estimate(z, mu, 1.0, objective, mode)
        t_py = time_call(lambda: py.gspto_estimate(z, mu, 1.0, objective, mode), repeats)
        if cy is None:
            print(f"{label:34} {t_py:10.1f} {'n/a':>12}")
            continue
        kind, params = _compiled_route(objective)
        args = (z, mu, 1.0, kind, params, objective.shift, objective.box,
                mode.kind == "epgs", mode.power, mode.stable_weighting)
        g_cy, _, _ = cy.gspto_estimate(*args)
        t_cy = time_call(lambda: cy.gspto_estimate(*args), repeats)
        rel = np.max(np.abs(g_py - g_cy)) / max(np.max(np.abs(g_py)), 1e-300)
        print(f"{label:34} {t_py:10.1f} {t_cy:12.1f} {t_py / t_cy:7.1f}x {rel:13.2e}")


def bench_run(repeats):
    import os
    import subprocess
    import sys

    code = (
        "import time; from gspto.configio import load_config; "
        "from gspto.harness import run_experiment; import dataclasses; "
        "cfg = dataclasses.replace(load_config('ackley_epgs'), trials=20); "
        "t0 = time.perf_counter(); run_experiment(cfg); "
        "print(f'{time.perf_counter() - t0:.2f}')"
    )
    print("\nfull preset run (Ackley exponential, 20 trials x 200 updates):")
    for backend in ("python", "compiled") if cy is not None else ("python",):
        env = dict(os.environ, GSPTO_BACKEND=backend)
        out = subprocess.run([sys.executable, "-c", code], env=env,
                             capture_output=True, text=True)
        print(f"  {backend:9}: {out.stdout.strip()}s")


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=2000)
    args = parser.parse_args()
    if cy is None:
        print("compiled kernels not built; timing the numpy fallback only\n")
    bench_estimates(args.repeats)
    bench_run(args.repeats)
