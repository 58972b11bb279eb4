"""Compare the compiled interaction kernel against the pure-Python one.

Runs the same workload through both backends, checks that every recorded
array is bit-identical, and reports wall-clock timings. The compiled
kernel exists purely for speed, so any numeric divergence is a bug.

Usage:
    python3 benchmarks/compare_backends.py [--m 100] [--budget 1000]
        [--reps 5] [--beta 0.4] [--protocol OWS]
"""

import argparse
import sys
import time

import numpy as np

from peerbalance import _kernel_py, engine
from peerbalance.engine import RunConfig, run

TRAJECTORY_ARRAYS = (
    "k",
    "draws",
    "total_energy",
    "tvd",
    "cumulative_loss",
    "final_energies",
)


def run_workload(m, budget, reps, beta, protocol):
    trajectories = []
    start = time.perf_counter()
    for rep in range(reps):
        config = RunConfig(
            m=m,
            protocol=protocol,
            beta=beta,
            budget=budget,
            seed=9000 + rep,
        )
        trajectories.append(run(config))
    return trajectories, time.perf_counter() - start


def identical(a, b):
    for name in TRAJECTORY_ARRAYS:
        if not np.array_equal(getattr(a, name), getattr(b, name)):
            return False, name
    if a.draws_total != b.draws_total or a.truncated != b.truncated:
        return False, "draw accounting"
    return True, None


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--m", type=int, default=100, help="population size")
    parser.add_argument("--budget", type=int, default=1000, help="useful interactions per run")
    parser.add_argument("--reps", type=int, default=5, help="runs per backend")
    parser.add_argument("--beta", type=float, default=0.4, help="loss fraction")
    parser.add_argument("--protocol", default="OWS", help="OWS, SWT, or OWA")
    args = parser.parse_args(argv)

    native = engine.KERNEL
    if native.BACKEND_NAME == "python":
        print(
            "compiled kernel is not built; benchmarking the python backend "
            "against itself is pointless",
            file=sys.stderr,
        )
        return 1

    print(
        f"workload: m={args.m} budget={args.budget} reps={args.reps} "
        f"beta={args.beta} protocol={args.protocol}"
    )

    # warm-up pass so one-time import and allocation costs stay out of the timing
    run_workload(5, 10, 1, args.beta, args.protocol)

    compiled_runs, compiled_time = run_workload(
        args.m, args.budget, args.reps, args.beta, args.protocol
    )
    engine.KERNEL = _kernel_py
    try:
        python_runs, python_time = run_workload(
            args.m, args.budget, args.reps, args.beta, args.protocol
        )
    finally:
        engine.KERNEL = native

    for idx, (a, b) in enumerate(zip(compiled_runs, python_runs)):
        same, field = identical(a, b)
        if not same:
            print(f"MISMATCH in run {idx}: field {field} differs", file=sys.stderr)
            return 1

    print(f"outputs: bit-identical across {len(compiled_runs)} runs")
    print(f"compiled: {compiled_time:.3f}s  ({compiled_time / args.reps:.3f}s per run)")
    print(f"python:   {python_time:.3f}s  ({python_time / args.reps:.3f}s per run)")
    print(f"speedup:  {python_time / compiled_time:.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
