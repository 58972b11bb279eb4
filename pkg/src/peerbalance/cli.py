"""Command line interface.

Subcommands:
  run     execute an experiment grid (optionally from a JSON spec file)
  once    execute a single run and dump its full trajectory as CSV
  verify  run the analytical verification checks

Exit codes: 0 success, 1 configuration error, 2 completed with
truncated runs, 3 verification failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from . import __version__, verify
from .engine import RunConfig, kernel_backend, run
from .experiments import (
    DEFAULT_MASTER_SEED,
    ExperimentSpec,
    run_experiment,
    write_trajectory_csv,
)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_TRUNCATED = 2
EXIT_VERIFY_FAILED = 3


class _Parser(argparse.ArgumentParser):
    """argparse parser whose usage errors exit with the config-error code."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _csv_floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip() != ""]


def _csv_names(text: str) -> list[str]:
    return [x.strip() for x in text.split(",") if x.strip() != ""]


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="peerbalance", description=__doc__)
    parser.add_argument("--version", action="version", version=f"peerbalance {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_run = sub.add_parser("run", help="run an experiment grid")
    p_run.add_argument("config", nargs="?", help="JSON experiment spec file")
    p_run.add_argument("--m", type=int, help="population size")
    p_run.add_argument("--beta", type=_csv_floats, help="loss fraction(s), comma separated")
    p_run.add_argument("--protocol", type=_csv_names, help="protocol(s), comma separated")
    p_run.add_argument("--budget", type=int, help="useful interactions per run")
    p_run.add_argument("--seed", type=int, help="master seed")
    p_run.add_argument("--deps", type=float, help="transfer quantum scale for SWT")
    p_run.add_argument("--reps", type=int, help="replications per cell")
    p_run.add_argument("--out", default="results", help="output directory")
    p_run.add_argument("--raw", action="store_true", help="also write per-replication CSVs")

    p_once = sub.add_parser("once", help="run once and dump the trajectory")
    p_once.add_argument("--m", type=int, default=100)
    p_once.add_argument("--beta", type=float, default=0.2)
    p_once.add_argument("--protocol", default="OWS")
    p_once.add_argument("--budget", type=int, default=1000)
    p_once.add_argument("--seed", type=int, default=DEFAULT_MASTER_SEED)
    p_once.add_argument("--deps", type=float, default=0.01)
    p_once.add_argument("--threshold", type=float, default=0.0)
    p_once.add_argument("--out", help="trajectory CSV path (default: stdout)")

    p_verify = sub.add_parser("verify", help="run analytical verification checks")
    p_verify.add_argument(
        "checks",
        nargs="*",
        default=["all"],
        choices=sorted(verify.ALL_CHECKS) + ["all"],
        help="which checks to run",
    )
    p_verify.add_argument("--instances", type=int, default=1000,
                          help="random instances for the sweep checks")
    p_verify.add_argument("--seed", type=int, default=20260816)
    return parser


def _cmd_run(args) -> int:
    if args.config is not None:
        try:
            raw = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except OSError as exc:
            print(f"cannot read spec file: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        except json.JSONDecodeError as exc:
            print(f"malformed spec file: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        spec = ExperimentSpec.from_dict(raw)
    else:
        spec = ExperimentSpec()

    overrides = {}
    if args.m is not None:
        overrides["m"] = args.m
    if args.beta is not None:
        overrides["betas"] = tuple(args.beta)
    if args.protocol is not None:
        overrides["protocols"] = tuple(args.protocol)
    if args.budget is not None:
        overrides["budget"] = args.budget
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.deps is not None:
        overrides["d_epsilon"] = args.deps
    if args.reps is not None:
        overrides["reps"] = args.reps
    if args.raw:
        overrides["emit_raw"] = True
    if overrides:
        spec = dataclasses.replace(spec, **overrides)

    result = run_experiment(spec, out_dir=args.out)
    for (protocol, beta), cell in result.cells.items():
        agg = cell.aggregate
        line = (
            f"{protocol} beta={beta:g}: "
            f"final mean tvd {agg.mean_tvd[-1]:.6f}, "
            f"final mean energy {agg.mean_total_energy[-1]:.3f}"
        )
        if cell.truncated_runs:
            line += f" [{cell.truncated_runs} truncated runs]"
        print(line)
    print(f"outputs written to {args.out} (kernel: {kernel_backend()})")
    if result.truncated_total > 0:
        print(f"warning: {result.truncated_total} truncated runs", file=sys.stderr)
        return EXIT_TRUNCATED
    return EXIT_OK


def _cmd_once(args) -> int:
    config = RunConfig(
        m=args.m,
        protocol=args.protocol,
        beta=args.beta,
        budget=args.budget,
        seed=args.seed,
        d_epsilon=args.deps,
        transfer_threshold=args.threshold,
    )
    trajectory = run(config)
    if args.out:
        write_trajectory_csv(trajectory, args.out)
        print(
            f"{config.protocol} m={config.m} beta={config.beta:g}: "
            f"{trajectory.useful} useful interactions in {trajectory.draws_total} draws, "
            f"tvd {trajectory.initial_tvd:.6f} -> {trajectory.tvd[-1] if trajectory.useful else trajectory.initial_tvd:.6f}, "
            f"trajectory written to {args.out}"
        )
    else:
        write_trajectory_csv(trajectory, "/dev/stdout")
    return EXIT_TRUNCATED if trajectory.truncated else EXIT_OK


def _cmd_verify(args) -> int:
    names = list(args.checks)
    if "all" in names:
        names = sorted(verify.ALL_CHECKS)
    failed = False
    for name in names:
        checker = verify.ALL_CHECKS[name]
        if name in ("contraction", "lossy-drift"):
            ok, detail = checker(instances=args.instances, seed=args.seed)
        else:
            ok, detail = checker()
        status = "PASS" if ok else "FAIL"
        print(f"{name}: {status} ({detail})")
        failed = failed or not ok
    return EXIT_VERIFY_FAILED if failed else EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "once":
            return _cmd_once(args)
        return _cmd_verify(args)
    except ValueError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
