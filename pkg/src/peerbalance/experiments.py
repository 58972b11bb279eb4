"""Experiment grid: run replicated cells, aggregate, and emit CSV files.

A cell is one (protocol, beta) combination; every cell is replicated R
times. Replication r of every cell starts from the same initial
population (drawn from a stream keyed only by the master seed and r),
while scheduler randomness is keyed by (master seed, cell, r). Sharing
initial populations across cells removes initialization noise from
cross-protocol and cross-beta comparisons without coupling the runs.

All emitted numbers carry 17 significant digits, which round-trips
IEEE doubles exactly, so re-running with the same master seed
reproduces every output file byte for byte.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np

from . import __version__
from .engine import (
    DEFAULT_ENERGY_INIT,
    DEFAULT_WEIGHT_INIT,
    PROTOCOL_IDS,
    RunConfig,
    Trajectory,
    initialize_population,
    kernel_backend,
    run,
)
from .rng import STREAM_INIT, SplitMix64, derive_seed

# Offset separating cell tags from the stream-purpose tags in rng.
CELL_TAG_BASE = 1000

DEFAULT_MASTER_SEED = 424242


@dataclass(frozen=True)
class ExperimentSpec:
    """Full description of an experiment grid."""

    m: int = 100
    budget: int = 1000
    reps: int = 100
    protocols: tuple[str, ...] = ("OWS", "SWT", "OWA")
    betas: tuple[float, ...] = (0.2, 0.4, 0.6, 0.8)
    seed: int = DEFAULT_MASTER_SEED
    d_epsilon: float = 0.01
    transfer_threshold: float = 0.0
    max_draws: int | None = None
    energy_init: tuple = DEFAULT_ENERGY_INIT
    weight_init: tuple = DEFAULT_WEIGHT_INIT
    emit_raw: bool = False

    def __post_init__(self):
        protocols = tuple(str(p).upper() for p in self.protocols)
        object.__setattr__(self, "protocols", protocols)
        object.__setattr__(self, "betas", tuple(float(b) for b in self.betas))
        if not protocols:
            raise ValueError("at least one protocol is required")
        for p in protocols:
            if p not in PROTOCOL_IDS:
                raise ValueError(f"unknown protocol {p!r}")
        if not self.betas:
            raise ValueError("at least one beta is required")
        for b in self.betas:
            if not 0.0 <= b < 1.0:
                raise ValueError(f"beta must lie in [0, 1), got {b}")
        if self.reps < 1:
            raise ValueError(f"reps must be >= 1, got {self.reps}")

    def cells(self) -> list[tuple[int, str, float]]:
        """(cell_id, protocol, beta) triples in grid order."""
        out = []
        cell_id = 0
        for protocol in self.protocols:
            for beta in self.betas:
                out.append((cell_id, protocol, beta))
                cell_id += 1
        return out

    def to_dict(self) -> dict:
        d = asdict(self)
        d["protocols"] = list(self.protocols)
        d["betas"] = list(self.betas)
        d["energy_init"] = list(self.energy_init) if isinstance(self.energy_init, tuple) else self.energy_init
        d["weight_init"] = list(self.weight_init) if isinstance(self.weight_init, tuple) else self.weight_init
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentSpec":
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown experiment spec keys: {sorted(unknown)}")
        kwargs = dict(d)
        for key in ("protocols", "betas", "energy_init", "weight_init"):
            if key in kwargs and isinstance(kwargs[key], list):
                kwargs[key] = tuple(kwargs[key])
        return cls(**kwargs)


def default_spec(**overrides) -> ExperimentSpec:
    """The package's reference experiment configuration."""
    return replace(ExperimentSpec(), **overrides) if overrides else ExperimentSpec()


@dataclass(frozen=True)
class AggregateSeries:
    """Per-interaction-index statistics across a cell's replications.

    ``outliers_tvd`` counts replications outside the Tukey fences
    (1.5 interquartile ranges beyond the quartiles) at each index.
    """

    k: np.ndarray
    mean_total_energy: np.ndarray
    mean_tvd: np.ndarray
    median_tvd: np.ndarray
    q1_tvd: np.ndarray
    q3_tvd: np.ndarray
    mean_cumulative_loss: np.ndarray
    outliers_tvd: np.ndarray


def aggregate_trajectories(trajectories: list[Trajectory]) -> AggregateSeries:
    """Align replications on the useful-interaction index and aggregate.

    All replications of a cell share the same budget, so alignment is
    exact; if any run was truncated the aggregation covers the common
    prefix.
    """
    if not trajectories:
        raise ValueError("cannot aggregate zero trajectories")
    length = min(t.useful for t in trajectories)
    tvd = np.stack([t.tvd[:length] for t in trajectories])
    total = np.stack([t.total_energy[:length] for t in trajectories])
    loss = np.stack([t.cumulative_loss[:length] for t in trajectories])
    q1, q2, q3 = np.percentile(tvd, [25.0, 50.0, 75.0], axis=0)
    iqr = q3 - q1
    low = q1 - 1.5 * iqr
    high = q3 + 1.5 * iqr
    outliers = np.sum((tvd < low) | (tvd > high), axis=0)
    return AggregateSeries(
        k=np.arange(1, length + 1, dtype=np.int64),
        mean_total_energy=np.mean(total, axis=0),
        mean_tvd=np.mean(tvd, axis=0),
        median_tvd=q2,
        q1_tvd=q1,
        q3_tvd=q3,
        mean_cumulative_loss=np.mean(loss, axis=0),
        outliers_tvd=outliers.astype(np.int64),
    )


def efficiency_series(trajectory: Trajectory) -> tuple[np.ndarray, np.ndarray]:
    """Balance achieved per energy still available: (remaining energy, tvd)."""
    return trajectory.total_energy, trajectory.tvd


@dataclass(frozen=True)
class CellResult:
    cell_id: int
    protocol: str
    beta: float
    trajectories: list[Trajectory]
    aggregate: AggregateSeries
    truncated_runs: int


@dataclass(frozen=True)
class ExperimentResult:
    spec: ExperimentSpec
    cells: dict[tuple[str, float], CellResult]

    @property
    def truncated_total(self) -> int:
        return sum(c.truncated_runs for c in self.cells.values())


def _replication_energies(spec: ExperimentSpec, r: int) -> np.ndarray:
    """Initial energies for replication r, shared by every cell."""
    rng = SplitMix64(derive_seed(spec.seed, STREAM_INIT, r))
    pop = initialize_population(spec.m, spec.energy_init, spec.weight_init, 0.0, rng)
    return np.array(pop.energies)


def run_experiment(spec: ExperimentSpec, out_dir: str | Path | None = None) -> ExperimentResult:
    """Run the full grid; optionally write CSV outputs and metadata."""
    rep_energies = [_replication_energies(spec, r) for r in range(spec.reps)]
    # weights carry no randomness; resolve them once
    weights = np.array(
        initialize_population(
            spec.m, rep_energies[0], spec.weight_init, 0.0, SplitMix64(0)
        ).weights
    )

    cells: dict[tuple[str, float], CellResult] = {}
    for cell_id, protocol, beta in spec.cells():
        trajectories = []
        for r in range(spec.reps):
            config = RunConfig(
                m=spec.m,
                protocol=protocol,
                beta=beta,
                budget=spec.budget,
                seed=derive_seed(spec.seed, CELL_TAG_BASE + cell_id, r),
                d_epsilon=spec.d_epsilon,
                transfer_threshold=spec.transfer_threshold,
                max_draws=spec.max_draws,
                energy_init=rep_energies[r],
                weight_init=weights,
            )
            trajectories.append(run(config))
        cells[(protocol, beta)] = CellResult(
            cell_id=cell_id,
            protocol=protocol,
            beta=beta,
            trajectories=trajectories,
            aggregate=aggregate_trajectories(trajectories),
            truncated_runs=sum(t.truncated for t in trajectories),
        )

    result = ExperimentResult(spec=spec, cells=cells)
    if out_dir is not None:
        write_experiment_outputs(result, Path(out_dir))
    return result


def _fmt(x: float) -> str:
    return f"{float(x):.17g}"


def _write_csv(path: Path, header: list[str], rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")


def write_trajectory_csv(trajectory: Trajectory, path: str | Path) -> None:
    """One row per useful interaction; header only when the run recorded none."""
    rows = (
        [str(int(k)), str(int(d)), _fmt(te), _fmt(tv), _fmt(cl)]
        for k, d, te, tv, cl in zip(
            trajectory.k,
            trajectory.draws,
            trajectory.total_energy,
            trajectory.tvd,
            trajectory.cumulative_loss,
        )
    )
    _write_csv(Path(path), ["k", "draws", "total_energy", "tvd", "cumulative_loss"], rows)


def write_aggregate_csv(agg: AggregateSeries, path: str | Path) -> None:
    rows = (
        [str(int(k)), _fmt(a), _fmt(b), _fmt(c), _fmt(d), _fmt(e), _fmt(f), str(int(g))]
        for k, a, b, c, d, e, f, g in zip(
            agg.k,
            agg.mean_total_energy,
            agg.mean_tvd,
            agg.median_tvd,
            agg.q1_tvd,
            agg.q3_tvd,
            agg.mean_cumulative_loss,
            agg.outliers_tvd,
        )
    )
    _write_csv(
        Path(path),
        [
            "k",
            "mean_total_energy",
            "mean_tvd",
            "median_tvd",
            "q1_tvd",
            "q3_tvd",
            "mean_cumulative_loss",
            "outliers_tvd",
        ],
        rows,
    )


def write_efficiency_csv(remaining: np.ndarray, tvd: np.ndarray, path: str | Path) -> None:
    rows = ([_fmt(x), _fmt(y)] for x, y in zip(remaining, tvd))
    _write_csv(Path(path), ["remaining_energy", "tvd"], rows)


def cell_dirname(protocol: str, beta: float) -> str:
    return f"{protocol.lower()}_beta{beta:g}"


def write_experiment_outputs(result: ExperimentResult, out_dir: Path) -> None:
    """Aggregate and efficiency CSVs per cell, raw per-rep files on request."""
    out_dir = Path(out_dir)
    for (protocol, beta), cell in result.cells.items():
        cell_dir = out_dir / cell_dirname(protocol, beta)
        write_aggregate_csv(cell.aggregate, cell_dir / "aggregate.csv")
        write_efficiency_csv(
            cell.aggregate.mean_total_energy,
            cell.aggregate.mean_tvd,
            cell_dir / "efficiency.csv",
        )
        if result.spec.emit_raw:
            for r, trajectory in enumerate(cell.trajectories):
                write_trajectory_csv(trajectory, cell_dir / "reps" / f"rep{r:03d}.csv")
                rem, tv = efficiency_series(trajectory)
                write_efficiency_csv(
                    rem, tv, cell_dir / "reps" / f"rep{r:03d}_efficiency.csv"
                )
    metadata = {
        "spec": result.spec.to_dict(),
        "kernel_backend": kernel_backend(),
        "package_version": __version__,
        "assumptions": {
            "d_epsilon_default": 0.01,
            "weight_init_interpretation": (
                "two_tier assigns the high weight to the first "
                "round(fraction_high * m) agents"
            ),
            "shared_initial_populations": (
                "replication r of every cell starts from the same initial "
                "energies, drawn from a stream keyed by (master seed, r)"
            ),
        },
        "cells": [
            {
                "cell_id": cell.cell_id,
                "protocol": protocol,
                "beta": beta,
                "directory": cell_dirname(protocol, beta),
                "truncated_runs": cell.truncated_runs,
            }
            for (protocol, beta), cell in result.cells.items()
        ],
    }
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "metadata.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(metadata, fh, indent=2, sort_keys=True)
        fh.write("\n")
