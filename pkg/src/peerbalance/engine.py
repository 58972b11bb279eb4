"""Simulation engine: build a population, schedule pairs, record a trajectory.

A run draws pairs until the configured number of useful interactions
(interactions that actually moved energy) has happened, or until the
scheduler draw cap is hit, whichever comes first. Hitting the cap marks
the trajectory as truncated instead of raising, because some protocols
legitimately stop producing useful interactions (a balanced pair under
the weighted-share protocol transfers nothing, forever).

The hot loop lives in a compiled kernel when available; a pure Python
kernel with bit-identical semantics is selected otherwise. Set
PEERBALANCE_BACKEND=python or =compiled to force the choice.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from . import metrics
from .model import Population
from .protocols import OwaRegisters, SwtConfig, owa_interact, ows_interact, swt_interact
from .rng import STREAM_INIT, STREAM_SCHED, SplitMix64, derive_seed


def _select_kernel():
    forced = os.environ.get("PEERBALANCE_BACKEND", "").strip().lower()
    if forced == "python":
        from . import _kernel_py

        return _kernel_py
    try:
        from . import _kernel

        return _kernel
    except ImportError:
        if forced == "compiled":
            raise ImportError(
                "PEERBALANCE_BACKEND=compiled but the compiled kernel is not built"
            )
        from . import _kernel_py

        return _kernel_py


KERNEL = _select_kernel()

PROTOCOL_IDS = {"OWS": 0, "SWT": 1, "OWA": 2}

DEFAULT_ENERGY_INIT = ("uniform", 1.0, 100.0)
DEFAULT_WEIGHT_INIT = ("two_tier", 0.1, 10.0, 1.0)

# A run may burn at most this many scheduler draws per requested useful
# interaction before it is declared truncated.
DRAW_CAP_FACTOR = 10_000


def kernel_backend() -> str:
    """Name of the active simulation kernel: 'compiled' or 'python'."""
    return KERNEL.BACKEND_NAME


@dataclass(frozen=True)
class RunConfig:
    """Everything that determines a single run, including its randomness."""

    m: int
    protocol: str
    beta: float
    budget: int
    seed: int
    d_epsilon: float = 0.01
    transfer_threshold: float = 0.0
    max_draws: int | None = None
    energy_init: tuple | np.ndarray = DEFAULT_ENERGY_INIT
    weight_init: tuple | np.ndarray = DEFAULT_WEIGHT_INIT

    def __post_init__(self):
        object.__setattr__(self, "protocol", str(self.protocol).upper())
        if self.protocol not in PROTOCOL_IDS:
            raise ValueError(
                f"protocol must be one of {sorted(PROTOCOL_IDS)}, got {self.protocol!r}"
            )
        if self.m < 2:
            raise ValueError(f"m must be >= 2, got {self.m}")
        if self.budget < 1:
            raise ValueError(f"budget must be >= 1, got {self.budget}")
        if not 0.0 <= self.beta < 1.0:
            raise ValueError(f"beta must lie in [0, 1), got {self.beta}")
        if not self.d_epsilon > 0.0:
            raise ValueError(f"d_epsilon must be > 0, got {self.d_epsilon}")
        if self.max_draws is not None and self.max_draws < self.budget:
            raise ValueError("max_draws must be at least the useful budget")

    @property
    def draw_cap(self) -> int:
        if self.max_draws is not None:
            return self.max_draws
        return DRAW_CAP_FACTOR * self.budget


@dataclass(frozen=True)
class Trajectory:
    """Recorded run: one row per useful interaction, plus the end state.

    Row arrays all share length ``useful``; ``k`` counts useful
    interactions from 1 and ``draws`` counts scheduler draws consumed up
    to and including the recorded interaction.
    """

    k: np.ndarray
    draws: np.ndarray
    total_energy: np.ndarray
    tvd: np.ndarray
    cumulative_loss: np.ndarray
    final_energies: np.ndarray
    weights: np.ndarray
    beta: float
    initial_total: float
    initial_tvd: float
    truncated: bool
    draws_total: int
    budget: int

    @property
    def useful(self) -> int:
        return int(self.k.shape[0])


def two_tier_weights(m: int, fraction_high: float, high: float, low: float) -> np.ndarray:
    """First round(fraction_high * m) agents get the high weight, the rest the low."""
    if not 0.0 <= fraction_high <= 1.0:
        raise ValueError(f"fraction_high must lie in [0, 1], got {fraction_high}")
    if not (high > 0.0 and low > 0.0):
        raise ValueError("weights must be > 0")
    n_high = int(round(fraction_high * m))
    weights = np.full(m, low, dtype=np.float64)
    weights[:n_high] = high
    return weights


def initialize_population(
    m: int,
    energy_init,
    weight_init,
    beta: float,
    rng: SplitMix64,
) -> Population:
    """Build the starting population from declarative init specs.

    ``energy_init`` is ("uniform", low, high) for i.i.d. continuous
    uniform energies drawn from ``rng`` in agent order, or an explicit
    vector. ``weight_init`` is ("two_tier", fraction_high, high, low),
    ("uniform", value), or an explicit vector.
    """
    if isinstance(energy_init, (tuple, list)) and len(energy_init) > 0 and energy_init[0] == "uniform":
        if len(energy_init) != 3:
            raise ValueError(f"malformed energy init spec: {energy_init!r}")
        low, high = float(energy_init[1]), float(energy_init[2])
        if not (0.0 <= low <= high):
            raise ValueError(f"energy range must satisfy 0 <= low <= high: {energy_init!r}")
        energies = np.array([rng.uniform(low, high) for _ in range(m)], dtype=np.float64)
    else:
        energies = np.asarray(energy_init, dtype=np.float64)
        if energies.shape != (m,):
            raise ValueError(f"explicit energies must have length m={m}")

    if isinstance(weight_init, (tuple, list)) and len(weight_init) > 0 and weight_init[0] == "two_tier":
        if len(weight_init) != 4:
            raise ValueError(f"malformed weight init spec: {weight_init!r}")
        weights = two_tier_weights(m, float(weight_init[1]), float(weight_init[2]), float(weight_init[3]))
    elif isinstance(weight_init, (tuple, list)) and len(weight_init) > 0 and weight_init[0] == "uniform":
        if len(weight_init) != 2:
            raise ValueError(f"malformed weight init spec: {weight_init!r}")
        weights = np.full(m, float(weight_init[1]), dtype=np.float64)
    else:
        weights = np.asarray(weight_init, dtype=np.float64)
        if weights.shape != (m,):
            raise ValueError(f"explicit weights must have length m={m}")

    return Population(energies, weights, beta)


def run(config: RunConfig, schedule=None) -> Trajectory:
    """Execute one run and record its trajectory.

    With ``schedule=None`` pairs come from the seeded probabilistic
    scheduler via the fast kernel. Passing an object with a
    ``next() -> (i, j)`` method (such as ScriptedSchedule) replays that
    schedule instead, through a pure Python loop with identical
    protocol semantics.
    """
    init_rng = SplitMix64(derive_seed(config.seed, STREAM_INIT))
    pop = initialize_population(
        config.m, config.energy_init, config.weight_init, config.beta, init_rng
    )
    initial_total = float(np.sum(pop.energies))
    initial_tvd = metrics.balance_distance(pop)

    e = np.array(pop.energies, dtype=np.float64)
    w = np.array(pop.weights, dtype=np.float64)
    wn = w / float(np.sum(w))
    reg_nrg = e.copy()
    reg_wt = w.copy()

    budget = config.budget
    out_draws = np.zeros(budget, dtype=np.int64)
    out_total = np.zeros(budget, dtype=np.float64)
    out_tvd = np.zeros(budget, dtype=np.float64)
    out_loss = np.zeros(budget, dtype=np.float64)

    if schedule is None:
        sched_seed = derive_seed(config.seed, STREAM_SCHED)
        useful, draws = KERNEL.run_loop(
            e,
            w,
            wn,
            config.beta,
            PROTOCOL_IDS[config.protocol],
            config.d_epsilon,
            config.transfer_threshold,
            budget,
            config.draw_cap,
            sched_seed,
            reg_nrg,
            reg_wt,
            out_draws,
            out_total,
            out_tvd,
            out_loss,
        )
    else:
        useful, draws = _scripted_loop(
            e, w, wn, config, schedule, reg_nrg, reg_wt,
            out_draws, out_total, out_tvd, out_loss,
        )

    useful = int(useful)
    return Trajectory(
        k=np.arange(1, useful + 1, dtype=np.int64),
        draws=out_draws[:useful].copy(),
        total_energy=out_total[:useful].copy(),
        tvd=out_tvd[:useful].copy(),
        cumulative_loss=out_loss[:useful].copy(),
        final_energies=e,
        weights=w,
        beta=config.beta,
        initial_total=initial_total,
        initial_tvd=initial_tvd,
        truncated=useful < budget,
        draws_total=int(draws),
        budget=budget,
    )


def _scripted_loop(e, w, wn, config, schedule, reg_nrg, reg_wt,
                   out_draws, out_total, out_tvd, out_loss):
    """Replay an explicit schedule with the same semantics as the kernel."""
    m = int(e.shape[0])
    protocol = config.protocol
    beta = config.beta
    swt_cfg = SwtConfig(config.d_epsilon)
    el = [float(x) for x in e]
    wl = [float(x) for x in w]
    wnl = [float(x) for x in wn]
    nrgl = [float(x) for x in reg_nrg]
    wtl = [float(x) for x in reg_wt]

    useful = 0
    draws = 0
    cum_loss = 0.0
    max_draws = config.draw_cap
    while useful < config.budget and draws < max_draws:
        i, j = schedule.next()
        draws += 1
        if not (0 <= i < m and 0 <= j < m):
            raise ValueError(f"scheduled pair ({i}, {j}) out of range for m={m}")
        if protocol == "OWS":
            out = ows_interact(el[i], wl[i], el[j], wl[j], beta, config.transfer_threshold)
        elif protocol == "SWT":
            out = swt_interact(el[i], wl[i], el[j], wl[j], beta, swt_cfg)
        else:
            out, reg_i, reg_j = owa_interact(
                el[i], wl[i], OwaRegisters(nrgl[i], wtl[i]),
                el[j], wl[j], OwaRegisters(nrgl[j], wtl[j]),
                beta,
            )
            nrgl[i], wtl[i] = reg_i.nrg, reg_i.wt
            nrgl[j], wtl[j] = reg_j.nrg, reg_j.wt
        if out.useful:
            el[i] = out.new_energy_u
            el[j] = out.new_energy_v
            cum_loss = cum_loss + out.lost
            total = 0.0
            for x in el:
                total += x
            s = 0.0
            for k in range(m):
                s += abs(el[k] / total - wnl[k])
            out_draws[useful] = draws
            out_total[useful] = total
            out_tvd[useful] = 0.5 * s
            out_loss[useful] = cum_loss
            useful += 1

    e[:] = el
    reg_nrg[:] = nrgl
    reg_wt[:] = wtl
    return useful, draws
