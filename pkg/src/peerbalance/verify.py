"""User-facing verification checks, one per analytical guarantee.

Each check returns (ok, detail) so the command line can print one
pass/fail line per guarantee. The heavy lifting lives in ``oracle``;
the convergence and adversarial checks also drive the engine, because
they compare simulated trajectories against closed forms.
"""

from __future__ import annotations

import math

import numpy as np

from . import metrics, oracle
from .engine import (
    DEFAULT_ENERGY_INIT,
    DEFAULT_WEIGHT_INIT,
    RunConfig,
    initialize_population,
    run,
)
from .experiments import DEFAULT_MASTER_SEED
from .model import Population
from .rng import STREAM_INIT, SplitMix64, derive_seed
from .scheduler import ScriptedSchedule

# Stream tag for the convergence check's replications.
CONVERGENCE_TAG = 31


def check_contraction(instances: int = 1000, seed: int = 20260816) -> tuple[bool, str]:
    """Contraction bound on random loss-less populations."""
    sweep = oracle.contraction_sweep(instances=instances, seed=seed)
    detail = (
        f"{sweep.holds}/{sweep.instances} instances hold, "
        f"worst lhs-rhs={sweep.worst_violation:.3e}"
    )
    return sweep.all_hold, detail


def check_tightness(ms: tuple[int, ...] = (5, 20, 100)) -> tuple[bool, str]:
    """Contraction bound is an equality on single-deviator populations."""
    results = oracle.tightness_sweep(ms=ms)
    gap = max(abs(check.lhs - check.rhs) for _, _, check in results)
    ok = gap <= oracle.BOUND_TOL
    return ok, f"{len(results)} instances, max |lhs-rhs|={gap:.3e}"


def check_convergence(
    m: int = 100,
    reps: int = 100,
    target: float = 0.01,
    seed: int = DEFAULT_MASTER_SEED,
) -> tuple[bool, str]:
    """Mean balance distance is below the target at the predicted draw count.

    Loss-less weighted-share runs; each replication runs for
    ceil(pair_count * ln(initial distance / target)) scheduler draws,
    the draw count the contraction bound says suffices on average.
    """
    finals = []
    for r in range(reps):
        run_seed = derive_seed(seed, CONVERGENCE_TAG, r)
        # measure the initial distance of the population this seed will build
        init_rng = SplitMix64(derive_seed(run_seed, STREAM_INIT))
        pop = initialize_population(
            m, DEFAULT_ENERGY_INIT, DEFAULT_WEIGHT_INIT, 0.0, init_rng
        )
        initial = metrics.balance_distance(pop)
        if initial <= target:
            finals.append(initial)
            continue
        draws = math.ceil(oracle.convergence_time_bound(m, initial, target))
        trajectory = run(
            RunConfig(
                m=m,
                protocol="OWS",
                beta=0.0,
                budget=draws,
                max_draws=draws,
                seed=run_seed,
            )
        )
        final_pop = Population(trajectory.final_energies, trajectory.weights, 0.0)
        finals.append(metrics.balance_distance(final_pop))
    mean_final = float(np.mean(finals))
    return mean_final <= target, f"mean final distance {mean_final:.6f} vs target {target}"


def check_adversarial(m: int = 20, beta: float = 0.2) -> tuple[bool, str]:
    """Simulated adversarial interaction matches its closed form and regresses."""
    inst = oracle.adversarial_instance(m, beta)
    config = RunConfig(
        m=m,
        protocol="OWS",
        beta=beta,
        budget=1,
        seed=0,
        energy_init=inst.population.energies,
        weight_init=inst.population.weights,
    )
    trajectory = run(config, schedule=ScriptedSchedule([inst.pair], m=m))
    simulated = float(trajectory.tvd[0])
    err = abs(simulated - inst.predicted_tvd_after)
    ok = err <= 1e-12 and simulated > inst.initial_tvd
    detail = (
        f"simulated {simulated:.12f}, predicted {inst.predicted_tvd_after:.12f}, "
        f"initial {inst.initial_tvd:.12f}"
    )
    return ok, detail


def check_lossy_drift(instances: int = 1000, seed: int = 20260816) -> tuple[bool, str]:
    """Drift bound of the fixed-quantum rule on uniform-weight populations."""
    sweep = oracle.drift_sweep(instances=instances, seed=seed)
    detail = (
        f"{sweep.holds}/{sweep.instances} instances hold, "
        f"worst lhs-rhs={sweep.worst_violation:.3e}"
    )
    return sweep.all_hold, detail


ALL_CHECKS = {
    "contraction": check_contraction,
    "tightness": check_tightness,
    "convergence": check_convergence,
    "adversarial": check_adversarial,
    "lossy-drift": check_lossy_drift,
}
