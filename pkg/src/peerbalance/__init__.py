"""Peer-to-peer energy balancing in agent populations.

Agents hold energy and carry fixed weights; randomly scheduled pairwise
interactions move energy between them, losing a fixed fraction of every
transfer in transit. The package simulates three interaction protocols,
measures how far the energy distribution sits from the weighted target,
verifies the protocols' analytical guarantees by exact enumeration, and
reproduces the reference experiment grid.
"""

__version__ = "0.1.0"

from .engine import RunConfig, Trajectory, initialize_population, kernel_backend, run
from .errors import (
    DegenerateDistributionError,
    EnumerationGuardError,
    InsufficientEnergyError,
    InvalidPairError,
    ScheduleExhaustedError,
    WrongRegimeError,
)
from .experiments import (
    AggregateSeries,
    ExperimentResult,
    ExperimentSpec,
    aggregate_trajectories,
    default_spec,
    efficiency_series,
    run_experiment,
)
from .metrics import (
    DeviationVector,
    balance_distance,
    deviation_vector,
    energy_distribution,
    is_weighted_balanced,
    tvd,
    tvd_one_sided,
    weight_distribution,
)
from .model import AgentState, Population, TransferRecord, apply_transfer, loss, total_energy
from .oracle import (
    AdversarialInstance,
    BoundCheck,
    OneStepReport,
    adversarial_instance,
    contraction_bound_check,
    convergence_time_bound,
    exact_one_step,
    lossy_drift_bound_check,
    monte_carlo_one_step,
    single_deviator_population,
)
from .protocols import (
    OwaRegisters,
    ProtocolOutcome,
    SwtConfig,
    fixed_quantum_interact,
    owa_interact,
    ows_interact,
    swt_interact,
)
from .scheduler import ProbabilisticSchedule, ScriptedSchedule, pair_count, sample_pair

__all__ = [
    "__version__",
    "AgentState",
    "Population",
    "TransferRecord",
    "apply_transfer",
    "loss",
    "total_energy",
    "ProtocolOutcome",
    "SwtConfig",
    "OwaRegisters",
    "ows_interact",
    "swt_interact",
    "owa_interact",
    "fixed_quantum_interact",
    "pair_count",
    "sample_pair",
    "ProbabilisticSchedule",
    "ScriptedSchedule",
    "tvd",
    "tvd_one_sided",
    "energy_distribution",
    "weight_distribution",
    "balance_distance",
    "deviation_vector",
    "DeviationVector",
    "is_weighted_balanced",
    "RunConfig",
    "Trajectory",
    "run",
    "initialize_population",
    "kernel_backend",
    "OneStepReport",
    "BoundCheck",
    "AdversarialInstance",
    "exact_one_step",
    "monte_carlo_one_step",
    "contraction_bound_check",
    "single_deviator_population",
    "convergence_time_bound",
    "adversarial_instance",
    "lossy_drift_bound_check",
    "ExperimentSpec",
    "ExperimentResult",
    "AggregateSeries",
    "default_spec",
    "run_experiment",
    "aggregate_trajectories",
    "efficiency_series",
    "DegenerateDistributionError",
    "InsufficientEnergyError",
    "InvalidPairError",
    "ScheduleExhaustedError",
    "EnumerationGuardError",
    "WrongRegimeError",
]
