"""Balance metrics: distributions, total variation distance, deviations.

The energy distribution of a population assigns each agent its share of
the total energy; the weight distribution assigns each agent its share
of the total weight. The population is weighted-balanced when the two
distributions coincide, and the total variation distance between them
quantifies how far from balance the population is.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDistributionError
from .model import Population

# Absolute tolerance used to classify a deviation as exactly zero.
ZERO_TOL = 1e-12


def energy_distribution(pop: Population) -> np.ndarray:
    """Each agent's fraction of the population's total energy."""
    total = float(np.sum(pop.energies))
    if total <= 0.0:
        raise DegenerateDistributionError(
            "energy distribution undefined: total energy is zero"
        )
    return pop.energies / total


def weight_distribution(pop: Population) -> np.ndarray:
    """Each agent's fraction of the population's total weight."""
    return pop.weights / float(np.sum(pop.weights))


def tvd(p: np.ndarray, q: np.ndarray) -> float:
    """Total variation distance between two discrete distributions.

    Computed as half the L1 distance. Equivalent one-sided forms are
    exposed separately; in debug mode the forms are cross-checked.
    """
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape:
        raise ValueError("distributions must have the same length")
    value = 0.5 * float(np.sum(np.abs(p - q)))
    if __debug__:
        assert abs(value - tvd_one_sided(p, q)) <= 1e-12
    return value


def tvd_one_sided(p: np.ndarray, q: np.ndarray) -> float:
    """Total variation distance as the sum of positive excesses of p over q."""
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape:
        raise ValueError("distributions must have the same length")
    diff = p - q
    return float(np.sum(diff[diff > 0.0]))


def balance_distance(pop: Population) -> float:
    """Total variation distance between energy and weight distributions."""
    return tvd(energy_distribution(pop), weight_distribution(pop))


@dataclass(frozen=True)
class DeviationVector:
    """Per-agent deviation of energy share from weight share.

    ``above``, ``below`` and ``at`` partition the agent indices by the
    sign of the deviation, using an absolute tolerance to call a
    deviation zero.
    """

    z: np.ndarray
    above: np.ndarray
    below: np.ndarray
    at: np.ndarray

    @property
    def distance(self) -> float:
        """Total variation distance implied by the deviations."""
        return 0.5 * float(np.sum(np.abs(self.z)))


def deviation_vector(pop: Population, tol: float = ZERO_TOL) -> DeviationVector:
    """Deviation of each agent's energy share from its weight share."""
    z = energy_distribution(pop) - weight_distribution(pop)
    at = np.flatnonzero(np.abs(z) <= tol)
    above = np.flatnonzero(z > tol)
    below = np.flatnonzero(z < -tol)
    return DeviationVector(z=z, above=above, below=below, at=at)


def is_weighted_balanced(pop: Population, alpha: float) -> bool:
    """True when the balance distance does not exceed ``alpha``."""
    if not alpha >= 0.0:
        raise ValueError(f"alpha must be >= 0, got {alpha}")
    return balance_distance(pop) <= alpha
