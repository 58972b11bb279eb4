"""Population state and the lossy transfer primitive.

A population is an ordered set of agents, each carrying a non-negative
energy level and a positive, immutable weight. Transfers move energy
between two agents; a fixed fraction beta of every transferred amount is
lost in transit, so the receiver is credited (1 - beta) times what the
sender gave up.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InsufficientEnergyError, InvalidPairError


@dataclass(frozen=True)
class AgentState:
    """Energy and weight of a single agent."""

    energy: float
    weight: float

    def __post_init__(self):
        if not self.energy >= 0.0:
            raise ValueError(f"agent energy must be >= 0, got {self.energy}")
        if not self.weight > 0.0:
            raise ValueError(f"agent weight must be > 0, got {self.weight}")


@dataclass(frozen=True)
class Population:
    """Immutable snapshot of all agent energies and weights plus the loss fraction.

    Arrays are copied on construction and marked read-only; operations
    that change energies return a new Population.
    """

    energies: np.ndarray
    weights: np.ndarray
    beta: float = 0.0
    # populated in __post_init__; excluded from comparison/repr
    m: int = field(init=False, repr=False, compare=False, default=0)

    def __post_init__(self):
        energies = np.array(self.energies, dtype=np.float64)
        weights = np.array(self.weights, dtype=np.float64)
        if energies.ndim != 1 or weights.ndim != 1:
            raise ValueError("energies and weights must be one-dimensional")
        if energies.shape != weights.shape:
            raise ValueError("energies and weights must have the same length")
        if energies.shape[0] < 2:
            raise ValueError("a population needs at least 2 agents")
        if not np.all(energies >= 0.0):
            raise ValueError("all energies must be >= 0")
        if not np.all(weights > 0.0):
            raise ValueError("all weights must be > 0")
        if not 0.0 <= self.beta < 1.0:
            raise ValueError(f"beta must lie in [0, 1), got {self.beta}")
        energies.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "energies", energies)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "m", int(energies.shape[0]))

    @property
    def agents(self) -> tuple[AgentState, ...]:
        return tuple(
            AgentState(float(e), float(w))
            for e, w in zip(self.energies, self.weights)
        )

    def with_energies(self, energies: np.ndarray) -> "Population":
        return Population(energies, self.weights, self.beta)


@dataclass(frozen=True)
class TransferRecord:
    """One executed transfer: who sent, who received, how much, what vanished."""

    sender: int
    receiver: int
    sent: float
    lost: float


def loss(epsilon: float, beta: float) -> float:
    """Energy lost in transit when ``epsilon`` is transferred, which is beta * epsilon."""
    if not epsilon >= 0.0:
        raise ValueError(f"transfer amount must be >= 0, got {epsilon}")
    if not 0.0 <= beta < 1.0:
        raise ValueError(f"beta must lie in [0, 1), got {beta}")
    return beta * epsilon


def total_energy(pop: Population) -> float:
    """Total energy currently held by the population."""
    return float(np.sum(pop.energies))


def apply_transfer(
    pop: Population, sender: int, receiver: int, epsilon: float
) -> tuple[Population, TransferRecord]:
    """Move ``epsilon`` energy from sender to receiver, charging the loss.

    The sender gives up the full amount and may end exactly at zero; the
    receiver is credited (1 - beta) * epsilon. Energies of all other
    agents are untouched. Weights never change.
    """
    m = pop.m
    if not (0 <= sender < m and 0 <= receiver < m):
        raise IndexError(f"agent index out of range for population of {m}")
    if sender == receiver:
        raise InvalidPairError("sender and receiver must be distinct agents")
    if not epsilon >= 0.0:
        raise ValueError(f"transfer amount must be >= 0, got {epsilon}")
    if epsilon > pop.energies[sender]:
        raise InsufficientEnergyError(
            f"agent {sender} holds {pop.energies[sender]!r}, cannot send {epsilon!r}"
        )
    new_energies = np.array(pop.energies, dtype=np.float64)
    new_energies[sender] = new_energies[sender] - epsilon
    new_energies[receiver] = new_energies[receiver] + (1.0 - pop.beta) * epsilon
    record = TransferRecord(
        sender=sender, receiver=receiver, sent=epsilon, lost=pop.beta * epsilon
    )
    return pop.with_energies(new_energies), record
