"""Pairwise interaction protocols.

All three protocols see only the two interacting agents' energies and
weights (plus, for OWA, the agents' own bookkeeping registers). They
decide who sends, how much is sent, and apply the lossy transfer rule:
the sender gives up the full amount, the receiver gains (1 - beta)
times it.

OWS  weighted share: rebalance the pair so each agent ends on its
     weighted share of the pair's energy. The relatively richer agent
     (larger energy to weight ratio) sends exactly the pair imbalance.
OWA  online weighted average: like OWS, but each agent tracks a running
     estimate of the population's energy and weight from the peers it
     has met, and the pair transfers only when exactly one of the two
     believes itself above its fair share.
SWT  small weighted transfer: move a small quantum, proportional to the
     relative energy gap, from the richer side, with branch guards that
     prevent overshooting past balance.

The compiled kernel inlines the same arithmetic, expression by
expression; keep the two in lockstep.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class ProtocolOutcome:
    """Result of one pairwise interaction.

    ``useful`` is True exactly when energy actually moved
    (``transferred`` > 0).
    """

    new_energy_u: float
    new_energy_v: float
    transferred: float
    lost: float
    useful: bool


@dataclass(frozen=True)
class SwtConfig:
    """Quantum scale for the small-transfer protocol."""

    d_epsilon: float = 0.01

    def __post_init__(self):
        if not self.d_epsilon > 0.0:
            raise ValueError(f"d_epsilon must be > 0, got {self.d_epsilon}")


@dataclass(frozen=True)
class OwaRegisters:
    """One agent's running totals of observed energy and weight.

    Initialized to the agent's own starting energy and weight; every
    interaction adds the peer's pre-interaction energy and weight.
    """

    nrg: float
    wt: float


def ows_interact(
    eps_u: float,
    w_u: float,
    eps_v: float,
    w_v: float,
    beta: float,
    threshold: float = 0.0,
) -> ProtocolOutcome:
    """Rebalance the pair onto weighted shares; the richer side pays.

    The transfer amount is the pair imbalance
    ``|w_v * eps_u - w_u * eps_v| / (w_u + w_v)``; with beta = 0 both
    agents land exactly on their weighted share of the pair's energy.
    A positive ``threshold`` suppresses the transfer unless the relative
    energy gap ``|eps_u / w_u - eps_v / w_v|`` exceeds it.
    """
    delta = abs(w_v * eps_u - w_u * eps_v) / (w_u + w_v)
    if threshold > 0.0 and not abs(eps_u / w_u - eps_v / w_v) > threshold:
        return ProtocolOutcome(eps_u, eps_v, 0.0, 0.0, False)
    if not delta > 0.0:
        return ProtocolOutcome(eps_u, eps_v, 0.0, 0.0, False)
    if eps_u / w_u > eps_v / w_v:
        new_u = eps_u - delta
        new_v = eps_v + (1.0 - beta) * delta
    else:
        new_u = eps_u + (1.0 - beta) * delta
        new_v = eps_v - delta
    return ProtocolOutcome(new_u, new_v, delta, beta * delta, True)


def swt_interact(
    eps_u: float,
    w_u: float,
    eps_v: float,
    w_v: float,
    beta: float,
    cfg: SwtConfig,
) -> ProtocolOutcome:
    """Move a small quantum from the richer side of the pair.

    The quantum is ``phi * d_epsilon`` where phi is the relative energy
    gap ``|eps_u / w_u - eps_v / w_v|``. Each branch guard checks that
    the sender stays relatively richer-or-equal after the move, so the
    transfer never overshoots balance and the sender never goes
    negative.
    """
    phi = abs(eps_u / w_u - eps_v / w_v)
    amount = phi * cfg.d_epsilon
    if (eps_u - amount) / w_u >= (eps_v + amount) / w_v:
        new_u = eps_u - amount
        new_v = eps_v + (1.0 - beta) * amount
    elif (eps_u + amount) / w_u < (eps_v - amount) / w_v:
        new_u = eps_u + (1.0 - beta) * amount
        new_v = eps_v - amount
    else:
        return ProtocolOutcome(eps_u, eps_v, 0.0, 0.0, False)
    if not amount > 0.0:
        return ProtocolOutcome(eps_u, eps_v, 0.0, 0.0, False)
    return ProtocolOutcome(new_u, new_v, amount, beta * amount, True)


def owa_interact(
    eps_u: float,
    w_u: float,
    reg_u: OwaRegisters,
    eps_v: float,
    w_v: float,
    reg_v: OwaRegisters,
    beta: float,
) -> tuple[ProtocolOutcome, OwaRegisters, OwaRegisters]:
    """Share observations, then transfer if exactly one side looks rich.

    Both agents first fold the peer's pre-interaction energy and weight
    into their registers; this happens on every interaction, transfer or
    not. Each agent then compares its energy against its own estimated
    fair share ``(w / wt) * nrg``. When exactly one of the two sits
    strictly above its estimate, the pair performs the weighted-share
    transfer; otherwise energies stay put.
    """
    new_reg_u = OwaRegisters(reg_u.nrg + eps_v, reg_u.wt + w_v)
    new_reg_v = OwaRegisters(reg_v.nrg + eps_u, reg_v.wt + w_u)
    above_u = eps_u > (w_u / new_reg_u.wt) * new_reg_u.nrg
    above_v = eps_v > (w_v / new_reg_v.wt) * new_reg_v.nrg
    if above_u == above_v:
        outcome = ProtocolOutcome(eps_u, eps_v, 0.0, 0.0, False)
        return outcome, new_reg_u, new_reg_v
    delta = abs((w_v * eps_u - w_u * eps_v) / (w_u + w_v))
    if not delta > 0.0:
        outcome = ProtocolOutcome(eps_u, eps_v, 0.0, 0.0, False)
        return outcome, new_reg_u, new_reg_v
    if eps_u / w_u > eps_v / w_v:
        new_u = eps_u - delta
        new_v = eps_v + (1.0 - beta) * delta
    else:
        new_u = eps_u + (1.0 - beta) * delta
        new_v = eps_v - delta
    outcome = ProtocolOutcome(new_u, new_v, delta, beta * delta, True)
    return outcome, new_reg_u, new_reg_v


def fixed_quantum_interact(
    eps_u: float,
    eps_v: float,
    beta: float,
    d_epsilon: float,
) -> ProtocolOutcome:
    """Uniform-weight analysis variant: a flat quantum moves when levels differ.

    When the energy gap exceeds ``d_epsilon`` the richer agent sends
    exactly ``d_epsilon`` and the receiver gains (1 - beta) times it.
    This is the transfer rule assumed by the drift analysis of the
    small-transfer protocol; it is exposed so the analytical check can
    enumerate the exact semantics it bounds.
    """
    if not d_epsilon > 0.0:
        raise ValueError(f"d_epsilon must be > 0, got {d_epsilon}")
    if abs(eps_u - eps_v) > d_epsilon:
        if eps_u > eps_v:
            new_u = eps_u - d_epsilon
            new_v = eps_v + (1.0 - beta) * d_epsilon
        else:
            new_u = eps_u + (1.0 - beta) * d_epsilon
            new_v = eps_v - d_epsilon
        return ProtocolOutcome(new_u, new_v, d_epsilon, beta * d_epsilon, True)
    return ProtocolOutcome(eps_u, eps_v, 0.0, 0.0, False)
