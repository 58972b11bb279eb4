"""Analytical checks computed by exact enumeration over all pairs.

The scheduler picks unordered pairs uniformly, so a one-step
expectation is the plain average over all m * (m - 1) / 2 pairs. These
routines enumerate that average exactly and compare it against the
closed-form bounds the protocols are designed to satisfy:

* contraction: with no transfer loss, the weighted-share protocol
  shrinks the expected balance distance by at least the factor
  (1 - 1 / pair_count) per interaction, with equality exactly when a
  single agent deviates from its weighted share;
* convergence time: iterating that contraction bounds the number of
  scheduler draws needed to push the expected balance distance below a
  target;
* adversarial regression: with transfer loss, one particular unbalanced
  population gets strictly worse in a single interaction, and its new
  balance distance has a closed form;
* lossy drift: under the fixed-quantum transfer rule with uniform
  weights, the expected one-step change of the balance distance is at
  most (d_epsilon / total_after) * (2 * beta - a_plus * a_minus / (m * (m - 1))),
  where a_plus and a_minus count agents above and below the average.

Every check reports (lhs, rhs, holds) so callers can display margins
instead of bare booleans.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from . import metrics
from .errors import EnumerationGuardError, WrongRegimeError
from .model import Population
from .protocols import (
    OwaRegisters,
    SwtConfig,
    fixed_quantum_interact,
    owa_interact,
    ows_interact,
    swt_interact,
)
from .scheduler import pair_count

# Absolute slack granted to every inequality check, covering float
# accumulation noise in the enumeration.
BOUND_TOL = 1e-9

# Enumerations beyond this many pairs are refused.
MAX_ENUMERATION_PAIRS = 10**6


@dataclass(frozen=True)
class OneStepReport:
    """Exact distribution of the balance distance after one interaction."""

    tvd_before: float
    expected_tvd_after: float
    expected_delta: float
    pair_i: np.ndarray
    pair_j: np.ndarray
    tvd_after: np.ndarray
    useful: np.ndarray


@dataclass(frozen=True)
class BoundCheck:
    """One inequality check: holds means lhs <= rhs + BOUND_TOL."""

    lhs: float
    rhs: float
    holds: bool

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs


def exact_one_step(
    pop: Population,
    protocol: str,
    *,
    d_epsilon: float = 0.01,
    threshold: float = 0.0,
    owa_registers: tuple[np.ndarray, np.ndarray] | None = None,
    max_pairs: int = MAX_ENUMERATION_PAIRS,
) -> OneStepReport:
    """Enumerate every pair once and average the post-interaction distance.

    ``protocol`` is OWS, SWT, OWA or FIXED_QUANTUM. For OWA the agents'
    registers default to their time-zero values (own energy, own
    weight); pass ``owa_registers=(nrg, wt)`` to start elsewhere.
    """
    m = pop.m
    n_pairs = pair_count(m)
    if n_pairs > max_pairs:
        raise EnumerationGuardError(
            f"enumeration of {n_pairs} pairs exceeds the cap of {max_pairs}"
        )
    protocol = protocol.upper()
    if protocol not in ("OWS", "SWT", "OWA", "FIXED_QUANTUM"):
        raise ValueError(f"unknown protocol {protocol!r}")

    e = pop.energies
    wn = metrics.weight_distribution(pop)
    tvd_before = metrics.tvd(metrics.energy_distribution(pop), wn)
    beta = pop.beta
    el = [float(x) for x in e]
    wl = [float(x) for x in pop.weights]
    swt_cfg = SwtConfig(d_epsilon)
    if protocol == "OWA":
        if owa_registers is None:
            nrg, wt = el, wl
        else:
            nrg = [float(x) for x in owa_registers[0]]
            wt = [float(x) for x in owa_registers[1]]

    pair_i = np.empty(n_pairs, dtype=np.int64)
    pair_j = np.empty(n_pairs, dtype=np.int64)
    tvd_after = np.empty(n_pairs, dtype=np.float64)
    useful = np.empty(n_pairs, dtype=bool)

    for idx, (i, j) in enumerate(combinations(range(m), 2)):
        if protocol == "OWS":
            out = ows_interact(el[i], wl[i], el[j], wl[j], beta, threshold)
        elif protocol == "SWT":
            out = swt_interact(el[i], wl[i], el[j], wl[j], beta, swt_cfg)
        elif protocol == "OWA":
            out, _, _ = owa_interact(
                el[i], wl[i], OwaRegisters(nrg[i], wt[i]),
                el[j], wl[j], OwaRegisters(nrg[j], wt[j]),
                beta,
            )
        else:
            out = fixed_quantum_interact(el[i], el[j], beta, d_epsilon)
        tmp = np.array(e, dtype=np.float64)
        tmp[i] = out.new_energy_u
        tmp[j] = out.new_energy_v
        total = float(np.sum(tmp))
        pair_i[idx] = i
        pair_j[idx] = j
        tvd_after[idx] = 0.5 * float(np.sum(np.abs(tmp / total - wn)))
        useful[idx] = out.useful

    expected_after = float(np.mean(tvd_after))
    expected_delta = float(np.mean(tvd_after - tvd_before))
    return OneStepReport(
        tvd_before=tvd_before,
        expected_tvd_after=expected_after,
        expected_delta=expected_delta,
        pair_i=pair_i,
        pair_j=pair_j,
        tvd_after=tvd_after,
        useful=useful,
    )


def monte_carlo_one_step(
    pop: Population,
    protocol: str,
    draws: int = 10**6,
    seed: int = 0,
    **kwargs,
) -> tuple[float, float]:
    """Estimate the one-step expectation by sampling uniform pair draws.

    Sampling uses an independent generator (numpy PCG64), so agreement
    with ``exact_one_step`` within a few standard errors cross-checks
    the enumeration's uniform weighting. Returns (mean, standard error).
    """
    report = exact_one_step(pop, protocol, **kwargs)
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, report.tvd_after.shape[0], size=draws)
    sample = report.tvd_after[idx]
    mean = float(np.mean(sample))
    stderr = float(np.std(sample, ddof=1) / math.sqrt(draws))
    return mean, stderr


def contraction_bound_check(pop: Population, threshold: float = 0.0) -> BoundCheck:
    """Expected one-step distance under loss-less OWS vs the contraction bound.

    Requires beta = 0; the contraction factor is (1 - 1 / pair_count).
    """
    if pop.beta != 0.0:
        raise WrongRegimeError(
            f"the contraction bound applies to loss-less transfers, got beta={pop.beta}"
        )
    report = exact_one_step(pop, "OWS", threshold=threshold)
    rhs = (1.0 - 1.0 / pair_count(pop.m)) * report.tvd_before
    lhs = report.expected_tvd_after
    return BoundCheck(lhs=lhs, rhs=rhs, holds=lhs <= rhs + BOUND_TOL)


def single_deviator_population(
    m: int,
    delta: float,
    weights=None,
    total: float = 100.0,
    deviator: int = 0,
    beta: float = 0.0,
) -> Population:
    """Population where exactly one agent sits off its weighted share.

    Start from perfect balance at the given total, add ``delta`` energy
    to the deviator and remove it from the others in proportion to
    their weights. The deviator ends the only agent on its side of
    balance, which is the regime where the contraction bound is tight.
    """
    if m < 2:
        raise ValueError(f"m must be >= 2, got {m}")
    w = np.full(m, 1.0) if weights is None else np.asarray(weights, dtype=np.float64)
    if w.shape != (m,):
        raise ValueError(f"weights must have length m={m}")
    sum_w = float(np.sum(w))
    energies = w * (total / sum_w)
    rest = sum_w - float(w[deviator])
    energies = energies - delta * (w / rest)
    energies[deviator] = float(w[deviator]) * (total / sum_w) + delta
    if np.any(energies < 0.0):
        raise ValueError("delta too large: some agent would go below zero energy")
    return Population(energies, w, beta)


def convergence_time_bound(m: int, tvd0: float, c: float) -> float:
    """Scheduler draws after which the expected balance distance is below c.

    Iterating the one-step contraction gives pair_count(m) * ln(tvd0 / c)
    draws under loss-less OWS. The target must sit strictly between 0
    and the initial distance, otherwise the bound is zero or negative
    and a ValueError is raised.
    """
    if m < 2:
        raise ValueError(f"m must be >= 2, got {m}")
    if not 0.0 < tvd0 <= 1.0:
        raise ValueError(f"initial distance must lie in (0, 1], got {tvd0}")
    if not 0.0 < c < tvd0:
        raise ValueError(
            f"target must lie in (0, initial distance); got c={c}, tvd0={tvd0}"
        )
    return pair_count(m) * math.log(tvd0 / c)


@dataclass(frozen=True)
class AdversarialInstance:
    """Unbalanced population that a lossy interaction makes strictly worse."""

    population: Population
    pair: tuple[int, int]
    initial_tvd: float
    predicted_tvd_after: float


def adversarial_instance(m: int, beta: float) -> AdversarialInstance:
    """Uniform-weight population whose balance degrades in one interaction.

    m - 1 agents hold energy m each and one agent holds nothing. When
    the empty agent interacts with any full one under the weighted-share
    rule with loss fraction beta, the balance distance moves from 1/m to
    2/m - (2 - beta) / (2m - 2 - beta), which is strictly larger
    whenever m > (2 + beta) / beta.
    """
    if not 0.0 < beta < 1.0:
        raise ValueError(f"beta must lie in (0, 1) for the adversarial instance, got {beta}")
    if not m > (2.0 + beta) / beta:
        raise ValueError(
            f"m must exceed (2 + beta) / beta = {(2.0 + beta) / beta:.3f}, got {m}"
        )
    energies = np.full(m, float(m), dtype=np.float64)
    energies[m - 1] = 0.0
    pop = Population(energies, np.ones(m), beta)
    predicted = 2.0 / m - (2.0 - beta) / (2.0 * m - 2.0 - beta)
    return AdversarialInstance(
        population=pop,
        pair=(0, m - 1),
        initial_tvd=1.0 / m,
        predicted_tvd_after=predicted,
    )


def lossy_drift_bound_check(
    pop: Population, d_epsilon: float, beta: float | None = None
) -> BoundCheck:
    """Expected one-step drift under fixed-quantum transfers vs its bound.

    Uniform weights only. The bound scales with the transfer quantum:
    rhs = (d_epsilon / total_after) * (2 * beta - a_plus * a_minus / (m * (m - 1)))
    with total_after = total - beta * d_epsilon, the population total
    once one quantum has moved. The negative term is what one
    above-average/below-average interaction removes; the positive term
    is what the transit loss adds back across all agents.

    The bound's derivation assumes the quantum is small against the
    population's energy spread: every above-average agent must sit more
    than d_epsilon above every below-average agent, and no agent within
    one quantum of the average. Populations bunched tighter than that
    leave cross pairs dormant and can drift slightly above the bound.
    """
    w = pop.weights
    if not np.all(w == w[0]):
        raise WrongRegimeError("the drift bound applies to uniform weights only")
    if beta is None:
        beta = pop.beta
    if not 0.0 <= beta < 1.0:
        raise ValueError(f"beta must lie in [0, 1), got {beta}")
    check_pop = pop if beta == pop.beta else Population(pop.energies, w, beta)
    report = exact_one_step(check_pop, "FIXED_QUANTUM", d_epsilon=d_epsilon)
    dv = metrics.deviation_vector(check_pop)
    m = check_pop.m
    a_plus = int(dv.above.shape[0])
    a_minus = int(dv.below.shape[0])
    total_after = float(np.sum(check_pop.energies)) - beta * d_epsilon
    rhs = (d_epsilon / total_after) * (2.0 * beta - (a_plus * a_minus) / (m * (m - 1)))
    lhs = report.expected_delta
    return BoundCheck(lhs=lhs, rhs=rhs, holds=lhs <= rhs + BOUND_TOL)


def random_population(
    rng: np.random.Generator,
    m: int,
    beta: float = 0.0,
    energy_range: tuple[float, float] = (1.0, 100.0),
    weight_range: tuple[float, float] = (1.0, 10.0),
    uniform_weights: bool = False,
) -> Population:
    """Random test population; weights are i.i.d. uniform unless flattened."""
    energies = rng.uniform(energy_range[0], energy_range[1], size=m)
    if uniform_weights:
        weights = np.ones(m)
    else:
        weights = rng.uniform(weight_range[0], weight_range[1], size=m)
    return Population(energies, weights, beta)


@dataclass(frozen=True)
class SweepResult:
    """Aggregate outcome of a randomized bound-check sweep."""

    instances: int
    holds: int
    worst_violation: float

    @property
    def all_hold(self) -> bool:
        return self.holds == self.instances


def contraction_sweep(
    instances: int = 1000,
    ms: tuple[int, ...] = (3, 5, 10, 20, 50),
    seed: int = 20260816,
) -> SweepResult:
    """Check the contraction bound on random loss-less populations."""
    rng = np.random.default_rng(seed)
    holds = 0
    worst = -math.inf
    for _ in range(instances):
        m = int(rng.choice(ms))
        pop = random_population(rng, m, beta=0.0)
        check = contraction_bound_check(pop)
        holds += bool(check.holds)
        worst = max(worst, check.lhs - check.rhs)
    return SweepResult(instances=instances, holds=holds, worst_violation=worst)


def drift_sweep(
    instances: int = 1000,
    ms: tuple[int, ...] = (5, 10, 20),
    betas: tuple[float, ...] = (0.1, 0.5),
    d_epsilon: float = 0.01,
    seed: int = 20260816,
) -> SweepResult:
    """Check the lossy drift bound on random uniform-weight populations."""
    rng = np.random.default_rng(seed)
    holds = 0
    worst = -math.inf
    for n in range(instances):
        m = int(rng.choice(ms))
        beta = float(betas[n % len(betas)])
        pop = random_population(rng, m, beta=beta, uniform_weights=True)
        check = lossy_drift_bound_check(pop, d_epsilon)
        holds += bool(check.holds)
        worst = max(worst, check.lhs - check.rhs)
    return SweepResult(instances=instances, holds=holds, worst_violation=worst)


def tightness_sweep(
    ms: tuple[int, ...] = (5, 20, 100),
    total: float = 100.0,
    random_weight_seed: int = 99,
) -> list[tuple[int, float, BoundCheck]]:
    """Contraction-bound equality on single-deviator populations.

    Covers deviations in both directions, with uniform and with random
    weights; the deviation is scaled per instance so every agent keeps
    positive energy. Returns (m, delta, check) triples; tightness means
    lhs and rhs agree to within the bound tolerance on every triple.
    """
    rng = np.random.default_rng(random_weight_seed)
    results = []
    for m in ms:
        for weights in (np.ones(m), rng.uniform(1.0, 10.0, size=m)):
            sum_w = float(np.sum(weights))
            rest = sum_w - float(weights[0])
            cap = 0.4 * total * min(rest, float(weights[0])) / sum_w
            for delta in (cap, -cap):
                pop = single_deviator_population(m, delta, weights=weights, total=total)
                results.append((m, float(delta), contraction_bound_check(pop)))
    return results
