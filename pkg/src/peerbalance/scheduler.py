"""Pair scheduling: who interacts with whom, and in what order.

The probabilistic schedule draws an unordered pair uniformly at random
among the m * (m - 1) / 2 possibilities by drawing one integer below the
pair count (rejection sampled, so exactly uniform) and unranking it.
The scripted schedule replays a fixed pair sequence, which is how
hand-constructed interaction histories are fed to the engine.
"""

from __future__ import annotations

import math

from .errors import InvalidPairError, ScheduleExhaustedError
from .rng import SplitMix64


def pair_count(m: int) -> int:
    """Number of unordered agent pairs in a population of m agents."""
    return m * (m - 1) // 2


def unrank_pair(t: int) -> tuple[int, int]:
    """Map a rank in [0, pair_count(m)) to the pair (i, j), i < j.

    Pairs are ordered (0,1), (0,2), (1,2), (0,3), ... so the rank of
    (i, j) is j * (j - 1) / 2 + i. The float estimate of j is corrected
    with integer arithmetic, which keeps the mapping exact for every
    rank the scheduler can produce. The compiled kernel mirrors this
    computation.
    """
    j = int((1.0 + math.sqrt(8.0 * t + 1.0)) * 0.5)
    while j * (j - 1) // 2 > t:
        j -= 1
    while (j + 1) * j // 2 <= t:
        j += 1
    i = t - j * (j - 1) // 2
    return i, j


def sample_pair(m: int, rng: SplitMix64) -> tuple[int, int]:
    """Draw an unordered pair of distinct agents uniformly at random."""
    if m < 2:
        raise ValueError(f"need at least 2 agents to form a pair, got m={m}")
    return unrank_pair(rng.randbelow(pair_count(m)))


class ProbabilisticSchedule:
    """Endless stream of uniformly random pairs from a seeded generator."""

    def __init__(self, m: int, seed: int):
        if m < 2:
            raise ValueError(f"need at least 2 agents to form a pair, got m={m}")
        self.m = m
        self._rng = SplitMix64(seed)

    def next(self) -> tuple[int, int]:
        return sample_pair(self.m, self._rng)


class ScriptedSchedule:
    """Replay a fixed sequence of pairs.

    Pairs are normalized to (min, max) order. Identical indices are
    rejected immediately; out-of-range indices are rejected here when
    ``m`` is given, otherwise by the engine against its population.
    Asking for more pairs than the script holds raises
    ScheduleExhaustedError.
    """

    def __init__(self, pairs, m: int | None = None):
        normalized = []
        for raw in pairs:
            i, j = int(raw[0]), int(raw[1])
            if i == j:
                raise InvalidPairError(f"pair ({i}, {j}) repeats one agent")
            if i < 0 or j < 0:
                raise ValueError(f"agent indices must be >= 0, got ({i}, {j})")
            if i > j:
                i, j = j, i
            if m is not None and j >= m:
                raise ValueError(f"agent index {j} out of range for m={m}")
            normalized.append((i, j))
        self.m = m
        self._pairs = normalized
        self._cursor = 0

    def __len__(self) -> int:
        return len(self._pairs)

    def next(self) -> tuple[int, int]:
        if self._cursor >= len(self._pairs):
            raise ScheduleExhaustedError(
                f"scripted schedule exhausted after {len(self._pairs)} pairs"
            )
        pair = self._pairs[self._cursor]
        self._cursor += 1
        return pair
