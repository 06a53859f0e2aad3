"""Uniform-random scenario sampling and Monte-Carlo baseline estimates.

The random baseline draws spawn times, routes and speeds uniformly from
their valid sets and averages the unique interacting pair count (or its
absolute deviation from a target) over many scenarios. Per-sample generators
are derived from (seed, sample index) so runs parallelize and reproduce
exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from .core import DEFAULT_FL, Aircraft, Scenario, SectorGraph
from .rollout import detect_interactions, unique_pairs


def sample_rng(seed: int, index: Optional[int] = None) -> np.random.Generator:
    entropy = [int(seed)] if index is None else [int(seed), int(index)]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def sample_random_scenario(g: SectorGraph, N: int, T: int,
                           rng: np.random.Generator) -> Scenario:
    """N aircraft with uniform spawn/route/speed, all at FL 300 (2D mode)."""
    if not g.routes:
        raise ValueError("sector has no routes")
    if T < 1:
        raise ValueError("T must be >= 1")
    route_ids = sorted(g.routes)
    aircraft = []
    for i in range(N):
        aircraft.append(Aircraft(
            id=f"AC{i + 1}",
            spawn_time=int(rng.integers(0, T)),
            route=route_ids[int(rng.integers(0, len(route_ids)))],
            speed=int(rng.integers(1, 3)),
            initial_fl=DEFAULT_FL, exit_fl=DEFAULT_FL))
    return Scenario(duration=T, aircraft=aircraft)


@dataclass(frozen=True)
class BaselineEstimate:
    mean: float
    stderr: float
    samples: int
    per_scenario: tuple  # raw per-scenario statistic, for bootstrapping

    def to_json_obj(self) -> dict:
        return {"mean": self.mean, "stderr": self.stderr, "samples": self.samples}


def _estimate(sectors: Sequence[SectorGraph], N: int, T: int, samples: int,
              seed: int, statistic) -> BaselineEstimate:
    if not sectors:
        raise ValueError("need at least one sector")
    values = np.empty(samples)
    for i in range(samples):
        g = sectors[i % len(sectors)]  # round-robin across the suite
        scenario = sample_random_scenario(g, N, T, sample_rng(seed, i))
        values[i] = statistic(len(unique_pairs(detect_interactions(scenario, g))))
    stderr = float(values.std(ddof=1) / np.sqrt(samples)) if samples > 1 else 0.0
    return BaselineEstimate(mean=float(values.mean()), stderr=stderr,
                            samples=samples, per_scenario=tuple(values.tolist()))


def estimate_muip_rand(sectors: Sequence[SectorGraph], N: int, T: int,
                       samples: int = 500, seed: int = 0) -> BaselineEstimate:
    """Mean unique interacting pair count of uniformly random scenarios."""
    return _estimate(sectors, N, T, samples, seed, lambda pairs: pairs)


def estimate_madip_rand(sectors: Sequence[SectorGraph], N: int, T: int,
                        target_k: int, samples: int = 500,
                        seed: int = 0) -> BaselineEstimate:
    """Mean absolute deviation of the random pair count from target_k."""
    return _estimate(sectors, N, T, samples, seed,
                     lambda pairs: abs(pairs - target_k))
