"""Benchmark metrics: MUIP, MADIP, normalized skill scores, Pareto frontier,
and the CSV table writers consumed by the plotting scripts."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from .core import DomainError


class EmptyInput(DomainError):
    pass


class ZeroBaseline(DomainError):
    pass


def muip(pair_counts: Sequence[int]) -> float:
    """Mean number of unique interacting pairs over a scenario set."""
    if not pair_counts:
        raise EmptyInput("muip needs at least one scenario count")
    return sum(pair_counts) / len(pair_counts)


def madip(pair_counts: Sequence[int], target: int) -> float:
    """Mean absolute deviation of pair counts from the requested count."""
    if not pair_counts:
        raise EmptyInput("madip needs at least one scenario count")
    return sum(abs(c - target) for c in pair_counts) / len(pair_counts)


def normalized_skill(value: float, rand_value: float) -> float:
    """max(0, 1 - value / rand_value): 1 is perfect, 0 is at-or-below random."""
    if rand_value <= 0:
        raise ZeroBaseline("random baseline must be positive")
    return max(0.0, 1.0 - value / rand_value)


def mean_skill(cells: Sequence[Tuple[float, float]]) -> float:
    """Unweighted mean of per-cell skills over a benchmark's parameter grid.

    cells = (metric value, random baseline value) pairs; cells with a zero
    baseline are skipped (degenerate parameter points such as N=1).
    """
    skills = [normalized_skill(v, r) for v, r in cells if r > 0]
    if not skills:
        raise EmptyInput("no cells with a positive random baseline")
    return sum(skills) / len(skills)


@dataclass(frozen=True)
class SkillScores:
    model: str
    mu1: float  # traffic volume
    mu2: float  # scenario length
    mu3: float  # sector complexity
    mu4: float  # controllability
    cost_usd_per_mtok: Optional[float] = None

    @property
    def skill_sum(self) -> float:
        return self.mu1 + self.mu2 + self.mu3 + self.mu4


def pareto_frontier(points: Sequence[Tuple[float, float]]
                    ) -> List[Tuple[float, float]]:
    """Non-dominated subset of (cost, skill) points.

    A point is dominated when another is at most as expensive and at least as
    skilful, with one of the two strict.
    """
    kept = []
    for p in points:
        dominated = False
        for q in points:
            if q == p:
                continue
            if q[0] <= p[0] and q[1] >= p[1] and (q[0] < p[0] or q[1] > p[1]):
                dominated = True
                break
        if dominated:
            continue
        if p not in kept:
            kept.append(p)
    return kept


# -- CSV contracts -----------------------------------------------------------

def write_benchmark_table(path, param_points: Sequence, random_row: Sequence[float],
                          model_rows: Dict[str, Sequence[Optional[float]]],
                          metric_name: str = "MUIP") -> None:
    """rows = models (random first), columns = swept parameter points."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["model"] + [str(p) for p in param_points])
        w.writerow(["random"] + [f"{v:.4f}" for v in random_row])
        for model in sorted(model_rows):
            w.writerow([model] + ["" if v is None else f"{v:.4f}"
                                  for v in model_rows[model]])


def write_skills_csv(path, scores: Sequence[SkillScores]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["model", "mu1", "mu2", "mu3", "mu4", "skill_sum", "cost"])
        for s in sorted(scores, key=lambda s: s.model):
            w.writerow([s.model, f"{s.mu1:.4f}", f"{s.mu2:.4f}",
                        f"{s.mu3:.4f}", f"{s.mu4:.4f}", f"{s.skill_sum:.4f}",
                        "" if s.cost_usd_per_mtok is None
                        else f"{s.cost_usd_per_mtok:.4f}"])


def write_pareto_csv(path, scores: Sequence[SkillScores]) -> None:
    priced = [s for s in scores if s.cost_usd_per_mtok is not None]
    frontier = pareto_frontier([(s.cost_usd_per_mtok, s.skill_sum)
                                for s in priced])
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["model", "cost", "skill_sum", "on_frontier"])
        for s in sorted(priced, key=lambda s: s.cost_usd_per_mtok):
            on = (s.cost_usd_per_mtok, s.skill_sum) in frontier
            w.writerow([s.model, f"{s.cost_usd_per_mtok:.4f}",
                        f"{s.skill_sum:.4f}", "1" if on else "0"])
