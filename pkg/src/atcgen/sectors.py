"""Seeded synthetic benchmark sectors.

Sectors are built on a lattice (one unit = 20 nmi): a set of parallel
horizontal "row" routes spanning the grid plus vertical or 45-degree
diagonal "crosser" routes. Crosser placement is rejection-sampled until the
number of nodes shared by two or more routes matches the requested
intersection count exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from .core import DEFAULT_SPACING_NMI, DomainError, SectorGraph

DEFAULT_GRID = (12, 12)
MAX_ATTEMPTS = 10_000


class TargetUnreachable(DomainError):
    def __init__(self, seed: int, attempts: int, target: int):
        super().__init__(
            f"could not hit {target} intersections in {attempts} placement "
            f"attempts (seed {seed})")
        self.seed = seed
        self.attempts = attempts
        self.target = target


def _rng(seed) -> np.random.Generator:
    # Philox is counter-based: reproducible regardless of draw batching
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def _row_positions(n_rows: int, height: int) -> List[int]:
    if n_rows == 1:
        return [height // 2]
    return sorted({round(i * (height - 1) / (n_rows - 1)) for i in range(n_rows)})


@dataclass(frozen=True)
class _Crosser:
    kind: str      # "vertical" | "diag_up" | "diag_down"
    column: int
    y0: int
    y1: int

    def cells(self) -> List[Tuple[int, int]]:
        cells = []
        for k, y in enumerate(range(self.y0, self.y1 + 1)):
            if self.kind == "vertical":
                x = self.column
            elif self.kind == "diag_up":
                x = self.column + k
            else:
                x = self.column - k
            cells.append((x, y))
        return cells


def _build_graph(width: int, rows: List[int], row_dirs: List[bool],
                 crossers: List[_Crosser], crosser_dirs: List[bool]
                 ) -> SectorGraph:
    """Materialize lattice routes into a sector graph with shared nodes."""
    cell_usage: Dict[Tuple[int, int], int] = {}
    paths: List[List[Tuple[int, int]]] = []
    for y, flip in zip(rows, row_dirs):
        path = [(x, y) for x in range(width)]
        if flip:
            path.reverse()
        paths.append(path)
    for c, flip in zip(crossers, crosser_dirs):
        path = c.cells()
        if flip:
            path.reverse()
        paths.append(path)
    for path in paths:
        for cell in path:
            cell_usage[cell] = cell_usage.get(cell, 0) + 1

    ordered = sorted(cell_usage)
    node_id = {cell: f"N{i}" for i, cell in enumerate(ordered)}
    nodes = {node_id[cell]: (cell[0] * DEFAULT_SPACING_NMI,
                             cell[1] * DEFAULT_SPACING_NMI)
             for cell in ordered}
    routes = {f"R{i + 1}": [node_id[cell] for cell in path]
              for i, path in enumerate(paths)}
    return SectorGraph(nodes=nodes, routes=routes, spacing=DEFAULT_SPACING_NMI)


def _sample_crossers(rng: np.random.Generator, n_crossers: int,
                     rows: List[int], width: int, height: int
                     ) -> Optional[List[_Crosser]]:
    crossers = []
    for _ in range(n_crossers):
        kind = ("vertical", "diag_up", "diag_down")[int(rng.integers(0, 3))]
        if rng.random() < 0.5:
            # bias toward full-height crossers: they cross every row, which
            # is what high intersection targets need
            y0, y1 = 0, min(height, width) - 1
        else:
            y0 = int(rng.integers(0, height - 1))
            y1 = int(rng.integers(y0 + 1, height))
        span = y1 - y0
        if kind == "vertical":
            column = int(rng.integers(0, width))
        elif kind == "diag_up":
            if span > width - 1:
                return None
            column = int(rng.integers(0, width - span))
        else:
            if span > width - 1:
                return None
            column = int(rng.integers(span, width))
        crossers.append(_Crosser(kind, column, y0, y1))
    if len(set(crossers)) != len(crossers):
        return None
    return crossers


def generate(seed: int, n_routes: int, n_intersections: int,
             grid: Tuple[int, int] = DEFAULT_GRID,
             max_attempts: int = MAX_ATTEMPTS) -> SectorGraph:
    """Deterministic sector with exactly the requested intersection count.

    Raises TargetUnreachable when the bounded placement search fails.
    """
    if n_routes < 2:
        raise ValueError("need at least 2 routes")
    if n_intersections < 0:
        raise ValueError("n_intersections must be >= 0")
    width, height = grid
    if width < 12 or height < n_routes:
        raise ValueError("grid too small: need width >= 12 and height >= n_routes")

    rng = _rng([int(seed), n_routes, n_intersections, width, height])
    if n_intersections == 0:
        splits = [n_routes]  # all parallel rows: zero intersections
    else:
        # initial row/crosser split, widened by the search when the target
        # proves unreachable at that split
        init_rows = max(2, n_routes - math.ceil(n_intersections / 3))
        init_rows = min(init_rows, n_routes - 1)
        splits = [init_rows]
        for delta in range(1, n_routes):
            for cand in (init_rows + delta, init_rows - delta):
                if 2 <= cand <= n_routes - 1 and cand not in splits:
                    splits.append(cand)

    for attempt in range(max_attempts):
        n_rows = splits[(attempt // 200) % len(splits)]
        rows = _row_positions(n_rows, height)
        n_crossers = n_routes - n_rows
        crossers = _sample_crossers(rng, n_crossers, rows, width, height)
        if crossers is None:
            continue
        row_dirs = [bool(rng.integers(0, 2)) for _ in rows]
        crosser_dirs = [bool(rng.integers(0, 2)) for _ in crossers]
        g = _build_graph(width, rows, row_dirs, crossers, crosser_dirs)
        if len(g.intersection_nodes()) != n_intersections:
            continue
        if g.off_node_crossings():
            continue
        g.check()
        return g
    raise TargetUnreachable(seed, max_attempts, n_intersections)


def generate_suite(seed, n_sectors: int, n_routes: int,
                   n_intersections: int,
                   grid: Tuple[int, int] = DEFAULT_GRID) -> List[SectorGraph]:
    """n_sectors independent sectors using per-sector derived (seed, index)
    seeds. seed may be an int or a sequence of ints."""
    entropy = ([int(x) for x in seed] if isinstance(seed, (list, tuple))
               else [int(seed)])
    suite = []
    for index in range(n_sectors):
        child_seed = int(np.random.SeedSequence(entropy + [index])
                         .generate_state(1)[0])
        suite.append(generate(child_seed, n_routes, n_intersections, grid))
    return suite
