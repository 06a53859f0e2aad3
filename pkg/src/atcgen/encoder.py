"""Continuous route polylines -> discrete sector graph.

The pipeline: cluster nearby fixes into single nodes, simplify away
unimportant kinks, planarize by pinning every geometric route crossing as a
shared node, then interpolate nodes along each leg at roughly the relevancy
spacing. Merging crossing points into shared nodes is what makes the two
discrete interaction events complete for the 20 nmi threshold.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from . import geometry
from .core import DEFAULT_SPACING_NMI, DomainError, InvalidSector, SectorGraph
from .geometry import Point

MERGE_EPS = 1e-6
COLLINEAR_PERP_TOL_NMI = 1.0


class DegenerateRoute(DomainError):
    def __init__(self, route_id: str, length: float):
        super().__init__(f"route {route_id} shorter than node spacing "
                         f"({length:.1f} nmi) after simplification")
        self.route_id = route_id
        self.length = length


class NonPlanarizable(DomainError):
    def __init__(self, route_a: str, route_b: str, detail: str = ""):
        super().__init__(f"routes {route_a} and {route_b} overlap without being "
                         f"identical segments{': ' + detail if detail else ''}")
        self.route_a = route_a
        self.route_b = route_b


@dataclass
class EncoderConfig:
    spacing: float = DEFAULT_SPACING_NMI
    cluster_radius: float = DEFAULT_SPACING_NMI
    kink_tolerance: float = 15.0  # degrees

    def __post_init__(self):
        if self.spacing <= 0 or self.cluster_radius <= 0:
            raise ValueError("spacing and cluster_radius must be positive")


@dataclass
class ContinuousSector:
    """Named fixes in planar nmi coordinates plus routes as fix sequences."""

    fixes: Dict[str, Point]
    routes: Dict[str, List[str]]

    def check(self) -> None:
        for rid, seq in self.routes.items():
            if len(seq) < 2:
                raise InvalidSector(f"route {rid}: fewer than 2 fixes")
            for f in seq:
                if f not in self.fixes:
                    raise InvalidSector(f"route {rid}: unknown fix {f}")

    @classmethod
    def from_json_obj(cls, obj: dict) -> "ContinuousSector":
        try:
            sector = cls(fixes={name: (float(p[0]), float(p[1]))
                                for name, p in obj["fixes"].items()},
                         routes={rid: [str(f) for f in seq]
                                 for rid, seq in obj["routes"].items()})
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise InvalidSector(f"malformed continuous sector JSON: {exc}") from exc
        sector.check()
        return sector

    @classmethod
    def from_json(cls, text: str) -> "ContinuousSector":
        return cls.from_json_obj(json.loads(text))


def cluster_fixes(sector: ContinuousSector, cfg: EncoderConfig
                  ) -> Tuple[Dict[str, int], Dict[int, Point]]:
    """Single-linkage grouping of fixes closer than cluster_radius.

    Returns (fix -> cluster id, cluster id -> centroid). Cluster ids are
    dense integers assigned in order of each cluster's first fix name, so the
    result is independent of dict ordering.
    """
    names = sorted(sector.fixes)
    parent = {n: n for n in names}

    def find(x: str) -> str:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, a in enumerate(names):
        for b in names[i + 1:]:
            if geometry.dist(sector.fixes[a], sector.fixes[b]) < cfg.cluster_radius:
                ra, rb = find(a), find(b)
                if ra != rb:
                    parent[max(ra, rb)] = min(ra, rb)

    members: Dict[str, List[str]] = {}
    for n in names:
        members.setdefault(find(n), []).append(n)
    assignment: Dict[str, int] = {}
    centroids: Dict[int, Point] = {}
    for cid, root in enumerate(sorted(members)):
        centroids[cid] = geometry.centroid(
            [sector.fixes[m] for m in members[root]])
        for m in members[root]:
            assignment[m] = cid
    return assignment, centroids


def simplify_route(points: Sequence[Point], cfg: EncoderConfig,
                   protected: Sequence[Point] = ()) -> List[Point]:
    """Drop interior points with turn angle below kink_tolerance.

    Endpoints and protected points (cluster nodes shared with other routes)
    are always kept. Removal stops before the polyline length drifts more
    than 5% from the input.
    """
    pts = list(points)
    if len(pts) < 3:
        return pts
    original_length = geometry.polyline_length(pts)
    keep_limit = 0.05 * original_length

    def is_protected(p: Point) -> bool:
        return any(geometry.dist(p, q) < MERGE_EPS for q in protected)

    changed = True
    while changed and len(pts) > 2:
        changed = False
        best_i, best_angle = None, cfg.kink_tolerance
        for i in range(1, len(pts) - 1):
            if is_protected(pts[i]):
                continue
            ang = geometry.turn_angle_deg(pts[i - 1], pts[i], pts[i + 1])
            if ang < best_angle:
                best_i, best_angle = i, ang
        if best_i is not None:
            candidate = pts[:best_i] + pts[best_i + 1:]
            if abs(geometry.polyline_length(candidate) - original_length) <= keep_limit:
                pts = candidate
                changed = True
    return pts


@dataclass
class _RouteBuild:
    route_id: str
    vertices: List[Point]                       # simplified polyline
    pins: List[List[Tuple[float, Point]]] = field(default_factory=list)
    # pins[leg] = [(param along leg in [0,1], point), ...]


def _pin(build: _RouteBuild, point: Point) -> None:
    """Attach a mandatory node at the closest position on the polyline."""
    best = None
    for leg in range(len(build.vertices) - 1):
        a, b = build.vertices[leg], build.vertices[leg + 1]
        d = geometry.point_segment_distance(point, a, b)
        if best is None or d < best[0]:
            ab2 = (b[0] - a[0]) ** 2 + (b[1] - a[1]) ** 2
            t = 0.0 if ab2 < geometry.EPS else max(0.0, min(1.0, (
                (point[0] - a[0]) * (b[0] - a[0]) +
                (point[1] - a[1]) * (b[1] - a[1])) / ab2))
            best = (d, leg, t)
    _, leg, t = best
    a, b = build.vertices[leg], build.vertices[leg + 1]
    snapped = geometry.lerp(a, b, t)
    if geometry.dist(snapped, a) < MERGE_EPS or geometry.dist(snapped, b) < MERGE_EPS:
        return  # already a vertex
    for t0, p0 in build.pins[leg]:
        if geometry.dist(p0, snapped) < MERGE_EPS:
            return
    build.pins[leg].append((t, snapped))


def _planarize(builds: List[_RouteBuild]) -> None:
    """Pin every pairwise leg crossing (and collinear overlap extent) as
    mandatory points on both routes."""
    for b in builds:
        b.pins = [[] for _ in range(len(b.vertices) - 1)]
    for i in range(len(builds)):
        for j in range(i + 1, len(builds)):
            ra, rb = builds[i], builds[j]
            for la in range(len(ra.vertices) - 1):
                a1, a2 = ra.vertices[la], ra.vertices[la + 1]
                for lb in range(len(rb.vertices) - 1):
                    b1, b2 = rb.vertices[lb], rb.vertices[lb + 1]
                    cross = geometry.segment_intersection(a1, a2, b1, b2)
                    if cross is not None:
                        _pin(ra, cross)
                        _pin(rb, cross)
                        continue
                    overlap = geometry.collinear_overlap(
                        a1, a2, b1, b2, COLLINEAR_PERP_TOL_NMI)
                    if overlap is not None:
                        ang = geometry.angle_between_deg(
                            (a2[0] - a1[0], a2[1] - a1[1]),
                            (b2[0] - b1[0], b2[1] - b1[1]))
                        if min(ang, 180 - ang) > 1e-4:
                            raise NonPlanarizable(
                                ra.route_id, rb.route_id,
                                "near-parallel skewed overlap")
                        for p in overlap:
                            _pin(ra, p)
                            _pin(rb, p)


def _mandatory_chain(build: _RouteBuild) -> List[Tuple[Point, bool]]:
    """Ordered (point, is_mandatory) list: vertices plus pinned crossings."""
    out: List[Tuple[Point, bool]] = []
    for leg in range(len(build.vertices) - 1):
        out.append((build.vertices[leg], True))
        for t, p in sorted(build.pins[leg], key=lambda tp: tp[0]):
            out.append((p, True))
    out.append((build.vertices[-1], True))
    # drop numerically-coincident consecutive points
    dedup: List[Tuple[Point, bool]] = []
    for p, m in out:
        if dedup and geometry.dist(dedup[-1][0], p) < MERGE_EPS:
            continue
        dedup.append((p, m))
    return dedup


class _NodeRegistry:
    """Assigns one node per distinct position; merges interpolated nodes from
    different routes that fall within the merge radius."""

    def __init__(self, merge_radius: float):
        self.merge_radius = merge_radius
        self.points: List[Point] = []            # representative positions
        self.is_interp: List[bool] = []
        self.route_of: List[Optional[str]] = []  # route that created it (interp only)
        self.members: List[List[Point]] = []

    def add(self, p: Point, interpolated: bool, route_id: str) -> int:
        for idx, q in enumerate(self.points):
            if geometry.dist(p, q) < MERGE_EPS:
                return idx
        if interpolated:
            for idx, q in enumerate(self.points):
                if (self.is_interp[idx] and self.route_of[idx] != route_id
                        and geometry.dist(p, q) < self.merge_radius):
                    self.members[idx].append(p)
                    self.points[idx] = geometry.centroid(self.members[idx])
                    return idx
        self.points.append(p)
        self.is_interp.append(interpolated)
        self.route_of.append(route_id if interpolated else None)
        self.members.append([p])
        return len(self.points) - 1


def encode_sector(sector: ContinuousSector, cfg: Optional[EncoderConfig] = None
                  ) -> SectorGraph:
    """Full encoding pipeline; see module docstring.

    Raises DegenerateRoute for routes shorter than the node spacing after
    simplification and NonPlanarizable for skewed near-coincident overlaps.
    """
    cfg = cfg or EncoderConfig()
    sector.check()
    assignment, centroids = cluster_fixes(sector, cfg)

    # routes through cluster centroids, consecutive duplicates collapsed
    route_clusters: Dict[str, List[int]] = {}
    for rid in sector.routes:
        seq: List[int] = []
        for fix in sector.routes[rid]:
            cid = assignment[fix]
            if not seq or seq[-1] != cid:
                seq.append(cid)
        route_clusters[rid] = seq

    cluster_usage: Dict[int, int] = {}
    for seq in route_clusters.values():
        for cid in set(seq):
            cluster_usage[cid] = cluster_usage.get(cid, 0) + 1
    shared_points = [centroids[cid] for cid, n in cluster_usage.items() if n >= 2]

    builds: List[_RouteBuild] = []
    for rid in sector.routes:
        pts = [centroids[cid] for cid in route_clusters[rid]]
        if len(pts) < 2:
            raise DegenerateRoute(rid, 0.0)
        pts = simplify_route(pts, cfg, protected=shared_points)
        length = geometry.polyline_length(pts)
        if length < cfg.spacing:
            raise DegenerateRoute(rid, length)
        builds.append(_RouteBuild(route_id=rid, vertices=pts))

    _planarize(builds)

    registry = _NodeRegistry(merge_radius=cfg.cluster_radius / 2)
    route_node_indices: Dict[str, List[int]] = {}
    for build in builds:
        chain = _mandatory_chain(build)
        indices: List[int] = []
        for k in range(len(chain) - 1):
            p, _ = chain[k]
            q, _ = chain[k + 1]
            indices.append(registry.add(p, False, build.route_id))
            leg_len = geometry.dist(p, q)
            n_edges = max(1, round(leg_len / cfg.spacing))
            for step in range(1, n_edges):
                interp = geometry.lerp(p, q, step / n_edges)
                indices.append(registry.add(interp, True, build.route_id))
        indices.append(registry.add(chain[-1][0], False, build.route_id))
        deduped = [indices[0]]
        for idx in indices[1:]:
            if idx != deduped[-1]:
                deduped.append(idx)
        route_node_indices[build.route_id] = deduped

    # dense ids ordered by (x, y, creation order) for determinism
    order = sorted(range(len(registry.points)),
                   key=lambda i: (round(registry.points[i][0], 6),
                                  round(registry.points[i][1], 6), i))
    node_id = {reg_idx: f"N{rank}" for rank, reg_idx in enumerate(order)}

    graph = SectorGraph(
        nodes={node_id[i]: registry.points[i] for i in order},
        routes={rid: [node_id[i] for i in route_node_indices[rid]]
                for rid in sector.routes},
        spacing=cfg.spacing)
    graph.check()
    return graph


def count_intersections(g: SectorGraph) -> int:
    """Number of graph nodes occupied by more than one route."""
    return len(g.intersection_nodes())


def graph_to_continuous(g: SectorGraph) -> ContinuousSector:
    """Re-express a graph as fixes + fix routes (used for idempotence checks)."""
    return ContinuousSector(
        fixes={n: p for n, p in g.nodes.items()},
        routes={rid: list(seq) for rid, seq in g.routes.items()})
