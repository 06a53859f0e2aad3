"""Deterministic rollout of scenarios on a sector graph.

This is the automatic verifier behind every benchmark: it materializes
aircraft positions per time-step, detects same-node and node-swap events
between aircraft with overlapping flight-level ranges, classifies each event
as cross-path, head-on or catch-up, and validates scenarios against the
placement rules (including the post-spawn grace window).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Set, Tuple

from . import geometry
from .core import (CLASS_CATCH_UP, CLASS_CROSS_PATH, CLASS_HEAD_ON,
                   MECHANISM_SAME_NODE, MECHANISM_SWAP, Aircraft,
                   BenchmarkParams, DomainError, FL_MAX, FL_MIN,
                   InteractionEvent, Scenario, SectorGraph, fl_overlap)


class UnknownRoute(DomainError):
    def __init__(self, aircraft_id: str, route_id: str):
        super().__init__(f"aircraft {aircraft_id} references unknown route {route_id}")
        self.aircraft_id = aircraft_id
        self.route_id = route_id


class MissingGeometry(DomainError):
    pass


# Heading-angle partition for same-node classification: at most 45 degrees
# apart counts as along-track, at least 135 as opposing, the rest crossing.
DEFAULT_CATCH_UP_MAX_DEG = 45.0
DEFAULT_HEAD_ON_MIN_DEG = 135.0

# Interaction-free steps required after spawn; one 20 nmi step approximates
# the 2-3 minute hand-off window.
DEFAULT_GRACE_STEPS = 1


def position_at(a: Aircraft, t: int) -> Optional[int]:
    """Index into the aircraft's route at time t, or None if off-sector.

    Fast movers advance one node per step; slow movers hold on odd offsets
    from their spawn time, so index = floor((t - spawn) / speed).
    """
    if t < a.spawn_time:
        return None
    return (t - a.spawn_time) // a.speed


def node_at(a: Aircraft, t: int, g: SectorGraph) -> Optional[str]:
    idx = position_at(a, t)
    if idx is None:
        return None
    seq = g.routes[a.route]
    if idx >= len(seq):
        return None
    return seq[idx]


@dataclass
class OccupancyTable:
    """Per-step node occupancy: steps[t][node] = set of aircraft ids."""

    duration: int
    steps: List[Dict[str, Set[str]]] = field(default_factory=list)


def simulate(s: Scenario, g: SectorGraph) -> OccupancyTable:
    for a in s.aircraft:
        if a.route not in g.routes:
            raise UnknownRoute(a.id, a.route)
    table = OccupancyTable(duration=s.duration,
                           steps=[{} for _ in range(s.duration)])
    for a in s.aircraft:
        for t in range(s.duration):
            node = node_at(a, t, g)
            if node is not None:
                table.steps[t].setdefault(node, set()).add(a.id)
    return table


def _trajectory(a: Aircraft, g: SectorGraph, duration: int) -> List[Optional[str]]:
    return [node_at(a, t, g) for t in range(duration)]


def detect_interactions(s: Scenario, g: SectorGraph,
                        catch_up_max_deg: float = DEFAULT_CATCH_UP_MAX_DEG,
                        head_on_min_deg: float = DEFAULT_HEAD_ON_MIN_DEG
                        ) -> List[InteractionEvent]:
    """All interaction events over t in [0, T-1], classified, sorted by (t, pair).

    An event is either two aircraft on the same node at the same step, or two
    aircraft exchanging nodes across one step (both having moved). Only pairs
    with overlapping flight-level ranges are considered relevant.
    """
    for a in s.aircraft:
        if a.route not in g.routes:
            raise UnknownRoute(a.id, a.route)
    trajs = {a.id: _trajectory(a, g, s.duration) for a in s.aircraft}
    events: List[InteractionEvent] = []
    aircraft = s.aircraft
    for i in range(len(aircraft)):
        for j in range(i + 1, len(aircraft)):
            a, b = aircraft[i], aircraft[j]
            if not fl_overlap(a, b):
                continue
            ta, tb = trajs[a.id], trajs[b.id]
            for t in range(s.duration):
                na, nb = ta[t], tb[t]
                if na is not None and na == nb:
                    events.append(_classified_event(
                        t, a, b, (na,), MECHANISM_SAME_NODE, g,
                        catch_up_max_deg, head_on_min_deg))
                elif (t >= 1 and na is not None and nb is not None
                      and ta[t - 1] is not None and tb[t - 1] is not None
                      and na == tb[t - 1] and nb == ta[t - 1]
                      and na != ta[t - 1]):
                    events.append(_classified_event(
                        t, a, b, (na, nb), MECHANISM_SWAP, g,
                        catch_up_max_deg, head_on_min_deg))
    events.sort(key=lambda e: (e.time, e.pair, e.mechanism))
    return events


def unique_pairs(events: List[InteractionEvent]) -> Set[Tuple[str, str]]:
    return {e.pair for e in events}


def _heading(a: Aircraft, t: int, g: SectorGraph) -> Optional[Tuple[float, float]]:
    """Unit travel direction at time t: from the previous distinct node to the
    current one, or toward the next route node if the aircraft has not moved."""
    idx = position_at(a, t)
    seq = g.routes[a.route]
    if idx is None or idx >= len(seq):
        return None
    if idx > 0:
        p0 = g.nodes[seq[idx - 1]]
        p1 = g.nodes[seq[idx]]
    elif len(seq) > 1:
        p0 = g.nodes[seq[0]]
        p1 = g.nodes[seq[1]]
    else:
        return None
    d = (p1[0] - p0[0], p1[1] - p0[1])
    n = math.hypot(*d)
    if n < geometry.EPS:
        return None
    return (d[0] / n, d[1] / n)


def _shares_local_path(a: Aircraft, b: Aircraft, node: str, g: SectorGraph) -> bool:
    """Whether both routes run the same track through the shared node."""
    sa, sb = g.routes[a.route], g.routes[b.route]
    try:
        ia, ib = sa.index(node), sb.index(node)
    except ValueError:
        return False
    if ia > 0 and ib > 0 and sa[ia - 1] == sb[ib - 1]:
        return True
    if ia + 1 < len(sa) and ib + 1 < len(sb) and sa[ia + 1] == sb[ib + 1]:
        return True
    return False


def classify(time: int, a: Aircraft, b: Aircraft, nodes: Tuple[str, ...],
             mechanism: str, g: SectorGraph,
             catch_up_max_deg: float = DEFAULT_CATCH_UP_MAX_DEG,
             head_on_min_deg: float = DEFAULT_HEAD_ON_MIN_DEG) -> str:
    """Interaction class for one detected event.

    Swaps are head-on by construction. Same-node events compare headings:
    opposing headings are head-on; aligned headings on a common local track
    are catch-up; everything else is cross-path.
    """
    if mechanism == MECHANISM_SWAP:
        return CLASS_HEAD_ON
    for n in nodes:
        if n not in g.nodes:
            raise MissingGeometry(f"node {n} has no position")
    ha = _heading(a, time, g)
    hb = _heading(b, time, g)
    if ha is None or hb is None:
        return CLASS_CROSS_PATH
    theta = geometry.angle_between_deg(ha, hb)
    if theta >= head_on_min_deg:
        return CLASS_HEAD_ON
    if theta <= catch_up_max_deg and _shares_local_path(a, b, nodes[0], g):
        return CLASS_CATCH_UP
    return CLASS_CROSS_PATH


def _classified_event(t: int, a: Aircraft, b: Aircraft, nodes: Tuple[str, ...],
                      mechanism: str, g: SectorGraph,
                      catch_up_max_deg: float, head_on_min_deg: float
                      ) -> InteractionEvent:
    cls = classify(t, a, b, nodes, mechanism, g, catch_up_max_deg, head_on_min_deg)
    return InteractionEvent(time=t, pair=(a.id, b.id), nodes=nodes,
                            mechanism=mechanism, interaction_class=cls)


@dataclass
class Violation:
    aircraft_id: str
    rule: str
    detail: str

    def to_json_obj(self) -> dict:
        return {"aircraft": self.aircraft_id, "rule": self.rule,
                "detail": self.detail}


@dataclass
class ValidationReport:
    schema_ok: bool = True
    violations: List[Violation] = field(default_factory=list)
    spawn_grace_violations: List[InteractionEvent] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return (self.schema_ok and not self.violations
                and not self.spawn_grace_violations)

    def to_json_obj(self) -> dict:
        return {"schema_ok": self.schema_ok,
                "violations": [v.to_json_obj() for v in self.violations],
                "spawn_grace_violations": [
                    e.to_json_obj() for e in self.spawn_grace_violations],
                "ok": self.ok}


def validate_scenario(s: Scenario, g: SectorGraph,
                      params: Optional[BenchmarkParams] = None,
                      grace: int = DEFAULT_GRACE_STEPS) -> ValidationReport:
    """Placement-rule validation; findings are reported, never raised."""
    report = ValidationReport()
    seen_ids = set()
    for a in s.aircraft:
        if a.id in seen_ids:
            report.violations.append(Violation(a.id, "duplicate_id", "id reused"))
        seen_ids.add(a.id)
        if a.route not in g.routes:
            report.violations.append(Violation(
                a.id, "unknown_route", f"route {a.route} not in sector"))
        if not 0 <= a.spawn_time <= s.duration - 1:
            report.violations.append(Violation(
                a.id, "spawn_out_of_range",
                f"spawn_time {a.spawn_time} outside [0, {s.duration - 1}]"))
        if a.speed not in (1, 2):
            report.violations.append(Violation(
                a.id, "bad_speed", f"speed {a.speed} not in {{1, 2}}"))
        for name, fl in (("initial_fl", a.initial_fl), ("exit_fl", a.exit_fl)):
            if not FL_MIN <= fl <= FL_MAX:
                report.violations.append(Violation(
                    a.id, "fl_out_of_range", f"{name}={fl} outside [0, 660]"))
    if params is not None and len(s.aircraft) != params.N:
        report.violations.append(Violation(
            "*", "aircraft_count",
            f"expected {params.N} aircraft, got {len(s.aircraft)}"))
    if not any(v.rule == "unknown_route" for v in report.violations):
        spawn = {a.id: a.spawn_time for a in s.aircraft}
        for e in detect_interactions(s, g):
            for ac_id in e.pair:
                if spawn[ac_id] <= e.time <= spawn[ac_id] + grace:
                    report.spawn_grace_violations.append(e)
                    break
    return report
