"""Domain types shared across the toolkit.

A sector is a planar directed-route graph whose nodes sit roughly one
relevancy length-scale (20 nmi) apart. Scenarios place aircraft on routes
with integer spawn times and a binary speed class. All types here are plain
values: construct once, share freely.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from . import geometry

# Flight levels are hundreds of feet; [0, 660] covers en-route airspace.
FL_MIN = 0
FL_MAX = 660
DEFAULT_FL = 300

# Flight-level ranges are compared as closed intervals: a pair whose ranges
# touch at a boundary counts as overlapping (safety-conservative choice).
FL_RANGE_CLOSED = True

SPEED_FAST = 1  # one node per time-step
SPEED_SLOW = 2  # one node per two time-steps

DEFAULT_SPACING_NMI = 20.0


class DomainError(Exception):
    """Base class for toolkit domain errors."""


class InvalidSector(DomainError):
    pass


class InvalidScenario(DomainError):
    pass


@dataclass(frozen=True)
class FlightLevelRange:
    lo: int
    hi: int


@dataclass(frozen=True)
class Aircraft:
    id: str
    spawn_time: int
    route: str
    speed: int
    initial_fl: int = DEFAULT_FL
    exit_fl: int = DEFAULT_FL

    def __post_init__(self):
        object.__setattr__(self, "id", self.id.upper())

    def check(self) -> None:
        if self.spawn_time < 0:
            raise InvalidScenario(f"aircraft {self.id}: spawn_time < 0")
        if self.speed not in (SPEED_FAST, SPEED_SLOW):
            raise InvalidScenario(f"aircraft {self.id}: speed must be 1 or 2")
        for name, fl in (("initial_fl", self.initial_fl), ("exit_fl", self.exit_fl)):
            if not FL_MIN <= fl <= FL_MAX:
                raise InvalidScenario(f"aircraft {self.id}: {name} out of [0, 660]")


def fl_range(a: Aircraft) -> FlightLevelRange:
    """Flight-level interval swept between entry and exit levels."""
    return FlightLevelRange(min(a.initial_fl, a.exit_fl), max(a.initial_fl, a.exit_fl))


def fl_overlap(a: Aircraft, b: Aircraft) -> bool:
    """Whether two aircraft's flight-level ranges overlap (closed intervals)."""
    ra, rb = fl_range(a), fl_range(b)
    if FL_RANGE_CLOSED:
        return max(ra.lo, rb.lo) <= min(ra.hi, rb.hi)
    return max(ra.lo, rb.lo) < min(ra.hi, rb.hi)


@dataclass
class SectorGraph:
    """Discrete airspace: positioned nodes and directed routes over them."""

    nodes: Dict[str, Tuple[float, float]]
    routes: Dict[str, List[str]]
    spacing: float = DEFAULT_SPACING_NMI

    def check(self, edge_lengths: bool = False, planarity: bool = False) -> None:
        """Raise InvalidSector on a malformed graph.

        edge_lengths and planarity are opt-in: they hold for encoder- and
        generator-produced graphs but not for arbitrary hand-built ones.
        """
        for rid, seq in self.routes.items():
            if len(seq) < 2:
                raise InvalidSector(f"route {rid}: fewer than 2 nodes")
            for n in seq:
                if n not in self.nodes:
                    raise InvalidSector(f"route {rid}: unknown node {n}")
            for a, b in zip(seq, seq[1:]):
                if a == b:
                    raise InvalidSector(f"route {rid}: repeated consecutive node {a}")
        if edge_lengths:
            lo, hi = self.spacing / 2, 3 * self.spacing / 2
            for rid, seq in self.routes.items():
                for a, b in zip(seq, seq[1:]):
                    d = geometry.dist(self.nodes[a], self.nodes[b])
                    if not (lo - 1e-6 <= d <= hi + 1e-6):
                        raise InvalidSector(
                            f"route {rid}: edge {a}-{b} length {d:.2f} outside "
                            f"[{lo}, {hi}]")
        if planarity and self.off_node_crossings():
            a, b = self.off_node_crossings()[0]
            raise InvalidSector(f"edges cross off-node: {a} x {b}")

    def edges(self) -> List[Tuple[str, str]]:
        out = []
        seen = set()
        for seq in self.routes.values():
            for a, b in zip(seq, seq[1:]):
                key = (a, b) if a <= b else (b, a)
                if key not in seen:
                    seen.add(key)
                    out.append(key)
        return out

    def off_node_crossings(self) -> List[Tuple[Tuple[str, str], Tuple[str, str]]]:
        """O(E^2) scan for edge pairs crossing anywhere but a shared node."""
        edges = self.edges()
        bad = []
        for i in range(len(edges)):
            for j in range(i + 1, len(edges)):
                e, f = edges[i], edges[j]
                if set(e) & set(f):
                    continue
                if geometry.segments_cross_off_endpoints(
                        self.nodes[e[0]], self.nodes[e[1]],
                        self.nodes[f[0]], self.nodes[f[1]]):
                    bad.append((e, f))
        return bad

    def intersection_nodes(self) -> List[str]:
        """Nodes used by two or more distinct routes, in node-id order."""
        usage: Dict[str, set] = {}
        for rid, seq in self.routes.items():
            for n in seq:
                usage.setdefault(n, set()).add(rid)
        return sorted((n for n, rids in usage.items() if len(rids) >= 2),
                      key=_node_sort_key)

    def routes_through(self, node: str) -> List[str]:
        return sorted(rid for rid, seq in self.routes.items() if node in seq)

    # -- JSON wire format ---------------------------------------------------

    def to_json_obj(self) -> dict:
        return {
            "spacing_nmi": self.spacing,
            "nodes": {n: [round(p[0], 6), round(p[1], 6)]
                      for n, p in self.nodes.items()},
            "routes": {rid: list(seq) for rid, seq in self.routes.items()},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), sort_keys=True, separators=(",", ": "))

    @classmethod
    def from_json_obj(cls, obj: dict) -> "SectorGraph":
        try:
            g = cls(nodes={n: (float(p[0]), float(p[1]))
                           for n, p in obj["nodes"].items()},
                    routes={rid: [str(n) for n in seq]
                            for rid, seq in obj["routes"].items()},
                    spacing=float(obj.get("spacing_nmi", DEFAULT_SPACING_NMI)))
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise InvalidSector(f"malformed sector JSON: {exc}") from exc
        g.check()
        return g

    @classmethod
    def from_json(cls, text: str) -> "SectorGraph":
        return cls.from_json_obj(json.loads(text))


def _node_sort_key(node_id: str):
    # dense ids "N0".."N99" sort numerically; fall back to lexical
    if node_id.startswith("N") and node_id[1:].isdigit():
        return (0, int(node_id[1:]), node_id)
    return (1, 0, node_id)


@dataclass
class Scenario:
    duration: int
    aircraft: List[Aircraft] = field(default_factory=list)

    def check(self, graph: Optional[SectorGraph] = None) -> None:
        if self.duration < 1:
            raise InvalidScenario("duration must be >= 1")
        ids = [a.id for a in self.aircraft]
        if len(set(ids)) != len(ids):
            raise InvalidScenario("duplicate aircraft ids")
        for a in self.aircraft:
            a.check()
            if graph is not None and a.route not in graph.routes:
                raise InvalidScenario(f"aircraft {a.id}: unknown route {a.route}")

    def to_json_obj(self) -> dict:
        return {
            "duration": self.duration,
            "aircraft": [
                {"id": a.id, "spawn_time": a.spawn_time, "route": a.route,
                 "speed": a.speed, "initial_fl": a.initial_fl,
                 "exit_fl": a.exit_fl}
                for a in self.aircraft
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), sort_keys=True, separators=(",", ": "))

    @classmethod
    def from_json_obj(cls, obj: dict) -> "Scenario":
        problems = schema_problems(obj)
        if problems:
            raise InvalidScenario("; ".join(problems))
        aircraft = []
        for rec in obj["aircraft"]:
            fl0 = rec.get("initial_fl", DEFAULT_FL)
            fl1 = rec.get("exit_fl", DEFAULT_FL)
            aircraft.append(Aircraft(id=str(rec["id"]),
                                     spawn_time=int(rec["spawn_time"]),
                                     route=str(rec["route"]),
                                     speed=int(rec["speed"]),
                                     initial_fl=int(fl0), exit_fl=int(fl1)))
        return cls(duration=int(obj["duration"]), aircraft=aircraft)

    @classmethod
    def from_json(cls, text: str) -> "Scenario":
        return cls.from_json_obj(json.loads(text))


def schema_problems(obj) -> List[str]:
    """Structural problems with a scenario JSON object; empty list if clean."""
    out: List[str] = []
    if not isinstance(obj, dict):
        return ["not a JSON object"]
    if not isinstance(obj.get("duration"), int) or isinstance(obj.get("duration"), bool):
        out.append("missing or non-integer 'duration'")
    ac = obj.get("aircraft")
    if not isinstance(ac, list):
        out.append("missing or non-list 'aircraft'")
        return out
    for i, rec in enumerate(ac):
        if not isinstance(rec, dict):
            out.append(f"aircraft[{i}]: not an object")
            continue
        if not isinstance(rec.get("id"), str):
            out.append(f"aircraft[{i}]: missing string 'id'")
        if not isinstance(rec.get("spawn_time"), int) or isinstance(rec.get("spawn_time"), bool):
            out.append(f"aircraft[{i}]: missing integer 'spawn_time'")
        if not isinstance(rec.get("route"), str):
            out.append(f"aircraft[{i}]: missing string 'route'")
        if rec.get("speed") not in (1, 2):
            out.append(f"aircraft[{i}]: 'speed' must be 1 or 2")
        for key in ("initial_fl", "exit_fl"):
            if key in rec and (not isinstance(rec[key], int) or isinstance(rec[key], bool)):
                out.append(f"aircraft[{i}]: '{key}' must be an integer")
    return out


MECHANISM_SAME_NODE = "same_node"
MECHANISM_SWAP = "swap"

CLASS_CROSS_PATH = "cross_path"
CLASS_HEAD_ON = "head_on"
CLASS_CATCH_UP = "catch_up"


@dataclass(frozen=True)
class InteractionEvent:
    """A discrete relevancy event between one aircraft pair at one time-step."""

    time: int
    pair: Tuple[str, str]            # sorted aircraft ids
    nodes: Tuple[str, ...]           # one node (same_node) or two (swap)
    mechanism: str
    interaction_class: str

    def __post_init__(self):
        object.__setattr__(self, "pair", tuple(sorted(self.pair)))
        if self.pair[0] == self.pair[1]:
            raise ValueError("event pair must be two distinct aircraft")
        if self.mechanism == MECHANISM_SWAP:
            if len(self.nodes) != 2 or self.nodes[0] == self.nodes[1]:
                raise ValueError("swap event needs two distinct nodes")
            if self.time < 1:
                raise ValueError("swap event needs time >= 1")

    def to_json_obj(self) -> dict:
        return {"time": self.time, "pair": list(self.pair),
                "nodes": list(self.nodes), "mechanism": self.mechanism,
                "class": self.interaction_class}


BENCHMARKS = ("traffic_volume", "scenario_length", "sector_complexity",
              "controllability")


@dataclass(frozen=True)
class BenchmarkParams:
    benchmark: str
    N: int
    T: int
    n_routes: int = 7
    n_intersections: int = 7
    target_pairs: Optional[int] = None

    def __post_init__(self):
        if self.benchmark not in BENCHMARKS:
            raise ValueError(f"unknown benchmark {self.benchmark!r}")
        if self.benchmark == "controllability" and self.target_pairs is None:
            raise ValueError("controllability requires target_pairs")

    @property
    def point(self):
        """The swept parameter value identifying this cell's column."""
        return {"traffic_volume": self.N,
                "scenario_length": self.T,
                "sector_complexity": self.n_intersections,
                "controllability": self.target_pairs}[self.benchmark]
