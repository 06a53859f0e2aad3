"""Prompt construction: sector serialization, benchmark tasks, free-text
controllability specs, and corrective feedback messages.

Prompt wording lives in plain-text template files (see templates/) so it can
be audited and swapped without touching code; builders are pure functions of
their inputs. The template directory can be overridden with the
ATG_TEMPLATES environment variable or an explicit argument.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from string import Template
from typing import List, Optional, Sequence

from .core import BenchmarkParams, Scenario, SectorGraph
from .rollout import InteractionEvent, ValidationReport

DEFAULT_TEMPLATE_DIR = Path(__file__).parent / "templates"

SCHEMA_EXAMPLE_2D = {
    "duration": 12,
    "aircraft": [
        {"id": "AC1", "spawn_time": 0, "route": "R1", "speed": 1},
        {"id": "AC2", "spawn_time": 3, "route": "R2", "speed": 2},
    ],
}

SCHEMA_EXAMPLE_3D = {
    "duration": 12,
    "aircraft": [
        {"id": "AC1", "spawn_time": 0, "route": "R1", "speed": 1,
         "initial_fl": 280, "exit_fl": 340},
        {"id": "AC2", "spawn_time": 3, "route": "R2", "speed": 2,
         "initial_fl": 300, "exit_fl": 300},
    ],
}


def template_dir(override: Optional[str] = None) -> Path:
    if override:
        return Path(override)
    env = os.environ.get("ATG_TEMPLATES")
    return Path(env) if env else DEFAULT_TEMPLATE_DIR


def _load(name: str, templates: Optional[str] = None) -> Template:
    return Template((template_dir(templates) / name).read_text())


def render_sector_text(g: SectorGraph) -> str:
    """Deterministic plain-text sector listing for prompts."""
    lines = ["Nodes (id: x, y in nautical miles):"]
    for node in sorted(g.nodes, key=_node_key):
        x, y = g.nodes[node]
        lines.append(f"{node}: ({x:.0f}, {y:.0f})")
    lines.append("")
    lines.append("Routes (one-way, flown in the order listed):")
    for rid in sorted(g.routes, key=_route_key):
        seq = g.routes[rid]
        lines.append(f"{rid}: {' -> '.join(seq)}  ({len(seq)} nodes)")
    lines.append("")
    inter = g.intersection_nodes()
    if inter:
        lines.append("Intersections (nodes shared by several routes):")
        for node in inter:
            lines.append(f"{node}: routes {', '.join(g.routes_through(node))}")
    else:
        lines.append("Intersections: none (routes are disjoint).")
    return "\n".join(lines)


def _node_key(nid: str):
    return (0, int(nid[1:])) if nid[1:].isdigit() else (1, nid)


def _route_key(rid: str):
    return (0, int(rid[1:])) if rid[1:].isdigit() else (1, rid)


def build_benchmark_prompt(g: SectorGraph, params: BenchmarkParams,
                           templates: Optional[str] = None) -> str:
    """Prompt for one benchmark cell: task, rules, strategy, sector, schema."""
    if params.benchmark == "controllability":
        task = _load("task_controllability.txt", templates).substitute(
            n=params.N, t=params.T, k=params.target_pairs).strip()
    else:
        task = _load("task_noninteracting.txt", templates).substitute(
            n=params.N, t=params.T).strip()
    example = dict(SCHEMA_EXAMPLE_2D)
    example["duration"] = params.T
    return _load("benchmark.txt", templates).substitute(
        task=task,
        sector=render_sector_text(g),
        schema_example=json.dumps(example, indent=2),
        duration=params.T)


@dataclass
class PromptBundle:
    text: str
    warnings: List[str] = field(default_factory=list)


def build_controllability_prompt(g: SectorGraph, spec_text: str,
                                 mode_3d: bool = True,
                                 existing: Optional[Scenario] = None,
                                 templates: Optional[str] = None
                                 ) -> PromptBundle:
    """Free-text scenario-specification prompt, optionally against an
    existing scenario to modify."""
    if not spec_text.strip():
        raise ValueError("empty scenario specification")
    warnings = []
    if not mode_3d and "flight level" in spec_text.lower():
        warnings.append("specification mentions flight levels but 3D mode is off")
    if mode_3d:
        example = SCHEMA_EXAMPLE_3D
        relevancy = ("Only pairs with overlapping flight-level ranges are "
                     "relevant: an aircraft's range spans from min(initial_fl, "
                     "exit_fl) to max(initial_fl, exit_fl), and two aircraft "
                     "can only interact if their ranges overlap.")
        notes = ("Flight levels are integers in [0, 660] (hundreds of feet). "
                 "\"initial_fl\" is the entry level and \"exit_fl\" the "
                 "requested exit level.")
    else:
        example = SCHEMA_EXAMPLE_2D
        relevancy = ("All aircraft fly at the same flight level, so every "
                     "pair is relevant.")
        notes = "Omit flight levels; all aircraft fly level at FL300."
    existing_section = ""
    if existing is not None:
        existing_section = ("\n## Existing scenario\nAdapt the following "
                           "scenario to the specification above:\n\n```json\n"
                           + json.dumps(existing.to_json_obj(), indent=2)
                           + "\n```\n")
    text = _load("freeform.txt", templates).substitute(
        spec=spec_text.strip(),
        relevancy_rule=relevancy,
        sector=render_sector_text(g),
        existing_section=existing_section,
        schema_example=json.dumps(example, indent=2),
        schema_notes=notes)
    return PromptBundle(text=text, warnings=warnings)


def build_feedback(events: Sequence[InteractionEvent],
                   report: Optional[ValidationReport],
                   requirement: str, attempt: int,
                   templates: Optional[str] = None) -> str:
    """Corrective message listing every violating pair with time and place."""
    problems = []
    for e in events:
        where = e.nodes[0] if len(e.nodes) == 1 else " and ".join(e.nodes)
        mech = ("occupy the same node" if e.mechanism == "same_node"
                else "swap nodes")
        problems.append(
            f"- {e.pair[0]} and {e.pair[1]} {mech} at t={e.time} "
            f"(node {where}); {e.interaction_class.replace('_', '-')} "
            f"interaction.")
    if report is not None:
        for v in report.violations:
            problems.append(f"- {v.aircraft_id}: {v.rule.replace('_', ' ')} "
                            f"({v.detail}).")
        for e in report.spawn_grace_violations:
            problems.append(
                f"- {e.pair[0]} and {e.pair[1]} interact at t={e.time} "
                f"(node {e.nodes[0]}), inside an aircraft's post-spawn grace "
                f"window: aircraft must be interaction-free at their spawn "
                f"step and the step after.")
    if not problems:
        raise ValueError("no violations: feedback not needed")
    return _load("feedback.txt", templates).substitute(
        attempt=attempt, requirement=requirement.strip(),
        problems="\n".join(problems))
