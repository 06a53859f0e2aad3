"""Shared fixtures: hand-built sector graphs, the curved two-route encoder
fixture, and helpers that script a perfect mock provider for harness runs."""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Dict, List, Tuple

import pytest

from atcgen import client, harness, prompting
from atcgen.core import Aircraft, BenchmarkParams, Scenario, SectorGraph
from atcgen.encoder import ContinuousSector
from atcgen.rollout import detect_interactions, unique_pairs, validate_scenario


@pytest.fixture
def chain_sector() -> SectorGraph:
    """Five-node straight chain flown in both directions, plus a
    perpendicular route through the middle node."""
    nodes = {f"X{i}": (20.0 * i, 0.0) for i in range(5)}
    nodes.update({"Y0": (40.0, -40.0), "Y1": (40.0, -20.0),
                  "Y3": (40.0, 20.0), "Y4": (40.0, 40.0)})
    return SectorGraph(
        nodes=nodes,
        routes={
            "EAST": ["X0", "X1", "X2", "X3", "X4"],
            "WEST": ["X4", "X3", "X2", "X1", "X0"],
            "NORTH": ["Y0", "Y1", "X2", "Y3", "Y4"],
        })


@pytest.fixture
def disjoint_sector() -> SectorGraph:
    nodes = {f"A{i}": (20.0 * i, 0.0) for i in range(4)}
    nodes.update({f"B{i}": (20.0 * i, 100.0) for i in range(4)})
    return SectorGraph(
        nodes=nodes,
        routes={"RA": ["A0", "A1", "A2", "A3"],
                "RB": ["B0", "B1", "B2", "B3"]})


def curved_pair_sector() -> ContinuousSector:
    """Two continuous routes: a near-straight one with a small kink, and one
    that crosses it mid-leg and joins a three-fix cluster at its end."""
    y2 = math.sqrt(41 ** 2 - 20 ** 2)
    return ContinuousSector(
        fixes={
            "P1": (0.0, 0.0), "K": (40.0, 1.5),
            "C1": (116.0, -2.0), "C2": (120.0, 4.0), "C3": (124.0, -2.0),
            "B1": (50.0, -1.5 * y2), "B2": (100.0, y2),
        },
        routes={"RA": ["P1", "K", "C1"], "RB": ["B1", "B2", "C2"]})


@pytest.fixture(name="curved_pair_sector")
def curved_pair_sector_fixture() -> ContinuousSector:
    return curved_pair_sector()


# -- perfect-provider construction -------------------------------------------

def disjoint_routes(g: SectorGraph) -> List[str]:
    """Greedy set of pairwise node-disjoint routes (route-id order)."""
    picked: List[str] = []
    used: set = set()
    for rid in sorted(g.routes, key=lambda r: (len(r), r)):
        nodes = set(g.routes[rid])
        if not nodes & used:
            picked.append(rid)
            used |= nodes
    return picked


def perfect_noninteracting(g: SectorGraph, N: int, T: int) -> Scenario:
    """N all-fast aircraft on node-disjoint routes with distinct spawn times
    per route: provably interaction-free."""
    routes = disjoint_routes(g)
    assert routes, "sector has no disjoint routes"
    capacity = len(routes) * T
    assert capacity >= N, f"cannot place {N} aircraft on {len(routes)} routes"
    aircraft = []
    for i in range(N):
        aircraft.append(Aircraft(id=f"AC{i + 1}",
                                 spawn_time=i // len(routes),
                                 route=routes[i % len(routes)], speed=1))
    return Scenario(duration=T, aircraft=aircraft)


def perfect_controllability(g: SectorGraph, N: int, T: int, k: int) -> Scenario:
    """Exactly k unique interacting pairs: catch-up pairs (slow leader, fast
    chaser three steps behind) at most two per disjoint route, fillers on a
    separate route."""
    routes = disjoint_routes(g)
    pair_routes = routes[:-1] or routes
    filler_route = routes[-1]
    assert len(routes) >= 2 and T >= 12
    aircraft = []
    idx = 1
    for j in range(k):
        rid = pair_routes[(j // 2) % len(pair_routes)]
        s = 0 if j % 2 == 0 else 6
        aircraft.append(Aircraft(id=f"AC{idx}", spawn_time=s, route=rid,
                                 speed=2))
        aircraft.append(Aircraft(id=f"AC{idx + 1}", spawn_time=s + 3,
                                 route=rid, speed=1))
        idx += 2
    fill = 0
    while idx <= N:
        aircraft.append(Aircraft(id=f"AC{idx}", spawn_time=fill,
                                 route=filler_route, speed=1))
        idx += 1
        fill += 1
    return Scenario(duration=T, aircraft=aircraft)


def scenario_response(s: Scenario) -> str:
    return "```json\n" + json.dumps(s.to_json_obj(), indent=1) + "\n```"


def write_fixture(mock_dir: Path, messages, entry) -> str:
    """entry: dict (single response) or list (scripted sequence)."""
    if isinstance(messages, str):
        messages = [{"role": "user", "content": messages}]
    phash = client.prompt_hash(messages)
    payload = {"sequence": entry} if isinstance(entry, list) else entry
    (mock_dir / f"{phash}.json").write_text(json.dumps(payload))
    return phash


def seed_perfect_fixtures(mock_dir: Path, benchmarks, suite_seed: int) -> int:
    """Script a provider that solves every benchmark cell perfectly.

    Returns the number of fixtures written."""
    mock_dir.mkdir(parents=True, exist_ok=True)
    n = 0
    for bench in benchmarks:
        for params in harness.GRIDS[bench]:
            for g in harness.suite_for(bench, params, suite_seed):
                if bench == "controllability":
                    s = perfect_controllability(g, params.N, params.T,
                                                params.target_pairs)
                    assert len(unique_pairs(detect_interactions(s, g))) == \
                        params.target_pairs
                else:
                    s = perfect_noninteracting(g, params.N, params.T)
                    assert detect_interactions(s, g) == []
                prompt = prompting.build_benchmark_prompt(g, params)
                write_fixture(mock_dir, prompt,
                              {"text": scenario_response(s)})
                n += 1
    return n


def mock_provider(mock_dir: Path, model: str = "mock-model",
                  price: float = 1.0) -> client.ProviderConfig:
    return client.ProviderConfig(endpoint=f"mock://{mock_dir}", model=model,
                                 price_per_mtok=price, retry_backoff=0.0)
