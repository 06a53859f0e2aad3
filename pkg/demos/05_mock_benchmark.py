#!/usr/bin/env python3
"""Run the controllability benchmark end-to-end against a scripted provider.

No network, no credentials: the demo writes mock-transport fixture files
that answer every benchmark prompt with a hand-constructed scenario hitting
the requested interaction count exactly, runs the harness into a JSONL
result store, re-runs it to show resume skipping, and emits the report CSVs.
"""

import json
import sys
import tempfile
from pathlib import Path

from atcgen import client, harness, prompting
from atcgen.core import Aircraft, Scenario
from atcgen.rollout import detect_interactions, unique_pairs


def disjoint_routes(g):
    picked, used = [], set()
    for rid in sorted(g.routes):
        if not set(g.routes[rid]) & used:
            picked.append(rid)
            used |= set(g.routes[rid])
    return picked


def solve(g, params):
    """Exactly target_pairs catch-up pairs plus non-interacting fillers."""
    routes = disjoint_routes(g)
    aircraft, idx = [], 1
    for j in range(params.target_pairs):
        rid = routes[(j // 2) % (len(routes) - 1)]
        s = 0 if j % 2 == 0 else 6
        aircraft.append(Aircraft(f"AC{idx}", s, rid, speed=2))
        aircraft.append(Aircraft(f"AC{idx + 1}", s + 3, rid, speed=1))
        idx += 2
    spawn = 0
    while idx <= params.N:
        aircraft.append(Aircraft(f"AC{idx}", spawn, routes[-1], speed=1))
        idx, spawn = idx + 1, spawn + 1
    return Scenario(duration=params.T, aircraft=aircraft)


def seed_fixtures(mock_dir: Path, suite_seed: int) -> int:
    count = 0
    for params in harness.GRIDS["controllability"]:
        for g in harness.suite_for("controllability", params, suite_seed):
            scenario = solve(g, params)
            pairs = unique_pairs(detect_interactions(scenario, g))
            assert len(pairs) == params.target_pairs
            prompt = prompting.build_benchmark_prompt(g, params)
            phash = client.prompt_hash([{"role": "user", "content": prompt}])
            reply = "```json\n" + json.dumps(scenario.to_json_obj()) + "\n```"
            (mock_dir / f"{phash}.json").write_text(
                json.dumps({"text": reply, "completion_tokens": 400}))
            count += 1
    return count


def main():
    work = Path(tempfile.mkdtemp(prefix="mock-benchmark-"))
    mock_dir = work / "fixtures"
    mock_dir.mkdir()
    n = seed_fixtures(mock_dir, suite_seed=0)
    print(f"scripted {n} provider fixtures in {mock_dir}")

    model = client.ProviderConfig(endpoint=f"mock://{mock_dir}",
                                  model="scripted-solver",
                                  price_per_mtok=2.0)
    store = harness.ResultStore(work / "store.jsonl")
    counters = harness.run_benchmark(["controllability"], [model],
                                     suite_seed=0, store=store,
                                     baseline_samples=100)
    print(f"first run:  {counters}")
    counters = harness.run_benchmark(["controllability"], [model],
                                     suite_seed=0, store=store,
                                     baseline_samples=100)
    print(f"second run: {counters}  (everything already stored)")

    out = work / "report"
    for path in harness.report(store, out):
        print(f"wrote {path}")
    skills = (out / "skills.csv").read_text().strip().splitlines()
    print("\nskills.csv:")
    for line in skills:
        print(f"  {line}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
