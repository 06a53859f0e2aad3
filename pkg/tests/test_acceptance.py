"""Acceptance gate: one test per release criterion, each printing a
"PASS criterion N: ..." line so a run log doubles as a checklist.

Criteria covered:
 1. detector equals a naive per-step reference on 1,000 random scenarios
 2. six hand-enumerated interaction-type fixtures classify correctly
 3. encoder properties on the curved two-route fixture
 4. synthetic generator exactness over 110 sectors in under 30 s
 5. random-baseline bands and bootstrap monotonicity of MUIP in N
 6. normalized-skill formula checks
 7. mock end-to-end four-benchmark run, resume identity, token escalation
 8. refinement loop trace and feedback contents
 9. scenario/sector schema bit-exactness and golden-file round-trip
"""

import csv
import json
import time
from pathlib import Path

import numpy as np
import pytest

from atcgen import baseline, client, harness, metrics, prompting, sectors
from atcgen.core import BenchmarkParams, Scenario, SectorGraph
from atcgen.harness import ResultStore
from atcgen.rollout import detect_interactions, unique_pairs
from tests.conftest import (curved_pair_sector, mock_provider,
                            perfect_noninteracting, scenario_response,
                            seed_perfect_fixtures, write_fixture)
from tests.test_harness import (SharedTransportFactory, messages_after,
                                refinement_case)
from tests.test_rollout import ac, reference_events

GOLDEN = Path(__file__).parent / "golden"


def ok(n, text):
    print(f"PASS criterion {n}: {text}")


class TestCriterion1DetectorOracle:
    def test_detector_matches_reference_on_1000_scenarios(self):
        t0 = time.monotonic()
        suite = sectors.generate_suite(0, 10, 7, 7)
        rng = baseline.sample_rng(2024)
        for i in range(1000):
            g = suite[i % 10]
            n = int(rng.integers(2, 9))
            s = baseline.sample_random_scenario(g, n, 12,
                                                baseline.sample_rng(2024, i))
            events = detect_interactions(s, g)
            got = sorted((e.time, e.pair, e.mechanism, e.nodes)
                         for e in events)
            expected = reference_events(s, g)
            assert got == expected, f"scenario {i} diverged"
            assert unique_pairs(events) == {p for _, p, _, _ in expected}
        elapsed = time.monotonic() - t0
        assert elapsed < 10.0, f"took {elapsed:.1f}s"
        ok(1, f"detector == naive reference on 1000 random scenarios "
              f"({elapsed:.1f}s)")


class TestCriterion2InteractionFixtures:
    def test_six_variants(self, chain_sector):
        # hand-enumerated position tables on the 5-node chain / perpendicular
        cases = [
            # (fleet, expected (mechanism, class)) per variant
            ("head-on even parity (same-node meet)",
             [ac(), ac(id="AC2", route="WEST")], ("same_node", "head_on")),
            ("head-on odd parity (node swap)",
             [ac(), ac(id="AC2", route="WEST", spawn=1)], ("swap", "head_on")),
            ("catch-up, fast chaser 3 steps behind",
             [ac(speed=2), ac(id="AC2", spawn=3)], ("same_node", "catch_up")),
            ("catch-up, fast chaser 2 steps behind",
             [ac(speed=2), ac(id="AC2", spawn=2)], ("same_node", "catch_up")),
            ("cross-path, eastbound vs northbound",
             [ac(), ac(id="AC2", route="NORTH")], ("same_node", "cross_path")),
            ("cross-path, westbound vs northbound",
             [ac(route="WEST"), ac(id="AC2", route="NORTH")],
             ("same_node", "cross_path")),
        ]
        for name, fleet, expected in cases:
            events = detect_interactions(Scenario(12, fleet), chain_sector)
            assert events, name
            got = {(e.mechanism, e.interaction_class) for e in events}
            assert got == {expected}, f"{name}: {got}"
        ok(2, "all 6 interaction-type variants classified correctly")


class TestCriterion3Encoder:
    def test_fixture_properties(self, curved_pair_sector):
        from atcgen import encoder, geometry
        g = encoder.encode_sector(curved_pair_sector)

        # one mid-leg crossing node plus one merged cluster node
        assert g.intersection_nodes() == ["N7", "N12"]

        lengths = [geometry.dist(g.nodes[a], g.nodes[b]) for a, b in g.edges()]
        assert min(lengths) >= 10.0 and max(lengths) <= 30.0

        assert g.off_node_crossings() == []

        for rid, seq in curved_pair_sector.routes.items():
            original = geometry.polyline_length(
                [curved_pair_sector.fixes[f] for f in seq])
            encoded = geometry.polyline_length(
                [g.nodes[n] for n in g.routes[rid]])
            assert abs(encoded - original) <= 20.0, rid

        g2 = encoder.encode_sector(encoder.graph_to_continuous(g))
        for rid in g.routes:
            p1 = [g.nodes[n] for n in g.routes[rid]]
            p2 = [g2.nodes[n] for n in g2.routes[rid]]
            assert len(p1) == len(p2)
            assert all(geometry.dist(a, b) < 1e-6 for a, b in zip(p1, p2))
        ok(3, "encoder fixture: 2 shared nodes, edges in [10,30] nmi, "
              "planar, length-preserving, idempotent")


class TestCriterion4Generator:
    def test_110_sectors_exact(self):
        t0 = time.monotonic()
        for target in range(4, 15):
            for seed in range(10):
                g = sectors.generate(seed, 7, target)
                assert len(g.intersection_nodes()) == target
                assert g.to_json() == sectors.generate(seed, 7, target).to_json()
        elapsed = time.monotonic() - t0
        assert elapsed < 30.0, f"took {elapsed:.1f}s"
        ok(4, f"110 sectors hit their intersection targets exactly "
              f"({elapsed:.1f}s)")


@pytest.fixture(scope="module")
def suite():
    return sectors.generate_suite(0, 10, 7, 7)


class TestCriterion5Baselines:
    def test_bands_and_monotonicity(self, suite):
        est2 = baseline.estimate_muip_rand(suite, 2, 12, samples=500)
        est8 = baseline.estimate_muip_rand(suite, 8, 12, samples=500)
        est30 = baseline.estimate_muip_rand(suite, 30, 12, samples=500)
        mad1 = baseline.estimate_madip_rand(suite, 10, 12, 1, samples=500)

        assert 0.02 <= est2.mean <= 0.30, est2.mean
        assert 0.7 <= est8.mean <= 3.5, est8.mean
        assert 14.0 <= est30.mean <= 45.0, est30.mean
        assert 0.8 <= mad1.mean <= 3.5, mad1.mean

        rng = np.random.default_rng(0)
        for lo, hi in [(est2, est8), (est8, est30)]:
            a = np.asarray(lo.per_scenario)
            b = np.asarray(hi.per_scenario)
            wins = 0
            for _ in range(1000):
                if rng.choice(b, b.size).mean() > rng.choice(a, a.size).mean():
                    wins += 1
            assert wins >= 950, f"bootstrap monotonicity only {wins}/1000"
        ok(5, f"baseline bands hold (N=2: {est2.mean:.3f}, N=8: "
              f"{est8.mean:.3f}, N=30: {est30.mean:.2f}, MADIP k=1: "
              f"{mad1.mean:.2f}); MUIP monotone in N at 95% bootstrap")


class TestCriterion6SkillFormulas:
    def test_formulas(self):
        for r in (0.5, 1.0, 28.4, 100.0):
            assert metrics.normalized_skill(0.0, r) == 1.0
            assert metrics.normalized_skill(r, r) == 0.0
            assert metrics.normalized_skill(2 * r, r) == 0.0
        assert metrics.normalized_skill(0.9, 28.4) == \
            pytest.approx(0.9683, abs=1e-4)
        ok(6, "skill formula checks incl. 1 - 0.9/28.4 = 0.9683")


ALL_BENCHMARKS = ["traffic_volume", "scenario_length", "sector_complexity",
                  "controllability"]


@pytest.fixture(scope="module")
def mock_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("perfect-fixtures")
    n = seed_perfect_fixtures(d, ALL_BENCHMARKS, suite_seed=0)
    assert n == 340
    return d


class TestCriterion7MockEndToEnd:
    BENCHMARKS = ALL_BENCHMARKS

    def run_all(self, mock_dir, store_path):
        store = ResultStore(store_path)
        factory = SharedTransportFactory(mock_dir)
        counters = harness.run_benchmark(
            self.BENCHMARKS, [mock_provider(mock_dir)], suite_seed=0,
            store=store, baseline_samples=100, transport_factory=factory)
        return store, counters, factory.transport

    def test_full_run_and_report(self, mock_dir, tmp_path):
        store, counters, _ = self.run_all(mock_dir, tmp_path / "store.jsonl")
        assert counters == {"run": 340, "skipped": 0}
        assert all(c.outcome == "ok" for c in store.cells.values())

        out = tmp_path / "report"
        written = {p.name for p in harness.report(store, out)}
        assert {"table_traffic_volume.csv", "table_scenario_length.csv",
                "table_sector_complexity.csv", "table_controllability.csv",
                "skills.csv", "pareto.csv"} <= written
        with open(out / "skills.csv") as fh:
            [row] = list(csv.DictReader(fh))
        assert [float(row[k]) for k in ("mu1", "mu2", "mu3", "mu4")] == \
            [1.0, 1.0, 1.0, 1.0]
        assert float(row["skill_sum"]) == 4.0
        ok(7, "perfect mock provider scores mu1..mu4 = 1.0 across the "
              "4-benchmark run")

    def test_interrupted_resume_identical(self, mock_dir, tmp_path):
        full_store, _, _ = self.run_all(mock_dir, tmp_path / "full.jsonl")
        # interrupt: first pass only runs two benchmarks, then resume with all
        partial_path = tmp_path / "resumed.jsonl"
        store = ResultStore(partial_path)
        factory = SharedTransportFactory(mock_dir)
        harness.run_benchmark(self.BENCHMARKS[:2], [mock_provider(mock_dir)],
                              suite_seed=0, store=store, baseline_samples=100,
                              transport_factory=factory)
        resumed, counters, _ = self.run_all(mock_dir, partial_path)
        assert counters["skipped"] == 180 and counters["run"] == 160
        assert {k: c.to_json_obj() for k, c in resumed.cells.items()} == \
            {k: c.to_json_obj() for k, c in full_store.cells.items()}
        assert resumed.baselines == full_store.baselines
        ok(7, "interrupted-and-resumed run reproduces the full store exactly")

    def test_token_escalation_budgets(self, tmp_path):
        prompt = "please try harder"
        write_fixture(tmp_path, prompt,
                      {"text": "...", "finish_reason": "length"})
        with pytest.raises(client.BudgetExhausted) as err:
            client.complete_with_escalation(prompt, mock_provider(tmp_path))
        assert err.value.budgets == [35_000, 45_000, 50_000]
        ok(7, "escalation walks budgets [35000, 45000, 50000] then raises "
              "BudgetExhausted")


class TestCriterion8Refinement:
    def test_two_round_trace_and_feedback(self, tmp_path):
        g, params, good, flawed = refinement_case()
        prompt = prompting.build_benchmark_prompt(g, params)
        msgs0 = [{"role": "user", "content": prompt}]
        flawed_text = scenario_response(flawed)
        write_fixture(tmp_path, msgs0, {"text": flawed_text})
        msgs1 = messages_after(g, params, msgs0, flawed_text)
        write_fixture(tmp_path, msgs1, {"text": scenario_response(good)})

        trace = harness.run_refinement(mock_provider(tmp_path), g, params,
                                       max_rounds=3)
        assert trace.status == "resolved"
        assert trace.pair_counts[0] > 0 and trace.pair_counts[-1] == 0
        assert len(trace.pair_counts) == 2

        feedback = msgs1[-1]["content"]
        for e in detect_interactions(flawed, g):
            assert e.pair[0] in feedback and e.pair[1] in feedback
            assert f"t={e.time}" in feedback
            assert e.nodes[0] in feedback
        ok(8, "refinement trace [k>0, 0]; feedback names every violating "
              "pair with time and node")


class TestCriterion9Schemas:
    def test_template_examples_and_golden_round_trip(self, chain_sector):
        # the schema example embedded in every prompt must itself parse
        for bench, params in [
                ("traffic_volume", BenchmarkParams("traffic_volume", N=8, T=12)),
                ("controllability", BenchmarkParams("controllability", N=10,
                                                    T=12, target_pairs=3))]:
            text = prompting.build_benchmark_prompt(chain_sector, params)
            assert isinstance(client.extract_scenario_json(text), Scenario)
        bundle = prompting.build_controllability_prompt(chain_sector, "spec",
                                                        mode_3d=True)
        assert isinstance(client.extract_scenario_json(bundle.text), Scenario)

        sector_text = (GOLDEN / "sector.json").read_text()
        assert SectorGraph.from_json(sector_text).to_json() + "\n" == \
            sector_text
        scenario_text = (GOLDEN / "scenario.json").read_text()
        assert Scenario.from_json(scenario_text).to_json() + "\n" == \
            scenario_text
        ok(9, "prompt schema examples parse; golden sector/scenario "
              "round-trip bit-exactly")
