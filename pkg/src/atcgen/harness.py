"""Benchmark orchestration: runs models over the four parameter grids and
ten-sector suites, persists results in an append-only JSONL store, and turns
a store into the result tables, skill scores and Pareto data.

Cells are keyed by (benchmark, model, parameter point, sector index, prompt
hash); re-running with an existing store skips cells already present, so an
interrupted run resumes where it stopped. The prompt hash in the key means a
template change invalidates stale cells instead of mixing prompt versions.
"""

from __future__ import annotations

import json
import os
import tempfile
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from . import baseline, client, metrics, prompting, sectors
from .core import BenchmarkParams, DomainError, Scenario, SectorGraph
from .rollout import detect_interactions, unique_pairs, validate_scenario


class EmptyStore(DomainError):
    pass


# Parameter grids for the four benchmarks (fixed companions: 7 routes,
# 7 intersections, T=12, N=8/10 as appropriate).
GRIDS: Dict[str, List[BenchmarkParams]] = {
    "traffic_volume": [
        BenchmarkParams("traffic_volume", N=n, T=12)
        for n in (2, 3, 4, 5, 6, 7, 8, 9, 10, 15, 20, 25, 30)],
    "scenario_length": [
        BenchmarkParams("scenario_length", N=8, T=t)
        for t in (12, 15, 18, 21, 24)],
    "sector_complexity": [
        BenchmarkParams("sector_complexity", N=8, T=12, n_intersections=k)
        for k in range(4, 15)],
    "controllability": [
        BenchmarkParams("controllability", N=10, T=12, target_pairs=k)
        for k in (1, 2, 3, 4, 5)],
}

N_SECTORS = 10
BASELINE_SAMPLES = 500


def cell_key(benchmark: str, model: str, point, sector_index: int,
             phash: str) -> str:
    return f"{benchmark}|{model}|{point}|{sector_index}|{phash}"


@dataclass
class BenchmarkCell:
    benchmark: str
    model: str
    point: object
    sector_index: int
    prompt_hash: str
    outcome: str                       # ok | failed
    pair_count: Optional[int] = None
    target_pairs: Optional[int] = None
    valid: Optional[bool] = None
    violation_count: int = 0
    completion_tokens: int = 0
    cost: Optional[float] = None
    attempts: int = 0
    error: Optional[str] = None

    @property
    def key(self) -> str:
        return cell_key(self.benchmark, self.model, self.point,
                        self.sector_index, self.prompt_hash)

    def to_json_obj(self) -> dict:
        return {"kind": "cell", "benchmark": self.benchmark,
                "model": self.model, "point": self.point,
                "sector_index": self.sector_index,
                "prompt_hash": self.prompt_hash, "outcome": self.outcome,
                "pair_count": self.pair_count,
                "target_pairs": self.target_pairs, "valid": self.valid,
                "violation_count": self.violation_count,
                "completion_tokens": self.completion_tokens,
                "cost": self.cost, "attempts": self.attempts,
                "error": self.error}

    @classmethod
    def from_json_obj(cls, obj: dict) -> "BenchmarkCell":
        obj = {k: v for k, v in obj.items() if k != "kind"}
        return cls(**obj)


class ResultStore:
    """Append-only JSONL store with a single-writer lock.

    Lines are either benchmark cells ("kind": "cell") or random-baseline
    entries ("kind": "baseline"). compact() rewrites the file keeping the
    last record per key.
    """

    def __init__(self, path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self.cells: Dict[str, BenchmarkCell] = {}
        self.baselines: Dict[Tuple[str, object], dict] = {}
        if self.path.exists():
            self._load()

    def _load(self) -> None:
        with open(self.path) as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                obj = json.loads(line)
                if obj.get("kind") == "baseline":
                    self.baselines[(obj["benchmark"], obj["point"])] = obj
                else:
                    cell = BenchmarkCell.from_json_obj(obj)
                    self.cells[cell.key] = cell

    def _append_line(self, obj: dict) -> None:
        with self._lock:
            with open(self.path, "a") as fh:
                fh.write(json.dumps(obj, sort_keys=True) + "\n")
                fh.flush()
                os.fsync(fh.fileno())

    def add_cell(self, cell: BenchmarkCell) -> None:
        self._append_line(cell.to_json_obj())
        self.cells[cell.key] = cell

    def add_baseline(self, benchmark: str, point, estimate, target=None) -> None:
        obj = {"kind": "baseline", "benchmark": benchmark, "point": point,
               "target": target, **estimate.to_json_obj()}
        self._append_line(obj)
        self.baselines[(benchmark, point)] = obj

    def has(self, key: str) -> bool:
        return key in self.cells

    def compact(self) -> None:
        tmp_fd, tmp_path = tempfile.mkstemp(dir=self.path.parent,
                                            prefix=self.path.name)
        with os.fdopen(tmp_fd, "w") as fh:
            for obj in self.baselines.values():
                fh.write(json.dumps(obj, sort_keys=True) + "\n")
            for cell in self.cells.values():
                fh.write(json.dumps(cell.to_json_obj(), sort_keys=True) + "\n")
        os.replace(tmp_path, self.path)


def suite_for(benchmark: str, params: BenchmarkParams, suite_seed: int
              ) -> List[SectorGraph]:
    """Ten-sector suite for a parameter point. All benchmarks with the same
    route/intersection targets share sectors (only sector complexity sweeps
    its own)."""
    return sectors.generate_suite(
        [suite_seed, params.n_routes, params.n_intersections],
        N_SECTORS, params.n_routes, params.n_intersections)


def _evaluate(scenario: Scenario, g: SectorGraph, params: BenchmarkParams
              ) -> Tuple[int, bool, int]:
    events = detect_interactions(scenario, g)
    pairs = len(unique_pairs(events))
    report = validate_scenario(scenario, g, params)
    return pairs, report.ok, (len(report.violations)
                              + len(report.spawn_grace_violations))


def run_cell(model_cfg: client.ProviderConfig, g: SectorGraph,
             params: BenchmarkParams, sector_index: int, transport
             ) -> BenchmarkCell:
    prompt = prompting.build_benchmark_prompt(g, params)
    phash = client.prompt_hash([{"role": "user", "content": prompt}])
    base = dict(benchmark=params.benchmark, model=model_cfg.model,
                point=params.point, sector_index=sector_index,
                prompt_hash=phash, target_pairs=params.target_pairs)
    try:
        scenario, history = client.complete_with_escalation(
            prompt, model_cfg, transport=transport)
    except client.BudgetExhausted as exc:
        return BenchmarkCell(outcome="failed", error="budget_exhausted",
                             attempts=len(exc.history),
                             completion_tokens=sum(r.completion_tokens
                                                   for r in exc.history),
                             cost=client.history_cost(exc.history), **base)
    except (client.TransportError, client.AuthError,
            client.MockFixtureMissing) as exc:
        return BenchmarkCell(outcome="failed", error=str(exc), **base)
    pairs, valid, violations = _evaluate(scenario, g, params)
    return BenchmarkCell(outcome="ok", pair_count=pairs, valid=valid,
                         violation_count=violations,
                         completion_tokens=sum(r.completion_tokens
                                               for r in history),
                         cost=client.history_cost(history),
                         attempts=len(history), **base)


def run_benchmark(benchmarks: Sequence[str],
                  models: Sequence[client.ProviderConfig],
                  suite_seed: int, store: ResultStore,
                  max_inflight: int = 4,
                  baseline_samples: int = BASELINE_SAMPLES,
                  baseline_seed: int = 0,
                  transport_factory=None) -> Dict[str, int]:
    """Run every (model, parameter point, sector) cell not already stored.

    Per-cell failures are recorded, never raised. Returns counters
    {"run": n, "skipped": m}.
    """
    transport_factory = transport_factory or client.make_transport
    transports = {m.model: transport_factory(m) for m in models}
    counters = {"run": 0, "skipped": 0}
    jobs = []
    for bench in benchmarks:
        for params in GRIDS[bench]:
            suite = suite_for(bench, params, suite_seed)
            if (bench, params.point) not in store.baselines:
                if bench == "controllability":
                    est = baseline.estimate_madip_rand(
                        suite, params.N, params.T, params.target_pairs,
                        samples=baseline_samples, seed=baseline_seed)
                else:
                    est = baseline.estimate_muip_rand(
                        suite, params.N, params.T,
                        samples=baseline_samples, seed=baseline_seed)
                store.add_baseline(bench, params.point, est,
                                   target=params.target_pairs)
            for model_cfg in models:
                for idx, g in enumerate(suite):
                    prompt = prompting.build_benchmark_prompt(g, params)
                    phash = client.prompt_hash(
                        [{"role": "user", "content": prompt}])
                    key = cell_key(bench, model_cfg.model, params.point,
                                   idx, phash)
                    if store.has(key):
                        counters["skipped"] += 1
                        continue
                    jobs.append((model_cfg, g, params, idx))
    with ThreadPoolExecutor(max_workers=max(1, max_inflight)) as pool:
        futures = [pool.submit(run_cell, m, g, p, i, transports[m.model])
                   for m, g, p, i in jobs]
        for fut in futures:
            store.add_cell(fut.result())
            counters["run"] += 1
    return counters


# -- feedback refinement -----------------------------------------------------

@dataclass
class RefinementRound:
    pair_count: int
    valid: bool
    violation_count: int
    scenario: Optional[Scenario] = None


@dataclass
class RefinementTrace:
    rounds: List[RefinementRound] = field(default_factory=list)
    status: str = "unresolved"   # resolved | unresolved | failed

    @property
    def pair_counts(self) -> List[int]:
        return [r.pair_count for r in self.rounds]


def _meets_requirement(pairs: int, valid: bool, params: BenchmarkParams) -> bool:
    target = params.target_pairs if params.benchmark == "controllability" else 0
    return pairs == target and valid


def run_refinement(model_cfg: client.ProviderConfig, g: SectorGraph,
                   params: BenchmarkParams, max_rounds: int,
                   transport=None) -> RefinementTrace:
    """Generate, verify, and re-prompt with concrete violation feedback until
    the requirement holds or max_rounds corrective rounds are spent."""
    if max_rounds < 1:
        raise ValueError("max_rounds must be >= 1")
    transport = transport or client.make_transport(model_cfg)
    prompt = prompting.build_benchmark_prompt(g, params)
    messages = [{"role": "user", "content": prompt}]
    requirement = ("the scenario must contain exactly "
                   f"{params.target_pairs} unique interacting pairs"
                   if params.benchmark == "controllability"
                   else "no pair of aircraft may interact at any step")
    trace = RefinementTrace()
    for round_idx in range(max_rounds + 1):
        try:
            scenario, history = client.complete_with_escalation(
                messages, model_cfg, transport=transport)
        except (client.BudgetExhausted, client.TransportError,
                client.MockFixtureMissing) as exc:
            trace.status = "failed"
            return trace
        events = detect_interactions(scenario, g)
        pairs = len(unique_pairs(events))
        report = validate_scenario(scenario, g, params)
        trace.rounds.append(RefinementRound(
            pair_count=pairs, valid=report.ok,
            violation_count=len(report.violations)
            + len(report.spawn_grace_violations),
            scenario=scenario))
        if _meets_requirement(pairs, report.ok, params):
            trace.status = "resolved"
            return trace
        if round_idx == max_rounds:
            break
        offending = events if params.benchmark != "controllability" else []
        feedback = prompting.build_feedback(
            offending, report, requirement, attempt=round_idx + 1)
        messages = messages + [
            {"role": "assistant", "content": history[-1].text},
            {"role": "user", "content": feedback}]
    trace.status = "unresolved"
    return trace


# -- reporting ---------------------------------------------------------------

def report(store: ResultStore, out_dir) -> List[Path]:
    """Emit table_<benchmark>.csv, skills.csv, pareto.csv and the raw
    controllability points from a result store."""
    if not store.cells and not store.baselines:
        raise EmptyStore("store holds no results")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: List[Path] = []

    models = sorted({c.model for c in store.cells.values()})
    axis_skill: Dict[str, Dict[str, float]] = {m: {} for m in models}
    costs: Dict[str, Optional[float]] = {m: None for m in models}

    for bench, grid in GRIDS.items():
        points = [p.point for p in grid]
        random_row = []
        for p in points:
            b = store.baselines.get((bench, p))
            random_row.append(b["mean"] if b else float("nan"))
        model_rows: Dict[str, List[Optional[float]]] = {}
        for model in models:
            row: List[Optional[float]] = []
            for params in grid:
                cells = [c for c in store.cells.values()
                         if c.benchmark == bench and c.model == model
                         and c.point == params.point and c.outcome == "ok"]
                if not cells:
                    row.append(None)
                    continue
                counts = [c.pair_count for c in cells]
                if bench == "controllability":
                    row.append(metrics.madip(counts, params.target_pairs))
                else:
                    row.append(metrics.muip(counts))
                total_cost = sum(c.cost for c in cells if c.cost is not None)
                if any(c.cost is not None for c in cells):
                    costs[model] = (costs[model] or 0.0) + total_cost
            if any(v is not None for v in row):
                model_rows[model] = row
                pairs = [(v, r) for v, r in zip(row, random_row)
                         if v is not None and r == r and r > 0]
                if pairs:
                    axis_skill[model][bench] = metrics.mean_skill(pairs)
        path = out_dir / f"table_{bench}.csv"
        metrics.write_benchmark_table(path, points, random_row, model_rows)
        written.append(path)

    scores = []
    for model in models:
        sk = axis_skill[model]
        scores.append(metrics.SkillScores(
            model=model,
            mu1=sk.get("traffic_volume", 0.0),
            mu2=sk.get("scenario_length", 0.0),
            mu3=sk.get("sector_complexity", 0.0),
            mu4=sk.get("controllability", 0.0),
            cost_usd_per_mtok=_model_price(store, model)))
    skills_path = out_dir / "skills.csv"
    metrics.write_skills_csv(skills_path, scores)
    written.append(skills_path)

    pareto_path = out_dir / "pareto.csv"
    metrics.write_pareto_csv(pareto_path, scores)
    written.append(pareto_path)

    points_path = out_dir / "controllability_points.csv"
    with open(points_path, "w", newline="") as fh:
        fh.write("model,target,pair_count\n")
        rows = sorted(
            (c for c in store.cells.values()
             if c.benchmark == "controllability" and c.outcome == "ok"),
            key=lambda c: (c.model, c.target_pairs, c.sector_index))
        for c in rows:
            fh.write(f"{c.model},{c.target_pairs},{c.pair_count}\n")
    written.append(points_path)
    return written


def _model_price(store: ResultStore, model: str) -> Optional[float]:
    # price metadata rides on cells via cost/completion_tokens; prefer an
    # explicit price when all cells agree
    tokens = 0
    cost = 0.0
    seen = False
    for c in store.cells.values():
        if c.model == model and c.cost is not None and c.completion_tokens:
            tokens += c.completion_tokens
            cost += c.cost
            seen = True
    if not seen or tokens == 0:
        return None
    return cost / tokens * 1e6


def load_model_configs(path) -> List[client.ProviderConfig]:
    obj = json.loads(Path(path).read_text())
    return [client.ProviderConfig.from_json_obj(m) for m in obj["models"]]
