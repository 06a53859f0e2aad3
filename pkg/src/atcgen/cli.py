"""Command-line entry point for the whole pipeline.

Exit codes: 0 success, 1 domain error (one machine-parsable line
"error:<slug>:<detail>" on stderr), 2 usage error. File outputs are written
atomically.
"""

from __future__ import annotations

import functools
import json
import sys
from pathlib import Path

import click

from . import baseline, client, encoder, harness, prompting, sectors
from ._util import atomic_write_text
from .core import BenchmarkParams, DomainError, Scenario, SectorGraph
from .rollout import detect_interactions, unique_pairs, validate_scenario

ERROR_SLUGS = {
    encoder.DegenerateRoute: "degenerate-route",
    encoder.NonPlanarizable: "non-planarizable",
    sectors.TargetUnreachable: "target-unreachable",
    client.BudgetExhausted: "budget-exhausted",
    client.TransportError: "transport-error",
    client.AuthError: "auth-error",
    client.NoValidScenario: "no-valid-scenario",
    harness.EmptyStore: "empty-store",
}


def _error_slug(exc: DomainError) -> str:
    for cls, slug in ERROR_SLUGS.items():
        if isinstance(exc, cls):
            return slug
    return "domain-error"


def _detail(exc: DomainError) -> str:
    if isinstance(exc, encoder.DegenerateRoute):
        return exc.route_id
    return str(exc)


def domain_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except DomainError as exc:
            click.echo(f"error:{_error_slug(exc)}:{_detail(exc)}", err=True)
            sys.exit(1)
        except ValueError as exc:
            click.echo(f"error:invalid-params:{exc}", err=True)
            sys.exit(1)
    return wrapper


@click.group()
def main():
    """Air traffic scenario generation, verification and LLM benchmarking."""


@main.command("gen-sectors")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--benchmark", default="traffic_volume", show_default=True)
@click.option("--n-routes", type=int, default=7, show_default=True)
@click.option("--n-intersections", type=int, default=7, show_default=True)
@click.option("--count", type=int, default=10, show_default=True,
              help="Sectors per parameter point.")
@click.option("--grid", default="12x12", show_default=True,
              help="Lattice size WIDTHxHEIGHT.")
@click.option("--out", type=click.Path(file_okay=False), default=".",
              show_default=True)
@domain_errors
def gen_sectors(seed, benchmark, n_routes, n_intersections, count, grid, out):
    """Generate seeded synthetic benchmark sectors as JSON files."""
    width, height = (int(v) for v in grid.lower().split("x"))
    suite = sectors.generate_suite(seed, count, n_routes, n_intersections,
                                   (width, height))
    out_dir = Path(out)
    for i, g in enumerate(suite):
        path = out_dir / f"sector_{benchmark}_{n_intersections}_{i}.json"
        atomic_write_text(path, g.to_json())
        click.echo(str(path))


@main.command()
@click.option("--input", "input_path", type=click.Path(exists=True),
              required=True, help="Continuous sector JSON (fixes + routes).")
@click.option("--out", type=click.Path(dir_okay=False), required=True)
@click.option("--spacing", type=float, default=20.0, show_default=True)
@click.option("--cluster-radius", type=float, default=20.0, show_default=True)
@click.option("--kink-tolerance", type=float, default=15.0, show_default=True)
@domain_errors
def encode(input_path, out, spacing, cluster_radius, kink_tolerance):
    """Encode continuous route polylines into a sector graph."""
    sector = encoder.ContinuousSector.from_json(Path(input_path).read_text())
    cfg = encoder.EncoderConfig(spacing=spacing, cluster_radius=cluster_radius,
                                kink_tolerance=kink_tolerance)
    graph = encoder.encode_sector(sector, cfg)
    atomic_write_text(out, graph.to_json())
    click.echo(f"{out}: {len(graph.nodes)} nodes, "
               f"{encoder.count_intersections(graph)} intersections")


@main.command()
@click.option("--sector", "sector_path", type=click.Path(exists=True),
              required=True)
@click.option("--scenario", "scenario_path", type=click.Path(exists=True),
              required=True)
@click.option("--grace", type=int, default=1, show_default=True)
@click.option("--n", type=int, default=None,
              help="Expected aircraft count to enforce.")
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="Write the report here instead of stdout.")
@domain_errors
def verify(sector_path, scenario_path, grace, n, out):
    """Roll out a scenario and report interactions and rule violations."""
    g = SectorGraph.from_json(Path(sector_path).read_text())
    s = Scenario.from_json(Path(scenario_path).read_text())
    params = None
    if n is not None:
        params = BenchmarkParams("traffic_volume", N=n, T=s.duration)
    events = detect_interactions(s, g)
    report = validate_scenario(s, g, params, grace=grace)
    result = {
        "events": [e.to_json_obj() for e in events],
        "unique_pairs": [list(p) for p in sorted(unique_pairs(events))],
        "validation": report.to_json_obj(),
    }
    text = json.dumps(result, indent=2)
    if out:
        atomic_write_text(out, text + "\n")
    else:
        click.echo(text)


@main.command("baseline")
@click.option("--sectors", "sector_paths", type=click.Path(exists=True),
              multiple=True, required=True)
@click.option("--n", type=int, required=True)
@click.option("--t", type=int, required=True)
@click.option("--target-k", type=int, default=None,
              help="Estimate controllability error against this target.")
@click.option("--samples", type=int, default=500, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@domain_errors
def baseline_cmd(sector_paths, n, t, target_k, samples, seed):
    """Monte-Carlo random-scenario baseline over the given sectors."""
    suite = [SectorGraph.from_json(Path(p).read_text()) for p in sector_paths]
    if target_k is None:
        est = baseline.estimate_muip_rand(suite, n, t, samples, seed)
        params = {"metric": "muip_rand", "N": n, "T": t}
    else:
        est = baseline.estimate_madip_rand(suite, n, t, target_k, samples, seed)
        params = {"metric": "madip_rand", "N": n, "T": t, "target": target_k}
    click.echo(json.dumps({"params": params, **est.to_json_obj()}, indent=2))


@main.command()
@click.option("--benchmark", "benchmarks", multiple=True,
              type=click.Choice(sorted(harness.GRIDS)),
              help="Default: all four benchmarks.")
@click.option("--models", "models_path", type=click.Path(exists=True),
              required=True, help='JSON config {"models": [...]}.')
@click.option("--suite-seed", type=int, default=0, show_default=True)
@click.option("--store", "store_path", type=click.Path(dir_okay=False),
              required=True)
@click.option("--max-inflight", type=int, default=4, show_default=True)
@click.option("--resume/--no-resume", default=True, show_default=True,
              help="--no-resume refuses to reuse an existing store.")
@domain_errors
def bench(benchmarks, models_path, suite_seed, store_path, max_inflight,
          resume):
    """Run benchmark cells against the configured models."""
    if not resume and Path(store_path).exists():
        raise click.UsageError(f"store {store_path} exists; pass --resume "
                               f"or choose a new path")
    models = harness.load_model_configs(models_path)
    store = harness.ResultStore(store_path)
    counters = harness.run_benchmark(
        list(benchmarks) or sorted(harness.GRIDS), models, suite_seed, store,
        max_inflight=max_inflight)
    click.echo(json.dumps(counters))


@main.command()
@click.option("--models", "models_path", type=click.Path(exists=True),
              required=True)
@click.option("--model", "model_name", default=None,
              help="Model id from the config (default: first entry).")
@click.option("--sector", "sector_path", type=click.Path(exists=True),
              required=True)
@click.option("--n", type=int, default=8, show_default=True)
@click.option("--t", type=int, default=12, show_default=True)
@click.option("--target-pairs", type=int, default=None)
@click.option("--rounds", type=int, default=3, show_default=True)
@domain_errors
def refine(models_path, model_name, sector_path, n, t, target_pairs, rounds):
    """Generate with corrective-feedback refinement rounds."""
    models = harness.load_model_configs(models_path)
    cfg = next((m for m in models if m.model == model_name), models[0])
    g = SectorGraph.from_json(Path(sector_path).read_text())
    if target_pairs is None:
        params = BenchmarkParams("traffic_volume", N=n, T=t)
    else:
        params = BenchmarkParams("controllability", N=n, T=t,
                                 target_pairs=target_pairs)
    trace = harness.run_refinement(cfg, g, params, max_rounds=rounds)
    click.echo(json.dumps({"status": trace.status,
                           "pair_counts": trace.pair_counts}))


@main.command()
@click.option("--store", "store_path", type=click.Path(exists=True),
              required=True)
@click.option("--out-dir", type=click.Path(file_okay=False), required=True)
@domain_errors
def report(store_path, out_dir):
    """Emit result tables, skill scores and Pareto data from a store."""
    store = harness.ResultStore(store_path)
    for path in harness.report(store, out_dir):
        click.echo(str(path))


@main.command()
@click.option("--sector", "sector_path", type=click.Path(exists=True),
              required=True)
@click.option("--benchmark", default="traffic_volume", show_default=True,
              type=click.Choice(sorted(harness.GRIDS)))
@click.option("--n", type=int, default=8, show_default=True)
@click.option("--t", type=int, default=12, show_default=True)
@click.option("--target-pairs", type=int, default=None)
@click.option("--spec", "spec_text", default=None,
              help="Free-text specification (overrides --benchmark).")
@click.option("--mode-3d/--mode-2d", default=True, show_default=True)
@click.option("--templates", default=None,
              help="Template directory (or set ATG_TEMPLATES).")
@domain_errors
def prompt(sector_path, benchmark, n, t, target_pairs, spec_text, mode_3d,
           templates):
    """Print the prompt that would be sent for inspection."""
    g = SectorGraph.from_json(Path(sector_path).read_text())
    if spec_text is not None:
        bundle = prompting.build_controllability_prompt(
            g, spec_text, mode_3d=mode_3d, templates=templates)
        for w in bundle.warnings:
            click.echo(f"warning: {w}", err=True)
        click.echo(bundle.text)
    else:
        params = BenchmarkParams(benchmark, N=n, T=t,
                                 target_pairs=target_pairs)
        click.echo(prompting.build_benchmark_prompt(g, params,
                                                    templates=templates))


if __name__ == "__main__":
    main()
