#!/usr/bin/env python3
"""Render the three result figures from the benchmark CSV outputs.

Usage: python3 plots/make_figures.py <csv dir> <out dir>

Reads only the published CSV contract (skills.csv, pareto.csv,
controllability_points.csv) and writes deterministic SVG + PNG files:
capability bars per model, controllability box plots, and a cost/skill
Pareto scatter with a dotted frontier line. Exits nonzero on any contract
violation (missing columns, out-of-range skill values).
"""

from __future__ import annotations

import csv
import sys
import warnings
from pathlib import Path
from typing import Dict, List, Sequence, Tuple

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "figures"

import matplotlib.pyplot as plt  # noqa: E402

AXIS_LABELS = ["traffic\nvolume", "scenario\nlength", "sector\ncomplexity",
               "controllability"]
MU_COLUMNS = ["mu1", "mu2", "mu3", "mu4"]


class ContractError(Exception):
    """The input CSVs do not satisfy the published column contract."""


def read_csv(path: Path, required: Sequence[str]) -> List[dict]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for col in required:
            if col not in header:
                raise ContractError(f"{path.name}: missing column '{col}'")
        return list(reader)


def save(fig, out_dir: Path, stem: str) -> List[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for ext in ("svg", "png"):
        path = out_dir / f"{stem}.{ext}"
        fig.savefig(path, metadata={"Date": None} if ext == "svg" else None)
        written.append(path)
    plt.close(fig)
    return written


def plot_capabilities(skills_csv: Path, out_dir: Path) -> List[Path]:
    """Grouped bars of the four normalized skills per model."""
    rows = read_csv(skills_csv, ["model"] + MU_COLUMNS)
    if not rows:
        raise ContractError(f"{skills_csv.name}: no data rows")
    rows.sort(key=lambda r: r["model"])
    values: Dict[str, List[float]] = {}
    for r in rows:
        mus = [float(r[c]) for c in MU_COLUMNS]
        for c, v in zip(MU_COLUMNS, mus):
            if not 0.0 <= v <= 1.0:
                raise ContractError(
                    f"{skills_csv.name}: {r['model']} {c}={v} outside [0, 1]")
        values[r["model"]] = mus

    fig, ax = plt.subplots(figsize=(7, 4))
    n_models = len(values)
    width = 0.8 / n_models
    for i, (model, mus) in enumerate(values.items()):
        offsets = [k + (i - (n_models - 1) / 2) * width for k in range(4)]
        ax.bar(offsets, mus, width=width, label=model)
    ax.set_xticks(range(4))
    ax.set_xticklabels(AXIS_LABELS)
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("normalized skill")
    ax.legend(fontsize=8)
    fig.tight_layout()
    return save(fig, out_dir, "capabilities")


def plot_controllability_box(points_csv: Path, out_dir: Path) -> List[Path]:
    """Per-target box plots of generated pair counts, one panel per model.

    Models that hit every target exactly (saturating) are drawn as
    individual points instead of degenerate boxes."""
    rows = read_csv(points_csv, ["model", "target", "pair_count"])
    by_model: Dict[str, Dict[int, List[int]]] = {}
    for r in rows:
        by_model.setdefault(r["model"], {}).setdefault(
            int(r["target"]), []).append(int(r["pair_count"]))
    models = [m for m in sorted(by_model) if by_model[m]]
    for m in sorted(by_model):
        if not by_model[m]:
            warnings.warn(f"model {m}: no controllability points, skipped")
    if not models:
        raise ContractError(f"{points_csv.name}: no data rows")

    fig, axes = plt.subplots(1, len(models), figsize=(4 * len(models), 4),
                             squeeze=False)
    for ax, model in zip(axes[0], models):
        groups = by_model[model]
        targets = sorted(groups)
        saturating = all(c == t for t in targets for c in groups[t])
        if saturating or any(len(groups[t]) == 1 for t in targets):
            for t in targets:
                ax.plot([t] * len(groups[t]), groups[t], "o", color="C0",
                        alpha=0.6)
        else:
            ax.boxplot([groups[t] for t in targets], positions=targets,
                       widths=0.5)
        ax.plot(targets, targets, "--", color="grey", linewidth=1,
                label="requested")
        ax.set_title(model, fontsize=9)
        ax.set_xlabel("requested interacting pairs")
        ax.set_ylabel("generated interacting pairs")
        ax.legend(fontsize=8)
    fig.tight_layout()
    return save(fig, out_dir, "controllability")


def dominance_frontier(points: Sequence[Tuple[float, float]]
                       ) -> List[Tuple[float, float]]:
    """Brute-force non-dominated subset of (cost, skill) points."""
    kept = []
    for p in points:
        if any(q[0] <= p[0] and q[1] >= p[1] and (q[0] < p[0] or q[1] > p[1])
               for q in points):
            continue
        if p not in kept:
            kept.append(p)
    return kept


def plot_pareto(pareto_csv: Path, out_dir: Path) -> List[Path]:
    """Cost/skill scatter (log-scale cost) with a dotted frontier line."""
    rows = read_csv(pareto_csv, ["model", "cost", "skill_sum"])
    if not rows:
        raise ContractError(f"{pareto_csv.name}: no data rows")
    pts = [(float(r["cost"]), float(r["skill_sum"])) for r in rows]
    frontier = sorted(dominance_frontier(pts))

    fig, ax = plt.subplots(figsize=(6, 4))
    for r, (cost, skill) in zip(rows, pts):
        ax.plot(cost, skill, "o")
        ax.annotate(r["model"], (cost, skill), fontsize=7,
                    xytext=(4, 4), textcoords="offset points")
    ax.plot([p[0] for p in frontier], [p[1] for p in frontier], "r:",
            linewidth=1.5, label="Pareto frontier")
    ax.set_xscale("log")
    ax.set_xlabel("cost (USD per million output tokens)")
    ax.set_ylabel("sum of normalized skills")
    ax.set_ylim(0, 4.2)
    ax.legend(fontsize=8)
    fig.tight_layout()
    return save(fig, out_dir, "pareto")


def make_figures(csv_dir: Path, out_dir: Path) -> List[Path]:
    csv_dir = Path(csv_dir)
    written = []
    written += plot_capabilities(csv_dir / "skills.csv", out_dir)
    written += plot_controllability_box(
        csv_dir / "controllability_points.csv", out_dir)
    written += plot_pareto(csv_dir / "pareto.csv", out_dir)
    return written


def main(argv: Sequence[str]) -> int:
    if len(argv) != 2:
        print("usage: make_figures.py <csv dir> <out dir>", file=sys.stderr)
        return 2
    try:
        for path in make_figures(Path(argv[0]), Path(argv[1])):
            print(path)
    except (ContractError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
