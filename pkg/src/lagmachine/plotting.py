"""CSV tables and matplotlib figures for the report subcommands.

Figures are written as PNG with the Agg backend and without the software
metadata chunk, so reruns on the same inputs produce identical files.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from lagmachine.compiler import FAMILY_NAMES, EquivalenceReport  # noqa: E402
from lagmachine.control import LawReport  # noqa: E402

PNG_META = {"Software": None}


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    return path


def _save(fig, path) -> Path:
    path = Path(path)
    fig.tight_layout()
    fig.savefig(path, dpi=100, metadata=PNG_META)
    plt.close(fig)
    return path


# -- census --------------------------------------------------------------------


def census_rows(census: Mapping, delta: Mapping) -> tuple[list, list]:
    families = [(name, census["families"][name]) for name in FAMILY_NAMES]
    totals = [(key, d["ours"], d["reference"], d["delta"]) for key, d in delta.items()]
    return families, totals


def write_census(census: Mapping, delta: Mapping, out_dir, figures: bool = True) -> list[Path]:
    out_dir = Path(out_dir)
    families, totals = census_rows(census, delta)
    written = [
        write_csv(out_dir / "census_families.csv", ["family", "rules"], families),
        write_csv(out_dir / "census_totals.csv", ["metric", "ours", "reference", "delta"], totals),
    ]
    if figures:
        written.append(plot_census(families, totals, out_dir / "census.png"))
    return written


def plot_census(families, totals, path) -> Path:
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    names = [f for f, _ in families]
    counts = [c for _, c in families]
    ax1.bar(names, counts, color="tab:blue")
    ax1.set_yscale("log")
    ax1.set_ylabel("rules")
    ax1.set_title("compiled rules per family")
    for x, c in enumerate(counts):
        ax1.annotate(str(c), (x, c), ha="center", va="bottom", fontsize=8)

    metrics = [m for m, *_ in totals]
    xs = range(len(metrics))
    width = 0.38
    ax2.bar([x - width / 2 for x in xs], [t[1] for t in totals], width, label="ours")
    ax2.bar([x + width / 2 for x in xs], [t[2] for t in totals], width, label="reference")
    ax2.set_xticks(list(xs), metrics)
    ax2.set_yscale("log")
    ax2.set_title("census totals")
    ax2.legend()
    return _save(fig, path)


# -- rotation laws -----------------------------------------------------------------


def rotation_rows(report: LawReport) -> list[tuple]:
    return [(r.n, r.law, r.placement, r.expected_iterations, int(r.passed), r.observed) for r in report.records]


def write_rotation(report: LawReport, out_dir, figures: bool = True) -> list[Path]:
    out_dir = Path(out_dir)
    rows = rotation_rows(report)
    written = [
        write_csv(out_dir / "rotation.csv", ["n", "law", "placement", "expected_iterations", "passed", "observed"], rows)
    ]
    if figures:
        written.append(plot_rotation(report, out_dir / "rotation.png"))
    return written


def plot_rotation(report: LawReport, path) -> Path:
    # one point per (law, n) at the canonical placement n - 1
    series: dict[str, dict[int, tuple[int, bool]]] = {}
    for r in report.records:
        if r.placement in (0, r.n - 1):
            series.setdefault(r.law, {})[r.n] = (r.expected_iterations, r.passed)
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for law, pts in series.items():
        ns = sorted(pts)
        ax.plot(ns, [pts[n][0] for n in ns], marker="o", label=law)
        bad = [n for n in ns if not pts[n][1]]
        if bad:
            ax.scatter(bad, [pts[n][0] for n in bad], marker="x", color="red", zorder=3, s=60)
    ax.set_yscale("log")
    ax.set_xlabel("ring length n")
    ax.set_ylabel("iterations")
    ax.set_title("rotation laws (red x marks a failure)")
    ax.legend(fontsize=8)
    return _save(fig, path)


# -- equivalence gaps ----------------------------------------------------------------


def gap_rows(report: EquivalenceReport) -> list[tuple]:
    return [(p.k, p.iteration, p.n, p.case, p.gap, p.expected_gap, int(p.match)) for p in report.points[1:]]


def write_gaps(report: EquivalenceReport, out_dir, figures: bool = True) -> list[Path]:
    out_dir = Path(out_dir)
    rows = gap_rows(report)
    written = [write_csv(out_dir / "gaps.csv", ["step", "iteration", "length", "case", "gap", "expected", "match"], rows)]
    if figures and rows:
        written.append(plot_gaps(rows, out_dir / "gaps.png"))
    return written


def plot_gaps(rows, path) -> Path:
    fig, ax = plt.subplots(figsize=(7, 4.5))
    markers = {"left": "v", "right": "^", "expand": "s"}
    for case, marker in markers.items():
        pts = [r for r in rows if r[3] == case]
        if pts:
            ax.scatter([r[0] for r in pts], [r[4] for r in pts], marker=marker, label=f"{case} (observed)")
    ax.plot([r[0] for r in rows], [r[5] for r in rows], color="gray", lw=0.8, label="closed form")
    ax.set_yscale("log")
    ax.set_xlabel("machine step")
    ax.set_ylabel("Lag iterations")
    ax.set_title("iterations between correspondence points")
    ax.legend(fontsize=8)
    return _save(fig, path)
