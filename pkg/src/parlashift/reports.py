"""Report serialization and plot-data emission.

Every plottable result is reduced to named curves of (x, y, ci_low, ci_high)
rows; one delimited file is written per curve. The gender report is the one
kind with its own schema (period, member_pct, speech_char_pct per party).
A tiny self-contained SVG renderer is available for quick visual checks.
"""

from __future__ import annotations

import csv
import re
from pathlib import Path
from typing import Mapping, Sequence

from .evaluate import DriftReport, StabilityReport

PLOT_KINDS = ("stability", "topic", "party", "gender", "vocab_overlap")

SERIES_HEADER = ("x", "y", "ci_low", "ci_high")

Row = tuple[str, float, float, float]


def _slug(name: str) -> str:
    slug = re.sub(r"[^0-9A-Za-zͰ-Ͽ_-]+", "_", name).strip("_")
    return slug or "series"


def stability_series(report: StabilityReport) -> dict[str, list[Row]]:
    rows = [(str(k), m, lo, hi) for k, m, lo, hi in report.rows()]
    return {f"stability_{report.method}": rows}


def drift_series(report: DriftReport, prefix: str) -> dict[str, list[Row]]:
    series: dict[str, list[Row]] = {}
    for entry in report.entries:
        key = f"{prefix}_{entry.word.lstrip('@')}"
        series.setdefault(key, []).append(
            (f"{entry.pair[0]}:{entry.pair[1]}", entry.mean_similarity,
             entry.ci_low, entry.ci_high)
        )
    return series


def gender_series(
    cells: Mapping[tuple[str, str], tuple[float, float]]
) -> dict[str, list[tuple[str, float, float]]]:
    """Per-party rows (period, member_pct, speech_char_pct)."""
    series: dict[str, list[tuple[str, float, float]]] = {}
    for (party, period), (member_pct, speech_pct) in sorted(cells.items()):
        series.setdefault(f"gender_{party}", []).append((period, member_pct, speech_pct))
    return series


def vocab_overlap_series(pairs: Sequence[tuple[str, int]]) -> dict[str, list[Row]]:
    return {"vocab_overlap": [(label, float(size), float(size), float(size))
                              for label, size in pairs]}


def emit_plot_data(report, kind: str, outdir: str | Path) -> list[Path]:
    """Write one delimited series file per curve; returns the paths."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    if kind == "stability":
        reports = report if isinstance(report, (list, tuple)) else [report]
        if not all(isinstance(r, StabilityReport) for r in reports):
            raise ValueError("kind 'stability' expects StabilityReport(s)")
        series: dict[str, list] = {}
        for r in reports:
            series.update(stability_series(r))
        header = SERIES_HEADER
    elif kind in ("topic", "party"):
        if not isinstance(report, DriftReport):
            raise ValueError(f"kind {kind!r} expects a DriftReport")
        series = drift_series(report, kind)
        header = SERIES_HEADER
    elif kind == "gender":
        if not isinstance(report, Mapping):
            raise ValueError("kind 'gender' expects the gender participation mapping")
        series = gender_series(report)
        header = ("period", "member_pct", "speech_char_pct")
    elif kind == "vocab_overlap":
        series = vocab_overlap_series(report)
        header = SERIES_HEADER
    else:
        raise ValueError(f"unknown plot kind {kind!r}; expected one of {PLOT_KINDS}")

    paths = []
    for name, rows in series.items():
        path = outdir / f"{_slug(name)}.csv"
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
        paths.append(path)
    return paths


def render_svg(
    series: Mapping[str, Sequence[Row]],
    path: str | Path,
    title: str = "",
    width: int = 720,
    height: int = 420,
) -> None:
    """Minimal deterministic SVG line chart with confidence bands.

    Every curve must share the same x categories (plotted at equal spacing).
    """
    palette = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")
    margin_l, margin_r, margin_t, margin_b = 60, 20, 30, 60
    plot_w = width - margin_l - margin_r
    plot_h = height - margin_t - margin_b

    names = list(series)
    if not names:
        raise ValueError("nothing to render")
    xs = [row[0] for row in series[names[0]]]
    ys = [v for rows in series.values() for row in rows for v in row[1:]]
    y_min, y_max = min(ys), max(ys)
    if y_max == y_min:
        y_max = y_min + 1.0

    def px(i: int) -> float:
        step = plot_w / max(len(xs) - 1, 1)
        return margin_l + i * step

    def py(v: float) -> float:
        return margin_t + (y_max - v) / (y_max - y_min) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    if title:
        parts.append(
            f'<text x="{width / 2:.1f}" y="18" text-anchor="middle" '
            f'font-family="sans-serif" font-size="13">{title}</text>'
        )
    for j in range(5):
        v = y_min + j * (y_max - y_min) / 4
        y = py(v)
        parts.append(
            f'<line x1="{margin_l}" y1="{y:.1f}" x2="{width - margin_r}" y2="{y:.1f}" '
            f'stroke="#dddddd"/>'
        )
        parts.append(
            f'<text x="{margin_l - 6}" y="{y + 4:.1f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="10">{v:.3g}</text>'
        )
    for i, label in enumerate(xs):
        parts.append(
            f'<text x="{px(i):.1f}" y="{height - margin_b + 16}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="10">{label}</text>'
        )
    for ci, name in enumerate(names):
        rows = series[name]
        color = palette[ci % len(palette)]
        if len(rows) > 1:
            band = [f"{px(i):.1f},{py(r[2]):.1f}" for i, r in enumerate(rows)]
            band += [f"{px(i):.1f},{py(r[3]):.1f}" for i, r in reversed(list(enumerate(rows)))]
            parts.append(
                f'<polygon points="{" ".join(band)}" fill="{color}" opacity="0.15"/>'
            )
            line = " ".join(f"{px(i):.1f},{py(r[1]):.1f}" for i, r in enumerate(rows))
            parts.append(
                f'<polyline points="{line}" fill="none" stroke="{color}" stroke-width="1.5"/>'
            )
        for i, r in enumerate(rows):
            parts.append(
                f'<circle cx="{px(i):.1f}" cy="{py(r[1]):.1f}" r="2.5" fill="{color}"/>'
            )
        parts.append(
            f'<text x="{width - margin_r}" y="{margin_t + 14 * ci + 10}" text-anchor="end" '
            f'font-family="sans-serif" font-size="10" fill="{color}">{name}</text>'
        )
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n", encoding="utf-8")
