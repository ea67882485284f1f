"""Grouped-bar and sweep charts over simulator result CSVs.

This package only reads the documented CSV schema; it never recomputes any
simulation metric. All it does is normalize a metric column against a
baseline scheme and aggregate with the geometric mean.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


class PlotError(ValueError):
    pass


@dataclass(frozen=True)
class PlotSpec:
    csv_path: str
    metric: str = "elapsed_ns"
    baseline: str = "page"       # scheme every bar is normalized against
    facet: str = None            # optional column; one figure per value
    out_path: str = "plot.png"


def geomean(values):
    values = list(values)
    if not values:
        raise PlotError("geomean of empty input")
    if any(v <= 0 for v in values):
        raise PlotError("geomean requires positive values")
    return math.exp(sum(math.log(v) for v in values) / len(values))


def load_rows(path):
    with open(path) as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise PlotError(f"{path}: no data rows")
    return rows


def _require_columns(rows, columns):
    for col in columns:
        if col is not None and col not in rows[0]:
            raise PlotError(f"missing column {col!r}")


def _facet_groups(rows, facet):
    if facet is None:
        return [(None, rows)]
    values = sorted({r[facet] for r in rows}, key=float)
    return [(v, [r for r in rows if r[facet] == v]) for v in values]


def _out_paths(out_path, suffix):
    """PNG and SVG siblings of the requested output path."""
    base = Path(out_path)
    stem = base.with_suffix("")
    if suffix:
        stem = stem.parent / f"{stem.name}_{suffix}"
    return [stem.with_suffix(".png"), stem.with_suffix(".svg")]


def normalized_table(rows, metric, baseline):
    """(workload, scheme) -> metric / baseline metric, plus a geomean row.

    Rows for the same (workload, scheme) cell (repetitions) are averaged
    before normalizing.
    """
    cells = {}
    for r in rows:
        key = (r["workload"], r["scheme"])
        cells.setdefault(key, []).append(float(r[metric]))
    cells = {k: sum(v) / len(v) for k, v in cells.items()}
    workloads = sorted({w for w, _ in cells})
    schemes = sorted({s for _, s in cells})
    table = {}
    for w in workloads:
        base = cells.get((w, baseline))
        if base is None:
            raise PlotError(f"no baseline scheme {baseline!r} rows for "
                            f"workload {w!r}")
        if base <= 0:
            raise PlotError(f"baseline metric is not positive for workload {w!r}")
        for s in schemes:
            if (w, s) in cells:
                table[(w, s)] = cells[(w, s)] / base
    for s in schemes:
        table[("geomean", s)] = geomean(
            table[(w, s)] for w in workloads if (w, s) in table)
    return workloads + ["geomean"], schemes, table


def render_grouped_bars(spec: PlotSpec):
    """One bar per (workload, scheme), normalized per workload to the
    baseline scheme, with a geomean group appended. Returns
    (written paths, {facet value: (workloads, schemes, table)}).
    """
    rows = load_rows(spec.csv_path)
    _require_columns(rows, ["workload", "scheme", spec.metric, spec.facet])
    written, tables = [], {}
    for facet_value, group in _facet_groups(rows, spec.facet):
        workloads, schemes, table = normalized_table(group, spec.metric,
                                                     spec.baseline)
        tables[facet_value] = (workloads, schemes, table)
        fig, ax = plt.subplots(figsize=(1.2 + 0.5 * len(workloads) * len(schemes), 4))
        width = 0.8 / len(schemes)
        for si, scheme in enumerate(schemes):
            xs = [wi + si * width for wi in range(len(workloads))
                  if (workloads[wi], scheme) in table]
            ys = [table[(w, scheme)] for w in workloads if (w, scheme) in table]
            ax.bar(xs, ys, width=width, label=scheme)
        ax.set_xticks([wi + 0.4 - width / 2 for wi in range(len(workloads))])
        ax.set_xticklabels(workloads, rotation=30, ha="right")
        ax.axhline(1.0, color="gray", lw=0.8, ls="--")
        ax.set_ylabel(f"{spec.metric} (normalized to {spec.baseline})")
        if facet_value is not None:
            ax.set_title(f"{spec.facet} = {facet_value}")
        ax.legend(fontsize=8)
        fig.tight_layout()
        for path in _out_paths(spec.out_path,
                               None if facet_value is None
                               else f"{spec.facet}{facet_value}"):
            fig.savefig(path)
            written.append(str(path))
        plt.close(fig)
    return written, tables


def render_sweep(spec: PlotSpec, x_axis: str):
    """One line per scheme over the swept column; y is the metric normalized
    to the baseline scheme at each x point. Returns (paths, series) where
    series maps scheme -> [(x, y)] for the first facet.
    """
    rows = load_rows(spec.csv_path)
    _require_columns(rows, ["scheme", x_axis, spec.metric, spec.facet])
    written, first_series = [], None
    for facet_value, group in _facet_groups(rows, spec.facet):
        xs = sorted({float(r[x_axis]) for r in group})
        schemes = sorted({r["scheme"] for r in group})
        cells = {}
        for r in group:
            key = (float(r[x_axis]), r["scheme"])
            cells.setdefault(key, []).append(float(r[spec.metric]))
        cells = {k: sum(v) / len(v) for k, v in cells.items()}
        series = {}
        for scheme in schemes:
            pts = []
            for x in xs:
                if (x, scheme) not in cells:
                    continue
                base = cells.get((x, spec.baseline))
                if base is None:
                    raise PlotError(f"no baseline scheme {spec.baseline!r} "
                                    f"rows at {x_axis}={x:g}")
                pts.append((x, cells[(x, scheme)] / base))
            series[scheme] = pts
        if first_series is None:
            first_series = series
        fig, ax = plt.subplots(figsize=(5, 4))
        for scheme in schemes:
            pts = series[scheme]
            ax.plot([p[0] for p in pts], [p[1] for p in pts],
                    marker="o", label=scheme)
        ax.set_xlabel(x_axis)
        ax.set_ylabel(f"{spec.metric} (normalized to {spec.baseline})")
        if facet_value is not None:
            ax.set_title(f"{spec.facet} = {facet_value}")
        ax.legend(fontsize=8)
        fig.tight_layout()
        for path in _out_paths(spec.out_path,
                               None if facet_value is None
                               else f"{spec.facet}{facet_value}"):
            fig.savefig(path)
            written.append(str(path))
        plt.close(fig)
    return written, first_series
