import math
from pathlib import Path

import pytest

from dmsim_plots.cli import main
from dmsim_plots.plots import (PlotError, PlotSpec, geomean, load_rows,
                               normalized_table, render_grouped_bars,
                               render_sweep)

EXAMPLE_CSV = Path(__file__).resolve().parents[1] / "examples" / "example_results.csv"


def write_csv(path, rows, header=("workload", "scheme",
                                  "net_bandwidth_factor", "elapsed_ns")):
    lines = [",".join(header)]
    lines += [",".join(str(v) for v in r) for r in rows]
    path.write_text("\n".join(lines) + "\n")
    return str(path)


def test_geomean_math():
    assert geomean([2.0, 8.0]) == pytest.approx(4.0)
    with pytest.raises(PlotError):
        geomean([])
    with pytest.raises(PlotError):
        geomean([1.0, -1.0])


def test_normalized_table_counts_and_baseline():
    rows = [{"workload": w, "scheme": s, "elapsed_ns": str(v)}
            for (w, s), v in {
                ("a", "page"): 100, ("a", "daemon"): 50,
                ("b", "page"): 200, ("b", "daemon"): 40,
                ("c", "page"): 10, ("c", "daemon"): 10}.items()]
    workloads, schemes, table = normalized_table(rows, "elapsed_ns", "page")
    assert workloads == ["a", "b", "c", "geomean"]
    assert schemes == ["daemon", "page"]
    # 3 workloads x 2 schemes -> 6 bars + 2 geomean bars
    assert len(table) == 8
    assert all(table[(w, "page")] == 1.0 for w in ("a", "b", "c", "geomean"))
    assert table[("geomean", "daemon")] == pytest.approx(
        geomean([0.5, 0.2, 1.0]))


def test_repetitions_average_before_normalizing(tmp_path):
    csv = write_csv(tmp_path / "r.csv",
                    [("a", "page", 2, 100), ("a", "page", 2, 300),
                     ("a", "daemon", 2, 100)])
    _, _, table = normalized_table(load_rows(csv), "elapsed_ns", "page")
    assert table[("a", "daemon")] == pytest.approx(0.5)


def test_missing_baseline_names_workload(tmp_path):
    csv = write_csv(tmp_path / "r.csv",
                    [("a", "page", 2, 100), ("b", "daemon", 2, 50)])
    spec = PlotSpec(csv_path=csv, baseline="page",
                    out_path=str(tmp_path / "o.png"))
    with pytest.raises(PlotError, match="'b'"):
        render_grouped_bars(spec)


def test_missing_metric_column_named(tmp_path):
    csv = write_csv(tmp_path / "r.csv", [("a", "page", 2, 100)])
    spec = PlotSpec(csv_path=csv, metric="nonexistent",
                    out_path=str(tmp_path / "o.png"))
    with pytest.raises(PlotError, match="nonexistent"):
        render_grouped_bars(spec)


def test_example_csv_renders_images(tmp_path):
    spec = PlotSpec(csv_path=str(EXAMPLE_CSV), metric="elapsed_ns",
                    baseline="page", facet="net_bandwidth_factor",
                    out_path=str(tmp_path / "fig.png"))
    written, tables = render_grouped_bars(spec)
    assert len(written) == 4      # two facets x (png, svg)
    for path in written:
        p = Path(path)
        assert p.exists() and p.stat().st_size > 0
    assert {Path(p).suffix for p in written} == {".png", ".svg"}
    # baseline bars are exactly 1.0 in every facet
    for workloads, schemes, table in tables.values():
        assert all(table[(w, "page")] == 1.0 for w in workloads)


def test_plotted_geomean_matches_engine_geomean(tmp_path):
    # the aggregation in the chart is the engine's geomean, to 6 decimals
    from dmsim.engine import geomean as engine_geomean

    spec = PlotSpec(csv_path=str(EXAMPLE_CSV), metric="elapsed_ns",
                    baseline="page", facet="net_bandwidth_factor",
                    out_path=str(tmp_path / "fig.png"))
    _, tables = render_grouped_bars(spec)
    for workloads, schemes, table in tables.values():
        plain = [w for w in workloads if w != "geomean"]
        for s in schemes:
            expected = engine_geomean([table[(w, s)] for w in plain])
            assert round(table[("geomean", s)], 6) == round(expected, 6)


def test_sweep_series_shape(tmp_path):
    csv = write_csv(tmp_path / "r.csv",
                    [("a", "page", f, 100 * f) for f in (2, 4, 8)]
                    + [("a", "daemon", f, 40 * f) for f in (2, 4, 8)])
    spec = PlotSpec(csv_path=csv, baseline="page",
                    out_path=str(tmp_path / "s.png"))
    written, series = render_sweep(spec, "net_bandwidth_factor")
    assert len(written) == 2
    assert set(series) == {"page", "daemon"}
    assert series["daemon"] == [(2.0, 0.4), (4.0, 0.4), (8.0, 0.4)]
    assert series["page"] == [(2.0, 1.0), (4.0, 1.0), (8.0, 1.0)]


def test_sweep_single_point_still_renders(tmp_path):
    csv = write_csv(tmp_path / "r.csv",
                    [("a", "page", 2, 100), ("a", "daemon", 2, 50)])
    spec = PlotSpec(csv_path=csv, baseline="page",
                    out_path=str(tmp_path / "s.png"))
    written, series = render_sweep(spec, "net_bandwidth_factor")
    assert len(written) == 2
    assert series["daemon"] == [(2.0, 0.5)]


def test_sweep_unknown_x_column(tmp_path):
    csv = write_csv(tmp_path / "r.csv", [("a", "page", 2, 100)])
    spec = PlotSpec(csv_path=csv, out_path=str(tmp_path / "s.png"))
    with pytest.raises(PlotError, match="no_such"):
        render_sweep(spec, "no_such")


def test_cli_bars_and_sweep(tmp_path, capsys):
    out = tmp_path / "fig.png"
    assert main(["bars", "--csv", str(EXAMPLE_CSV), "--baseline", "page",
                 "--facet", "net_bandwidth_factor", "--out", str(out)]) == 0
    printed = capsys.readouterr().out.splitlines()
    assert len(printed) == 4 and all(Path(p).exists() for p in printed)

    assert main(["sweep", "--csv", str(EXAMPLE_CSV), "--baseline", "local",
                 "--x", "net_bandwidth_factor",
                 "--out", str(tmp_path / "sw.png")]) == 0

    assert main(["bars", "--csv", str(tmp_path / "missing.csv"),
                 "--out", str(out)]) == 1
    assert "error" in capsys.readouterr().err
