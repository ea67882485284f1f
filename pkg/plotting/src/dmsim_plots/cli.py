"""`plot` command line tool: `plot bars ...` and `plot sweep ...`."""

from __future__ import annotations

import argparse
import sys

from .plots import PlotError, PlotSpec, render_grouped_bars, render_sweep


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="plot", description="Render charts from simulator result CSVs.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--csv", required=True, help="result CSV path")
        p.add_argument("--metric", default="elapsed_ns")
        p.add_argument("--baseline", default="page",
                       help="scheme to normalize against")
        p.add_argument("--facet", default=None,
                       help="column to facet into separate figures")
        p.add_argument("--out", required=True,
                       help="output image path (PNG; an SVG sibling is "
                       "written too)")

    common(sub.add_parser("bars", help="grouped bars per workload and scheme"))
    sweep = sub.add_parser("sweep", help="one line per scheme over a swept column")
    common(sweep)
    sweep.add_argument("--x", required=True, help="column for the x axis")
    args = parser.parse_args(argv)

    spec = PlotSpec(csv_path=args.csv, metric=args.metric,
                    baseline=args.baseline, facet=args.facet,
                    out_path=args.out)
    try:
        if args.command == "bars":
            written, _ = render_grouped_bars(spec)
        else:
            written, _ = render_sweep(spec, args.x)
    except (PlotError, OSError) as exc:
        print(f"plot: error: {exc}", file=sys.stderr)
        return 1
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
