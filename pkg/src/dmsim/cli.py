"""Command-line entry points: `simulate` and `gen-trace`."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import ConfigError
from .experiment import (ExperimentError, load_experiment, load_experiment_doc,
                         run_experiment)
from .workload import (WorkloadError, WorkloadParams, gen_compressibility_map,
                       gen_synthetic_trace, save_compressibility_file,
                       save_trace_file)


def simulate_main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="simulate",
        description="Run a data-movement simulation experiment from a spec file.")
    parser.add_argument("--config", required=True, help="experiment spec / config JSON")
    parser.add_argument("--trace", action="append", default=[],
                        help="trace file workload (repeatable; overrides spec workloads)")
    parser.add_argument("--out", help="output path (overrides spec 'output')")
    parser.add_argument("--format", choices=["csv", "jsonl"], default="csv")
    parser.add_argument("--grant-log", help="write the link grant log CSV here "
                        "(single-cell experiments only)")
    parser.add_argument("--jobs", type=int, default=1,
                        help="number of parallel worker processes")
    args = parser.parse_args(argv)

    try:
        with open(args.config) as fh:
            doc = json.load(fh)
        if args.trace:
            doc = dict(doc)
            doc["workloads"] = [{"name": Path(t).stem, "trace": t}
                                for t in args.trace]
        spec = load_experiment_doc(doc)
        run_experiment(spec, out_path=args.out, fmt=args.format,
                       jobs=args.jobs, grant_log_path=args.grant_log)
    except (ExperimentError, ConfigError, WorkloadError,
            OSError, json.JSONDecodeError) as exc:
        print(f"simulate: error: {exc}", file=sys.stderr)
        return 1
    return 0


def gen_trace_main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="gen-trace",
        description="Generate a synthetic access trace file.")
    parser.add_argument("--params", required=True,
                        help="JSON file of workload parameters")
    parser.add_argument("--seed", type=int, required=True)
    parser.add_argument("--out", required=True, help="trace file to write")
    parser.add_argument("--cmap-out",
                        help="write the compressibility sidecar CSV here "
                        "(requires 'compressibility' in the params file)")
    args = parser.parse_args(argv)

    try:
        with open(args.params) as fh:
            doc = json.load(fh)
        line_size = int(doc.pop("line_size_bytes", 64))
        page_size = int(doc.pop("page_size_bytes", 4096))
        cmap_dist = doc.pop("compressibility", None)
        try:
            params = WorkloadParams(**doc).validate()
        except TypeError as exc:
            raise WorkloadError(f"bad workload params: {exc}") from exc
        trace = gen_synthetic_trace(params, args.seed, line_size, page_size)
        save_trace_file(trace, args.out, page_size, line_size)
        if args.cmap_out:
            if cmap_dist is None:
                raise WorkloadError(
                    "--cmap-out given but params file has no 'compressibility'")
            cmap = gen_compressibility_map(params.footprint_pages, cmap_dist,
                                           args.seed + 7_777)
            save_compressibility_file(cmap, args.cmap_out)
    except (WorkloadError, OSError, json.JSONDecodeError, ValueError) as exc:
        print(f"gen-trace: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(simulate_main())
