"""Experiment runner: scheme x parameter sweeps over a workload suite, with
a stable CSV/JSONL result schema.

An experiment spec is a JSON document. SimConfig fields appear at the top
level by their snake_case names; the sweep itself is described by:

  workloads            list of {"name", "params": {...}} or {"name", "trace": path},
                       each optionally with "cmap": {...} or "cmap_file": path
  schemes              list of scheme names (default: the config's scheme)
  net_bandwidth_factors, num_mcs_list, num_jobs_list   sweep axes
  repetitions          trace seeds are offset per repetition
  normalize            require and emit slowdown vs the local scheme
  output               default output path (CLI --out overrides)

One output row per (workload, scheme, axis point, repetition), sorted by that
key, so reruns and parallel execution produce byte-identical files.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

from .config import SimConfig, config_from_dict, ConfigError, SCHEMES, _SCHEME_ALIASES
from .engine import run_simulation
from .workload import (AccessRecord, AccessTrace, WorkloadParams,
                       gen_compressibility_map, gen_synthetic_trace,
                       load_compressibility_file, load_trace_file)


class ExperimentError(ValueError):
    pass


_EXPERIMENT_KEYS = ("workloads", "schemes", "net_bandwidth_factors",
                    "num_mcs_list", "num_jobs_list", "repetitions",
                    "normalize", "output")


@dataclass(frozen=True)
class WorkloadDef:
    name: str
    params: WorkloadParams = None
    trace_path: str = None
    cmap_dist: tuple = None     # (("kind", ...), ...) frozen dict items
    cmap_path: str = None

    def dist_dict(self):
        return dict(self.cmap_dist) if self.cmap_dist else None


@dataclass(frozen=True)
class ExperimentSpec:
    config: SimConfig
    workloads: tuple
    schemes: tuple
    net_bandwidth_factors: tuple
    num_mcs_list: tuple
    num_jobs_list: tuple
    repetitions: int
    normalize: bool
    output: str = None


def _parse_workload(item, idx) -> WorkloadDef:
    if not isinstance(item, dict) or "name" not in item:
        raise ExperimentError(f"workloads[{idx}]: each workload needs a 'name'")
    known = {"name", "params", "trace", "cmap", "cmap_file"}
    unknown = set(item) - known
    if unknown:
        raise ExperimentError(f"workloads[{idx}]: unknown key {sorted(unknown)[0]!r}")
    has_params = "params" in item
    has_trace = "trace" in item
    if has_params == has_trace:
        raise ExperimentError(
            f"workloads[{idx}]: exactly one of 'params' or 'trace' is required")
    params = None
    if has_params:
        try:
            params = WorkloadParams(**item["params"]).validate()
        except TypeError as exc:
            raise ExperimentError(f"workloads[{idx}]: bad params: {exc}") from exc
    cmap_dist = tuple(sorted(item["cmap"].items())) if "cmap" in item else None
    return WorkloadDef(name=str(item["name"]), params=params,
                       trace_path=item.get("trace"), cmap_dist=cmap_dist,
                       cmap_path=item.get("cmap_file"))


def load_experiment_doc(doc: dict) -> ExperimentSpec:
    if not isinstance(doc, dict):
        raise ExperimentError("experiment spec must be a JSON object")
    cfg_doc = {k: v for k, v in doc.items() if k not in _EXPERIMENT_KEYS}
    try:
        cfg = config_from_dict(cfg_doc)
    except ConfigError as exc:
        raise ExperimentError(str(exc)) from exc

    workloads = tuple(_parse_workload(w, i)
                      for i, w in enumerate(doc.get("workloads", [])))
    schemes = []
    for s in doc.get("schemes", [cfg.scheme]):
        norm = _SCHEME_ALIASES.get(str(s).lower())
        if norm is None:
            raise ExperimentError(f"schemes: {s!r} is not one of {SCHEMES}")
        schemes.append(norm)
    if not schemes:
        raise ExperimentError("at least one scheme is required")
    factors = tuple(doc.get("net_bandwidth_factors", [cfg.net_bandwidth_factor]))
    mcs_list = tuple(doc.get("num_mcs_list", [cfg.num_mcs]))
    jobs_list = tuple(doc.get("num_jobs_list", [1]))
    reps = int(doc.get("repetitions", 1))
    if reps < 1:
        raise ExperimentError("repetitions: must be >= 1")
    normalize = doc.get("normalize")
    if normalize is None:
        normalize = "local" in schemes
    if normalize and "local" not in schemes:
        raise ExperimentError(
            "normalization requires the 'local' scheme in the schemes list")
    return ExperimentSpec(config=cfg, workloads=workloads, schemes=tuple(schemes),
                          net_bandwidth_factors=factors, num_mcs_list=mcs_list,
                          num_jobs_list=jobs_list, repetitions=reps,
                          normalize=bool(normalize), output=doc.get("output"))


def load_experiment(path) -> ExperimentSpec:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ExperimentError(f"{path}: malformed JSON: {exc}") from exc
    return load_experiment_doc(doc)


# ---- cell execution ----

def _trace_seed(cfg: SimConfig, rep: int, w_idx: int, job: int) -> int:
    return cfg.seed + 100_003 * rep + 1_009 * w_idx + job


def _build_inputs(spec: ExperimentSpec, w_idx: int, jobs: int, rep: int):
    """Per-job traces (disjoint page ranges per job), cell footprint, cmap."""
    cfg = spec.config
    wdef = spec.workloads[w_idx]
    if wdef.params is not None:
        per_job_fp = wdef.params.footprint_pages
        base_traces = [gen_synthetic_trace(wdef.params, _trace_seed(cfg, rep, w_idx, j),
                                           cfg.line_size_bytes, cfg.page_size_bytes)
                       for j in range(jobs)]
    else:
        loaded = load_trace_file(wdef.trace_path)
        per_job_fp = loaded.footprint_pages
        base_traces = [loaded] * jobs
    total_fp = per_job_fp * jobs
    traces = []
    for j, tr in enumerate(base_traces):
        if j == 0:
            traces.append(AccessTrace(total_fp, tr.records))
        else:
            off = j * per_job_fp * cfg.page_size_bytes
            traces.append(AccessTrace(total_fp, [
                AccessRecord(r.think_ns, r.addr + off, r.is_write) for r in tr.records]))

    cmap = None
    if wdef.cmap_path is not None:
        base = load_compressibility_file(wdef.cmap_path)
    elif wdef.cmap_dist is not None:
        base = gen_compressibility_map(per_job_fp, wdef.dist_dict(),
                                       _trace_seed(cfg, rep, w_idx, 0) + 7_777)
    else:
        base = None
    if base is not None:
        cmap = {}
        for j in range(jobs):
            for p, ratio in base.items():
                cmap[j * per_job_fp + p] = ratio
    return traces, total_fp, cmap


def run_cell(spec: ExperimentSpec, w_idx: int, scheme: str, factor, num_mcs: int,
             jobs: int, rep: int, collect_grant_log: bool = False):
    cfg = spec.config
    traces, total_fp, cmap = _build_inputs(spec, w_idx, jobs, rep)
    cell_cfg = replace(cfg, scheme=scheme, net_bandwidth_factor=factor,
                       num_mcs=num_mcs, num_cores=jobs, footprint_pages=total_fp)
    stats = run_simulation(cell_cfg, traces, cmap,
                           collect_grant_log=collect_grant_log)
    wname = spec.workloads[w_idx].name
    row = {
        "workload": wname,
        "scheme": scheme,
        "net_bandwidth_factor": factor,
        "num_mcs": num_mcs,
        "num_jobs": jobs,
        "rep": rep,
        "seed": _trace_seed(cfg, rep, w_idx, 0),
        "elapsed_ns": stats.elapsed_ns,
        "total_accesses": stats.total_accesses,
        "total_mem_stall_ns": stats.total_mem_stall_ns,
        "llc_hits": stats.llc_hits,
        "llc_misses": stats.llc_misses,
        "local_hits": stats.local_hits,
        "local_misses": stats.local_misses,
        "llc_evictions": stats.llc_evictions,
        "local_evictions": stats.local_evictions,
        "writebacks": stats.writebacks,
        "dirty_lines_dropped": stats.dirty_lines_dropped,
        "bytes_sub_block": stats.bytes_by_channel.get("sub_block", 0),
        "bytes_page": stats.bytes_by_channel.get("page", 0),
        "bytes_shared": stats.bytes_by_channel.get("shared", 0),
        "payload_bytes_sub_block": stats.payload_bytes_by_channel.get("sub_block", 0),
        "payload_bytes_page": stats.payload_bytes_by_channel.get("page", 0),
        "payload_bytes_shared": stats.payload_bytes_by_channel.get("shared", 0),
        "pkts_line_request": stats.packets_by_kind.get("line_request", 0),
        "pkts_line_reply": stats.packets_by_kind.get("line_reply", 0),
        "pkts_page_request": stats.packets_by_kind.get("page_request", 0),
        "pkts_page_reply": stats.packets_by_kind.get("page_reply", 0),
        "pkts_page_writeback": stats.packets_by_kind.get("page_writeback", 0),
        "decisions_line_only": stats.decisions["line_only"],
        "decisions_page_only": stats.decisions["page_only"],
        "decisions_both": stats.decisions["both"],
        "job_elapsed_mean_ns": (sum(c.elapsed_ns for c in stats.per_core)
                                / len(stats.per_core)) if stats.per_core else 0.0,
        "job_elapsed_max_ns": stats.elapsed_ns,
        "slowdown_vs_local": None,   # filled from the matching local row
    }
    return row, stats


def _run_cell_args(args):
    try:
        row, _ = run_cell(*args)
    except Exception as exc:
        _, w_idx, scheme, factor, mcs, njobs, rep = args
        name = args[0].workloads[w_idx].name
        raise ExperimentError(
            f"cell (workload={name}, scheme={scheme}, factor={factor}, "
            f"num_mcs={mcs}, num_jobs={njobs}, rep={rep}) failed: {exc}") from exc
    return row


COLUMNS = ["workload", "scheme", "net_bandwidth_factor", "num_mcs", "num_jobs",
           "rep", "seed", "elapsed_ns", "total_accesses", "total_mem_stall_ns",
           "llc_hits", "llc_misses", "local_hits", "local_misses",
           "llc_evictions", "local_evictions", "writebacks",
           "dirty_lines_dropped", "bytes_sub_block", "bytes_page",
           "bytes_shared", "payload_bytes_sub_block", "payload_bytes_page",
           "payload_bytes_shared", "pkts_line_request", "pkts_line_reply",
           "pkts_page_request", "pkts_page_reply", "pkts_page_writeback",
           "decisions_line_only", "decisions_page_only", "decisions_both",
           "job_elapsed_mean_ns", "job_elapsed_max_ns", "slowdown_vs_local"]

_NS_COLUMNS = {"elapsed_ns", "total_mem_stall_ns", "job_elapsed_mean_ns",
               "job_elapsed_max_ns"}


def _format_value(col, value):
    if value is None:
        return ""
    if col == "slowdown_vs_local":
        return f"{value:.6f}"
    if col in _NS_COLUMNS:
        return f"{value:.3f}"
    if isinstance(value, float):
        return f"{value:g}"
    return str(value)


def emit_results(rows, fmt, path) -> None:
    """Write result rows atomically; `fmt` is 'csv' or 'jsonl'."""
    if not rows:
        raise ExperimentError("no result rows to emit")
    if fmt not in ("csv", "jsonl"):
        raise ExperimentError(f"unknown output format: {fmt!r}")
    tmp = f"{path}.tmp"
    try:
        with open(tmp, "w") as fh:
            if fmt == "csv":
                fh.write(",".join(COLUMNS) + "\n")
                for row in rows:
                    fh.write(",".join(_format_value(c, row[c]) for c in COLUMNS) + "\n")
            else:
                for row in rows:
                    obj = {}
                    for c in COLUMNS:
                        v = row[c]
                        if c == "slowdown_vs_local" and v is not None:
                            v = round(v, 6)
                        obj[c] = v
                    fh.write(json.dumps(obj) + "\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def run_experiment(spec: ExperimentSpec, out_path=None, fmt: str = "csv",
                   jobs: int = 1, grant_log_path=None):
    """Execute the full cross-product and write the sorted result table."""
    if not spec.workloads:
        raise ExperimentError("experiment spec has no workloads")
    out_path = out_path or spec.output
    if out_path is None:
        raise ExperimentError("no output path (spec 'output' or --out)")

    cells = []
    for w_idx in range(len(spec.workloads)):
        for scheme in spec.schemes:
            for factor in spec.net_bandwidth_factors:
                for mcs in spec.num_mcs_list:
                    for njobs in spec.num_jobs_list:
                        for rep in range(spec.repetitions):
                            cells.append((spec, w_idx, scheme, factor, mcs,
                                          njobs, rep))
    if grant_log_path is not None and len(cells) != 1:
        raise ExperimentError("--grant-log requires a single-cell experiment")

    rows = []
    try:
        if grant_log_path is not None:
            row, stats = run_cell(*cells[0], collect_grant_log=True)
            rows.append(row)
            with open(grant_log_path, "w") as fh:
                fh.write("time_ns,channel,kind,bytes\n")
                for t, channel, kind, nbytes in stats.grant_log:
                    fh.write(f"{t:.3f},{channel},{kind},{nbytes}\n")
        elif jobs > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                rows = list(pool.map(_run_cell_args, cells))
        else:
            rows = [_run_cell_args(c) for c in cells]
    except Exception as exc:
        raise ExperimentError(f"simulation failed: {exc}") from exc

    rows.sort(key=lambda r: (r["workload"], r["scheme"],
                             float(r["net_bandwidth_factor"]), r["num_mcs"],
                             r["num_jobs"], r["rep"]))
    if spec.normalize:
        local = {}
        for r in rows:
            if r["scheme"] == "local":
                key = (r["workload"], r["net_bandwidth_factor"], r["num_mcs"],
                       r["num_jobs"], r["rep"])
                local[key] = r["elapsed_ns"]
        for r in rows:
            key = (r["workload"], r["net_bandwidth_factor"], r["num_mcs"],
                   r["num_jobs"], r["rep"])
            base = local.get(key)
            if base is None:
                raise ExperimentError(
                    f"missing local baseline row for {key} (required for "
                    "normalization)")
            r["slowdown_vs_local"] = (r["elapsed_ns"] / base) if base else 1.0
    emit_results(rows, fmt, out_path)
    return rows
