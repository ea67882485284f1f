"""Synthetic access-trace generation, trace file I/O, and page compressibility.

Traces are deterministic for a fixed (params, seed): the generator draws from
Python's `random.Random`, which is the MT19937 Mersenne Twister and produces
the same stream on every platform. Cross-language bit compatibility is not a
goal; the statistical contracts (locality fraction, distribution means) are
the portable ones.
"""

from __future__ import annotations

import math
import random
from bisect import bisect_left
from dataclasses import dataclass
from itertools import accumulate
from typing import NamedTuple


class WorkloadError(ValueError):
    """Raised for invalid workload parameters or malformed trace files."""


class AccessRecord(NamedTuple):
    think_ns: float   # gap since the previous access of the same core
    addr: int         # byte address
    is_write: bool


@dataclass
class AccessTrace:
    footprint_pages: int
    records: list

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)


@dataclass(frozen=True)
class WorkloadParams:
    num_accesses: int = 100_000
    spatial_locality: float = 0.6   # P(next access stays in the current page)
    zipf_alpha: float = 0.8         # skew of cross-page jumps
    write_fraction: float = 0.2
    think_ns_mean: float = 0.0
    footprint_pages: int = 1024

    def validate(self) -> "WorkloadParams":
        if self.num_accesses < 0:
            raise WorkloadError("num_accesses: must be >= 0")
        if not (0.0 <= self.spatial_locality <= 1.0):
            raise WorkloadError("spatial_locality: must be in [0, 1]")
        if self.zipf_alpha < 0:
            raise WorkloadError("zipf_alpha: must be >= 0")
        if not (0.0 <= self.write_fraction <= 1.0):
            raise WorkloadError("write_fraction: must be in [0, 1]")
        if self.think_ns_mean < 0:
            raise WorkloadError("think_ns_mean: must be >= 0")
        if self.footprint_pages < 0:
            raise WorkloadError("footprint_pages: must be >= 0")
        if self.footprint_pages == 0 and self.num_accesses > 0:
            raise WorkloadError("footprint_pages: must be >= 1 when num_accesses > 0")
        return self


class ZipfSampler:
    """Zipf(alpha) over ranks 0..n-1 via precomputed cumulative weights."""

    def __init__(self, n: int, alpha: float):
        weights = [1.0 / (k + 1) ** alpha for k in range(n)]
        self._cum = list(accumulate(weights))
        self._total = self._cum[-1] if self._cum else 0.0

    def sample(self, u: float) -> int:
        # u is uniform in [0, 1)
        return bisect_left(self._cum, u * self._total)


def _geometric(rng: random.Random, mean: float) -> float:
    """Geometric-like non-negative integer draw with the given mean."""
    if mean <= 0:
        return 0.0
    p = 1.0 / (mean + 1.0)
    u = rng.random()
    return float(int(math.log1p(-u) / math.log(1.0 - p)))


def gen_synthetic_trace(params: WorkloadParams, seed: int,
                        line_size_bytes: int = 64,
                        page_size_bytes: int = 4096) -> AccessTrace:
    """Generate a deterministic trace with tunable spatial locality and skew.

    With probability `spatial_locality` the next access is the next sequential
    line of the current page (wrapping to line 0); otherwise it jumps to a
    Zipf-distributed page and a uniform line within it.
    """
    params.validate()
    rng = random.Random(seed)
    lpp = page_size_bytes // line_size_bytes
    zipf = ZipfSampler(params.footprint_pages, params.zipf_alpha)
    page, line = 0, -1
    records = []
    for _ in range(params.num_accesses):
        if rng.random() < params.spatial_locality:
            line = (line + 1) % lpp
        else:
            page = zipf.sample(rng.random())
            line = rng.randrange(lpp)
        addr = page * page_size_bytes + line * line_size_bytes
        is_write = rng.random() < params.write_fraction
        think = _geometric(rng, params.think_ns_mean)
        records.append(AccessRecord(think, addr, is_write))
    return AccessTrace(params.footprint_pages, records)


# ---- trace file format ----
#
# Header lines `key=value` (footprint_pages required; page_size_bytes and
# line_size_bytes optional, defaulting to 4096/64), then CSV rows
# `think_ns,addr,R|W`. Lines starting with `#` are comments.

def save_trace_file(trace: AccessTrace, path, page_size_bytes: int = 4096,
                    line_size_bytes: int = 64) -> None:
    with open(path, "w") as fh:
        fh.write(f"footprint_pages={trace.footprint_pages}\n")
        fh.write(f"page_size_bytes={page_size_bytes}\n")
        fh.write(f"line_size_bytes={line_size_bytes}\n")
        for rec in trace.records:
            rw = "W" if rec.is_write else "R"
            think = int(rec.think_ns) if rec.think_ns == int(rec.think_ns) else rec.think_ns
            fh.write(f"{think},{rec.addr},{rw}\n")


def load_trace_file(path) -> AccessTrace:
    footprint = None
    page_size = 4096
    records = []
    in_body = False
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" in line and "," not in line:
                if in_body:
                    raise WorkloadError(f"line {lineno}: header after data rows")
                key, _, value = line.partition("=")
                key = key.strip()
                try:
                    if key == "footprint_pages":
                        footprint = int(value)
                    elif key == "page_size_bytes":
                        page_size = int(value)
                    elif key == "line_size_bytes":
                        pass  # informational
                    else:
                        raise WorkloadError(f"line {lineno}: unknown header key {key!r}")
                except ValueError as exc:
                    raise WorkloadError(f"line {lineno}: bad header value: {exc}") from exc
                continue
            in_body = True
            if footprint is None:
                raise WorkloadError(f"line {lineno}: data row before footprint_pages header")
            parts = line.split(",")
            if len(parts) != 3:
                raise WorkloadError(f"line {lineno}: expected 'think_ns,addr,R|W'")
            try:
                think = float(parts[0])
                addr = int(parts[1])
            except ValueError as exc:
                raise WorkloadError(f"line {lineno}: malformed number: {exc}") from exc
            if think < 0:
                raise WorkloadError(f"line {lineno}: think_ns must be >= 0")
            rw = parts[2].strip().upper()
            if rw not in ("R", "W"):
                raise WorkloadError(f"line {lineno}: access type must be R or W")
            if addr < 0 or addr >= footprint * page_size:
                raise WorkloadError(f"line {lineno}: address out of footprint")
            records.append(AccessRecord(think, addr, rw == "W"))
    if footprint is None:
        raise WorkloadError("missing required header footprint_pages")
    return AccessTrace(footprint, records)


# ---- compressibility ----
#
# Compressibility is modeled as a per-page ratio >= 1.0 (compressed size =
# ceil(page_size / ratio)); no real compressor runs.

def gen_compressibility_map(footprint_pages: int, distribution: dict,
                            seed: int) -> dict:
    """Assign every page a compressibility ratio.

    `distribution` is {"kind": "constant", "value": c} or
    {"kind": "uniform", "lo": lo, "hi": hi}.
    """
    kind = distribution.get("kind")
    if kind == "constant":
        c = float(distribution["value"])
        if c < 1.0:
            raise WorkloadError("compressibility ratio must be >= 1.0")
        return {p: c for p in range(footprint_pages)}
    if kind == "uniform":
        lo, hi = float(distribution["lo"]), float(distribution["hi"])
        if not (1.0 <= lo <= hi):
            raise WorkloadError("compressibility range requires 1.0 <= lo <= hi")
        rng = random.Random(seed)
        return {p: rng.uniform(lo, hi) for p in range(footprint_pages)}
    raise WorkloadError(f"unknown compressibility distribution kind: {kind!r}")


def save_compressibility_file(cmap: dict, path) -> None:
    with open(path, "w") as fh:
        for page in sorted(cmap):
            fh.write(f"{page},{cmap[page]}\n")


def load_compressibility_file(path) -> dict:
    cmap = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise WorkloadError(f"line {lineno}: expected 'page_id,ratio'")
            try:
                page, ratio = int(parts[0]), float(parts[1])
            except ValueError as exc:
                raise WorkloadError(f"line {lineno}: malformed number: {exc}") from exc
            if ratio < 1.0:
                raise WorkloadError(f"line {lineno}: ratio must be >= 1.0")
            cmap[page] = ratio
    return cmap
