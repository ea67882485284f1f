"""Simulation configuration, address geometry, and page placement.

The config is a flat key-value document (JSON). Every field of SimConfig is
addressable by its snake_case name; unknown keys are rejected. A validated
SimConfig is immutable and safe to share across concurrently running
simulations.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, fields, replace  # noqa: F401 (replace is part of the API)
from typing import NamedTuple


class ConfigError(ValueError):
    """Raised for malformed config documents or invariant violations."""


SCHEMES = ("local", "page", "page_free", "cache_line", "cache_line_page", "daemon")

# Accept a few alternate spellings for scheme names.
_SCHEME_ALIASES = {
    "local": "local",
    "page": "page",
    "pagefree": "page_free",
    "page_free": "page_free",
    "cacheline": "cache_line",
    "cache_line": "cache_line",
    "cachelinepage": "cache_line_page",
    "cache_line_page": "cache_line_page",
    "daemon": "daemon",
}

FORCE_DECISIONS = ("auto", "line", "page", "both")
SELECTORS = ("standard", "low_util_both")


def _is_pow2(n: int) -> bool:
    return isinstance(n, int) and n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class SimConfig:
    """Full parameterization of one simulation run."""

    line_size_bytes: int = 64
    page_size_bytes: int = 4096
    footprint_pages: int = 1024
    local_mem_fraction: float = 0.20
    llc_capacity_lines: int = 512
    llc_associativity: int = 8
    num_cores: int = 1
    num_mcs: int = 1
    bus_bandwidth_bytes_per_ns: float = 16.0
    net_bandwidth_factor: float = 4.0
    wire_mtu_bytes: int = 256
    net_latency_ns: float = 100.0
    local_mem_latency_ns: float = 50.0
    llc_hit_latency_ns: float = 10.0
    mc_dram_latency_ns: float = 60.0
    scheme: str = "daemon"
    daemon_weights: tuple = (3, 1)
    daemon_buffer_capacity: tuple = (64, 16)
    daemon_thresholds: tuple = (0.25, 0.75)
    daemon_force_decision: str = "auto"
    daemon_single_channel: bool = False
    daemon_selector: str = "standard"
    critical_line_on_inflight_page: bool = True
    compression_enabled: bool = True
    comp_latency_ns: float = 250.0
    decomp_latency_ns: float = 250.0
    max_outstanding_per_core: int = 4
    seed: int = 1

    # ---- derived geometry ----

    @property
    def lines_per_page(self) -> int:
        return self.page_size_bytes // self.line_size_bytes

    @property
    def net_bandwidth_bytes_per_ns(self) -> float:
        return self.bus_bandwidth_bytes_per_ns / self.net_bandwidth_factor

    @property
    def llc_num_sets(self) -> int:
        return self.llc_capacity_lines // self.llc_associativity

    @property
    def local_capacity_pages(self) -> int:
        return max(1, math.ceil(self.local_mem_fraction * self.footprint_pages))

    # ---- validation ----

    def validate(self) -> "SimConfig":
        def bad(field_name, constraint):
            raise ConfigError(f"{field_name}: {constraint}")

        if not _is_pow2(self.line_size_bytes):
            bad("line_size_bytes", f"{self.line_size_bytes} is not a power of two")
        if not _is_pow2(self.page_size_bytes):
            bad("page_size_bytes", f"{self.page_size_bytes} is not a power of two "
                "/ not divisible by line size")
        if self.page_size_bytes % self.line_size_bytes != 0 or \
                self.page_size_bytes < self.line_size_bytes:
            bad("page_size_bytes", "must be a multiple of line_size_bytes")
        if self.footprint_pages < 1:
            bad("footprint_pages", "must be >= 1")
        if not (0.0 < self.local_mem_fraction <= 1.0):
            bad("local_mem_fraction", "must be in (0, 1]")
        if self.llc_capacity_lines < 1:
            bad("llc_capacity_lines", "must be >= 1")
        if self.llc_associativity < 1:
            bad("llc_associativity", "must be >= 1")
        if self.llc_capacity_lines % self.llc_associativity != 0:
            bad("llc_associativity", "must divide llc_capacity_lines")
        if self.num_cores < 1:
            bad("num_cores", "must be >= 1")
        if self.num_mcs < 1:
            bad("num_mcs", "must be >= 1")
        if self.bus_bandwidth_bytes_per_ns <= 0:
            bad("bus_bandwidth_bytes_per_ns", "must be > 0")
        if self.net_bandwidth_factor < 1:
            bad("net_bandwidth_factor", "must be >= 1 (network never faster than bus)")
        if self.wire_mtu_bytes < 1:
            bad("wire_mtu_bytes", "must be >= 1")
        for name in ("net_latency_ns", "local_mem_latency_ns", "llc_hit_latency_ns",
                     "mc_dram_latency_ns", "comp_latency_ns", "decomp_latency_ns"):
            if getattr(self, name) < 0:
                bad(name, "must be >= 0")
        if self.scheme not in SCHEMES:
            bad("scheme", f"{self.scheme!r} is not one of {SCHEMES}")
        w = self.daemon_weights
        if len(w) != 2 or any((not isinstance(x, int)) or x < 1 for x in w):
            bad("daemon_weights", "must be a pair of positive integers")
        caps = self.daemon_buffer_capacity
        if len(caps) != 2 or any((not isinstance(x, int)) or x < 1 for x in caps):
            bad("daemon_buffer_capacity", "must be a pair of counts >= 1")
        lo, hi = self.daemon_thresholds
        if not (0.0 < lo < hi < 1.0):
            bad("daemon_thresholds", "requires 0 < lo < hi < 1")
        if self.daemon_force_decision not in FORCE_DECISIONS:
            bad("daemon_force_decision", f"must be one of {FORCE_DECISIONS}")
        if self.daemon_selector not in SELECTORS:
            bad("daemon_selector", f"must be one of {SELECTORS}")
        if self.max_outstanding_per_core < 1:
            bad("max_outstanding_per_core", "must be >= 1")
        if not isinstance(self.seed, int):
            bad("seed", "must be an integer")
        return self

    # ---- serialization ----

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            out[f.name] = list(v) if isinstance(v, tuple) else v
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


_TUPLE_FIELDS = {"daemon_weights", "daemon_buffer_capacity", "daemon_thresholds"}
_FIELD_NAMES = {f.name for f in fields(SimConfig)}


def config_from_dict(doc: dict) -> SimConfig:
    """Build and validate a SimConfig from a flat mapping, rejecting unknown keys."""
    if not isinstance(doc, dict):
        raise ConfigError("config document must be a flat key-value mapping")
    kwargs = {}
    for key, value in doc.items():
        if key not in _FIELD_NAMES:
            raise ConfigError(f"unknown key: {key!r}")
        if key in _TUPLE_FIELDS:
            if not isinstance(value, (list, tuple)) or len(value) != 2:
                raise ConfigError(f"{key}: must be a pair")
            value = tuple(value)
        if key == "scheme":
            norm = _SCHEME_ALIASES.get(str(value).lower())
            if norm is None:
                raise ConfigError(f"scheme: {value!r} is not one of {SCHEMES}")
            value = norm
        kwargs[key] = value
    return SimConfig(**kwargs).validate()


def parse_config(text: str) -> SimConfig:
    """Parse a JSON config document, filling defaults for absent keys."""
    try:
        doc = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed config document: {exc}") from exc
    return config_from_dict(doc)


class AddressParts(NamedTuple):
    page_id: int
    line_in_page: int
    offset_in_line: int


def addr_decompose(addr: int, cfg: SimConfig) -> AddressParts:
    """Split a byte address into (page, line-in-page, offset-in-line)."""
    page_id, in_page = divmod(addr, cfg.page_size_bytes)
    line_in_page, offset = divmod(in_page, cfg.line_size_bytes)
    return AddressParts(page_id, line_in_page, offset)


def addr_recompose(parts: AddressParts, cfg: SimConfig) -> int:
    return (parts.page_id * cfg.page_size_bytes
            + parts.line_in_page * cfg.line_size_bytes
            + parts.offset_in_line)


def page_to_mc(page_id: int, num_mcs: int) -> int:
    """Deterministic page-granularity striping across memory components."""
    if num_mcs < 1:
        raise ConfigError("num_mcs: must be >= 1")
    return page_id % num_mcs
