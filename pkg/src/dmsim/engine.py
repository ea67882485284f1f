"""Deterministic discrete-event loop driving cores, hierarchy, policy, and
links, plus metric computation.

Events are processed in (time, insertion-sequence) order; the sequence number
makes tie-breaking, and therefore every RunStats field, identical across runs
and host machines. Each simulation owns all of its state and runs on a single
thread of control, so any number of simulations may run in parallel.
"""

from __future__ import annotations

import heapq
import math
from collections import deque
from dataclasses import dataclass, field

from .config import SimConfig, addr_decompose, page_to_mc
from .hierarchy import Llc, LocalPageCache, mc_service_time
from .link import (LINE_REPLY, LINE_REQUEST, PAGE_REPLY, PAGE_REQUEST,
                   PAGE_WRITEBACK, Link, Packet, serialization_ns)
from .policy import Demand, Policy, compress_page_payload
from .workload import AccessTrace


class SimulationError(RuntimeError):
    pass


@dataclass
class CoreStats:
    accesses: int = 0
    completed: int = 0
    total_mem_stall_ns: float = 0.0
    elapsed_ns: float = 0.0   # this core's (job's) own completion time


@dataclass
class RunStats:
    elapsed_ns: float = 0.0
    per_core: list = field(default_factory=list)
    bytes_by_channel: dict = field(default_factory=dict)
    payload_bytes_by_channel: dict = field(default_factory=dict)
    packets_by_kind: dict = field(default_factory=dict)
    llc_hits: int = 0
    llc_misses: int = 0
    local_hits: int = 0
    local_misses: int = 0
    llc_evictions: int = 0
    local_evictions: int = 0
    writebacks: int = 0
    dirty_lines_dropped: int = 0
    decisions: dict = field(default_factory=lambda: {"line_only": 0, "page_only": 0,
                                                     "both": 0})
    occupancy_hist_sub: dict = field(default_factory=dict)
    occupancy_hist_page: dict = field(default_factory=dict)
    grant_log: list = None          # populated only when requested
    per_access: list = None         # per core: list of (issue, completion, served_by)

    @property
    def total_accesses(self) -> int:
        return sum(c.accesses for c in self.per_core)

    @property
    def total_mem_stall_ns(self) -> float:
        return sum(c.total_mem_stall_ns for c in self.per_core)

    @property
    def total_network_bytes(self) -> int:
        return sum(self.bytes_by_channel.values())

    def note_decision(self, decision: str, inflight) -> None:
        self.decisions[decision] += 1
        occ_s, occ_p = len(inflight.sub), len(inflight.page)
        self.occupancy_hist_sub[occ_s] = self.occupancy_hist_sub.get(occ_s, 0) + 1
        self.occupancy_hist_page[occ_p] = self.occupancy_hist_page.get(occ_p, 0) + 1


class _Core:
    __slots__ = ("index", "trace", "idx", "outstanding", "next_ready",
                 "issue_pending", "stats", "completions")

    def __init__(self, index: int, trace: AccessTrace, collect: bool):
        self.index = index
        self.trace = trace.records
        self.idx = 0
        self.outstanding = 0
        self.next_ready = self.trace[0].think_ns if self.trace else 0.0
        self.issue_pending = False
        self.stats = CoreStats()
        self.completions = [] if collect else None


class Simulation:
    """One deterministic run of a configuration over per-core traces."""

    def __init__(self, cfg: SimConfig, traces, cmap=None,
                 collect_per_access: bool = False,
                 collect_grant_log: bool = False):
        cfg.validate()
        if len(traces) != cfg.num_cores:
            raise SimulationError(
                f"expected {cfg.num_cores} traces (one per core), got {len(traces)}")
        limit = cfg.footprint_pages * cfg.page_size_bytes
        for i, tr in enumerate(traces):
            if tr.footprint_pages > cfg.footprint_pages:
                raise SimulationError(
                    f"trace {i} footprint ({tr.footprint_pages} pages) exceeds "
                    f"configured footprint ({cfg.footprint_pages})")
            for rec in tr.records:
                if not (0 <= rec.addr < limit):
                    raise SimulationError(f"trace {i}: address {rec.addr} out of footprint")

        self.cfg = cfg
        self.stats = RunStats()
        if collect_grant_log:
            self.stats.grant_log = []
        self.llc = Llc(cfg.llc_capacity_lines, cfg.llc_associativity, cfg.lines_per_page)
        self.local = (LocalPageCache(cfg.local_capacity_pages)
                      if cfg.scheme != "local" else None)
        self.links = [Link(m, dual_channel=(cfg.scheme == "daemon"
                                            and not cfg.daemon_single_channel),
                           weights=cfg.daemon_weights)
                      for m in range(cfg.num_mcs)]
        self.policy = Policy(cfg, self, cmap)
        self.cmap = cmap
        self.cores = [_Core(i, tr, collect_per_access) for i, tr in enumerate(traces)]
        self._events = []
        self._seq = 0
        self._now = 0.0
        self._stalled = deque()
        self._collect_per_access = collect_per_access

    # ---- event plumbing ----

    def schedule(self, t: float, fn, *args) -> None:
        if t < self._now - 1e-9:
            raise SimulationError(f"event scheduled in the past ({t} < {self._now})")
        heapq.heappush(self._events, (t, self._seq, fn, args))
        self._seq += 1

    def run(self) -> RunStats:
        for core in self.cores:
            self._maybe_schedule_issue(core, 0.0)
        while self._events:
            t, _, fn, args = heapq.heappop(self._events)
            self._now = t
            fn(t, *args)
        for core in self.cores:
            if core.stats.completed != len(core.trace):
                raise SimulationError(
                    f"core {core.index} completed {core.stats.completed} of "
                    f"{len(core.trace)} accesses (simulation wedged)")
        st = self.stats
        st.per_core = [c.stats for c in self.cores]
        st.elapsed_ns = max((c.stats.elapsed_ns for c in self.cores), default=0.0)
        if self._collect_per_access:
            st.per_access = [c.completions for c in self.cores]
        return st

    # ---- core model ----

    def _maybe_schedule_issue(self, core: _Core, now: float) -> None:
        if (core.issue_pending or core.idx >= len(core.trace)
                or core.outstanding >= self.cfg.max_outstanding_per_core):
            return
        core.issue_pending = True
        self.schedule(max(now, core.next_ready), self._core_issue, core)

    def _core_issue(self, now: float, core: _Core) -> None:
        core.issue_pending = False
        rec = core.trace[core.idx]
        core.idx += 1
        core.outstanding += 1
        core.stats.accesses += 1
        if core.idx < len(core.trace):
            core.next_ready = now + core.trace[core.idx].think_ns
        parts = addr_decompose(rec.addr, self.cfg)
        d = Demand(core.index, core.index, now, parts.page_id, parts.line_in_page,
                   rec.is_write)
        self.policy.handle_demand(d, now)
        self._maybe_schedule_issue(core, now)

    def complete_demand(self, now: float, d: Demand, served_by: str) -> None:
        if d.completed:
            return
        d.completed = True
        d.completion_ns = now
        d.served_by = served_by
        core = self.cores[d.core_id]
        core.outstanding -= 1
        core.stats.completed += 1
        core.stats.total_mem_stall_ns += now - d.issue_ns
        core.stats.elapsed_ns = max(core.stats.elapsed_ns, now)
        if core.completions is not None:
            core.completions.append((d.issue_ns, now, served_by))
        if served_by == "local_mem":
            self.fill_llc(d.page_id, d.line_in_page, d.is_write)
        self._maybe_schedule_issue(core, now)

    # ---- hierarchy helpers ----

    def fill_llc(self, page_id: int, line_in_page: int, dirty: bool) -> None:
        victim = self.llc.fill(page_id, line_in_page, dirty)
        if victim is None:
            return
        self.stats.llc_evictions += 1
        if not victim.dirty:
            return
        vpage = victim.key[0]
        if self.local is not None and self.local.lookup(vpage, touch=False):
            self.local.mark_dirty(vpage)
        elif self.local is not None:
            # no page backing the dirty line at the CC: dropped, counted
            self.stats.dirty_lines_dropped += 1

    # ---- backpressure ----

    def stall(self, d: Demand) -> None:
        self._stalled.append(d)

    def retry_stalled(self, now: float) -> None:
        if not self._stalled:
            return
        pending = self._stalled
        self._stalled = deque()
        for d in pending:
            self.policy.handle_demand(d, now, first=False)

    # ---- link mechanics ----

    def send_to_mc(self, pkt: Packet, channel_name: str, now: float) -> None:
        link = self.links[page_to_mc(pkt.page_id, self.cfg.num_mcs)]
        self._enqueue(link, link.to_mc, channel_name, pkt, now)

    def send_to_cc(self, link: Link, pkt: Packet, channel_name: str, now: float) -> None:
        self._enqueue(link, link.to_cc, channel_name, pkt, now)

    def _enqueue(self, link: Link, direction, channel_name: str, pkt: Packet,
                 now: float) -> None:
        direction.enqueue(channel_name, pkt, now)
        self.schedule(max(now, direction.busy_until), self._link_service,
                      link, direction)

    def _link_service(self, now: float, link: Link, direction) -> None:
        if now < direction.busy_until - 1e-9:
            return   # stale kick; a service event at busy_until exists
        cfg = self.cfg
        while True:
            channel, pkt, chunk, last = direction.arbitrate(now, cfg.wire_mtu_bytes)
            if pkt is None:
                return
            ser = serialization_ns(chunk, cfg, pkt.free_ride)
            self._record_grant(now, channel, pkt, chunk, last)
            if last:
                deliver = now + ser + cfg.net_latency_ns
                at_mc = direction is link.to_mc
                self.schedule(deliver, self._deliver, link, pkt, at_mc)
            if ser > 0:
                direction.busy_until = now + ser
                if direction.has_queued():
                    self.schedule(direction.busy_until, self._link_service,
                                  link, direction)
                return

    def _record_grant(self, now: float, channel, pkt: Packet, chunk: int,
                      last: bool) -> None:
        st = self.stats
        st.bytes_by_channel[channel.name] = (
            st.bytes_by_channel.get(channel.name, 0) + chunk)
        if last:
            st.payload_bytes_by_channel[channel.name] = (
                st.payload_bytes_by_channel.get(channel.name, 0) + pkt.payload_bytes)
            st.packets_by_kind[pkt.kind] = st.packets_by_kind.get(pkt.kind, 0) + 1
        if st.grant_log is not None:
            st.grant_log.append((now, channel.name, pkt.kind, chunk))

    def _deliver(self, now: float, link: Link, pkt: Packet, at_mc: bool) -> None:
        if not at_mc:
            self.policy.handle_arrival(pkt, now)
            return
        cfg = self.cfg
        if pkt.kind == LINE_REQUEST:
            reply = Packet(LINE_REPLY, pkt.page_id, pkt.line_in_page,
                           payload_bytes=cfg.line_size_bytes,
                           src=pkt.dst, dst="cc", job_id=pkt.job_id)
            ch = self.policy._channel_for(page_kind=False)
            self.schedule(now + mc_service_time(pkt.kind, cfg),
                          self._mc_send_reply, link, reply, ch)
        elif pkt.kind == PAGE_REQUEST:
            payload, comp_lat, _ = compress_page_payload(
                pkt.page_id, self.cmap, cfg) if self.policy.compression else \
                (cfg.page_size_bytes, 0.0, 0.0)
            reply = Packet(PAGE_REPLY, pkt.page_id, payload_bytes=payload,
                           src=pkt.dst, dst="cc", job_id=pkt.job_id,
                           free_ride=self.policy.free_ride_pages)
            ch = self.policy._channel_for(page_kind=True)
            self.schedule(now + mc_service_time(pkt.kind, cfg) + comp_lat,
                          self._mc_send_reply, link, reply, ch)
        elif pkt.kind == PAGE_WRITEBACK:
            pass  # absorbed by the MC; already counted at emission
        else:
            raise SimulationError(f"unexpected packet kind at MC: {pkt.kind}")

    def _mc_send_reply(self, now: float, link: Link, reply: Packet,
                       channel_name: str) -> None:
        self.send_to_cc(link, reply, channel_name, now)


def run_simulation(cfg: SimConfig, traces, cmap=None,
                   collect_per_access: bool = False,
                   collect_grant_log: bool = False) -> RunStats:
    """Run one simulation to completion; deterministic for fixed inputs."""
    sim = Simulation(cfg, traces, cmap, collect_per_access=collect_per_access,
                     collect_grant_log=collect_grant_log)
    return sim.run()


def slowdown(stats: RunStats, baseline_stats: RunStats) -> float:
    """Elapsed time normalized to a baseline run of the same trace/geometry."""
    if baseline_stats.elapsed_ns == 0:
        if stats.elapsed_ns == 0:
            return 1.0
        raise SimulationError("baseline elapsed time is zero")
    return stats.elapsed_ns / baseline_stats.elapsed_ns


def geomean(ratios) -> float:
    ratios = list(ratios)
    if not ratios:
        raise SimulationError("geomean of empty input")
    if any(r <= 0 for r in ratios):
        raise SimulationError("geomean requires positive ratios")
    return math.exp(sum(math.log(r) for r in ratios) / len(ratios))
