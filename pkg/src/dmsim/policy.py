"""Data-movement schemes over the hierarchy and link.

All six schemes share one policy engine. A scheme is a point in a small
feature space: which granularities a miss requests (line, page, or both,
possibly chosen adaptively from inflight-buffer utilization), whether the
link runs one shared FIFO or two weighted channels, whether page payloads
are compressed, and whether page transfers ride for free. The adaptive
scheme with both techniques enabled is `daemon`; the baselines are fixed
points of the same machinery, which makes the reduction equivalences exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .config import SimConfig, page_to_mc
from .link import (LINE_REPLY, LINE_REQUEST, PAGE_CHANNEL, PAGE_REPLY,
                   PAGE_REQUEST, PAGE_WRITEBACK, SHARED_CHANNEL, SUB_CHANNEL,
                   Packet)

# granularity decisions
LINE_ONLY = "line_only"
PAGE_ONLY = "page_only"
BOTH = "both"

# coalesce_or_issue outcomes
ISSUED = "issued"
ATTACHED = "attached"
FULL = "full"


class PolicyError(RuntimeError):
    """Internal-consistency error in policy state (e.g. an orphan arrival)."""


def select_granularity(sub_util: float, page_util: float, thresholds,
                       variant: str = "standard") -> str:
    """Decide the movement granularity from inflight-buffer utilization.

    Standard table: a congested page buffer throttles pages (line only); a
    congested sub-block buffer yields pages only; low utilization on both
    opens both granularities. The `low_util_both` variant only allows both
    granularities when both utilizations sit below the low threshold.
    """
    lo, hi = thresholds
    if variant == "low_util_both":
        if sub_util <= lo and page_util <= lo:
            return BOTH
        return LINE_ONLY
    if page_util >= hi:
        return LINE_ONLY
    if sub_util >= hi:
        return PAGE_ONLY
    return BOTH


def compress_page_payload(page_id: int, cmap, cfg: SimConfig):
    """Compressed wire size of a page plus the latencies charged at each end.

    Returns (payload_bytes, comp_latency_ns, decomp_latency_ns).
    """
    if not cfg.compression_enabled:
        return cfg.page_size_bytes, 0.0, 0.0
    if cmap is None:
        ratio = 1.0
    else:
        if page_id not in cmap:
            raise PolicyError(f"page {page_id} missing from compressibility map")
        ratio = cmap[page_id]
    if ratio < 1.0:
        raise PolicyError(f"compressibility ratio {ratio} below 1.0")
    payload = math.ceil(cfg.page_size_bytes / ratio)
    return payload, cfg.comp_latency_ns, cfg.decomp_latency_ns


@dataclass(slots=True)
class Demand:
    core_id: int
    job_id: int
    issue_ns: float
    page_id: int
    line_in_page: int
    is_write: bool
    completed: bool = False
    completion_ns: float = -1.0
    served_by: str = ""


@dataclass
class InflightEntry:
    key: object
    waiters: list = field(default_factory=list)


class InflightState:
    """The inflight sub-block buffer and inflight page buffer with waiters.

    At most one entry exists per line key and per page key; concurrent misses
    to the same key coalesce onto the existing entry's waiter list.
    """

    def __init__(self, sub_cap: int, page_cap: int):
        self.sub_cap = sub_cap
        self.page_cap = page_cap
        self.sub = {}            # (page_id, line_in_page) -> InflightEntry
        self.page = {}           # page_id -> InflightEntry
        self.lines_by_page = {}  # page_id -> set of line keys in self.sub

    @property
    def sub_util(self) -> float:
        return len(self.sub) / self.sub_cap

    @property
    def page_util(self) -> float:
        return len(self.page) / self.page_cap

    def coalesce_or_issue(self, granularity: str, key, waiter: Demand) -> str:
        """Attach to an existing entry, or reserve a new one if space allows."""
        if granularity == "line":
            entry = self.sub.get(key)
            if entry is not None:
                entry.waiters.append(waiter)
                return ATTACHED
            if len(self.sub) >= self.sub_cap:
                return FULL
            self.sub[key] = InflightEntry(key, [waiter])
            self.lines_by_page.setdefault(key[0], set()).add(key)
            return ISSUED
        entry = self.page.get(key)
        if entry is not None:
            entry.waiters.append(waiter)
            return ATTACHED
        if len(self.page) >= self.page_cap:
            return FULL
        self.page[key] = InflightEntry(key, [waiter])
        return ISSUED

    def attach_if_present(self, granularity: str, key, waiter: Demand) -> bool:
        table = self.sub if granularity == "line" else self.page
        entry = table.get(key)
        if entry is None:
            return False
        entry.waiters.append(waiter)
        return True

    def remove_line(self, key) -> InflightEntry:
        entry = self.sub.pop(key, None)
        if entry is None:
            raise PolicyError(f"line reply with no inflight entry for {key}")
        keys = self.lines_by_page.get(key[0])
        if keys is not None:
            keys.discard(key)
            if not keys:
                del self.lines_by_page[key[0]]
        return entry

    def remove_page(self, page_id: int) -> InflightEntry:
        entry = self.page.pop(page_id, None)
        if entry is None:
            raise PolicyError(f"page reply with no inflight entry for page {page_id}")
        return entry


class Policy:
    """Sequential state machine mapping demands and arrivals to actions.

    The engine owns time; the policy schedules completions and packets
    through it. One policy instance belongs to exactly one simulation.
    """

    def __init__(self, cfg: SimConfig, sim, cmap=None):
        self.cfg = cfg
        self.sim = sim
        self.cmap = cmap
        self.scheme = cfg.scheme
        self.uses_local = self.scheme in ("page", "page_free", "cache_line_page", "daemon")
        self.dual_channel = self.scheme == "daemon" and not cfg.daemon_single_channel
        self.compression = self.scheme == "daemon" and cfg.compression_enabled
        self.free_ride_pages = self.scheme == "page_free"
        self.inflight = InflightState(*cfg.daemon_buffer_capacity)
        fixed = {"page": PAGE_ONLY, "page_free": PAGE_ONLY,
                 "cache_line": LINE_ONLY, "cache_line_page": BOTH}
        if self.scheme == "daemon":
            forced = cfg.daemon_force_decision
            self._fixed_decision = {"line": LINE_ONLY, "page": PAGE_ONLY,
                                    "both": BOTH}.get(forced)
        else:
            self._fixed_decision = fixed.get(self.scheme)

    # ---- demand path ----

    def handle_demand(self, d: Demand, now: float, first: bool = True) -> None:
        cfg, sim = self.cfg, self.sim
        if first:
            hit = sim.llc.access(d.page_id, d.line_in_page, d.is_write)
            if hit:
                sim.stats.llc_hits += 1
                sim.schedule(now + cfg.llc_hit_latency_ns, sim.complete_demand, d, "llc")
                return
            sim.stats.llc_misses += 1
            t = now + cfg.llc_hit_latency_ns
        else:
            t = now   # retry after backpressure; lookup cost already paid

        if self.scheme == "local":
            # monolithic baseline: everything resides in local memory
            sim.stats.local_hits += 1
            sim.schedule(t + cfg.local_mem_latency_ns, sim.complete_demand, d, "local_mem")
            return

        if self.uses_local:
            if sim.local.lookup(d.page_id, touch=True):
                if first:
                    sim.stats.local_hits += 1
                if d.is_write:
                    sim.local.mark_dirty(d.page_id)
                sim.schedule(t + cfg.local_mem_latency_ns, sim.complete_demand, d,
                             "local_mem")
                return
            if first:
                sim.stats.local_misses += 1

        decision = self._decide()
        self._issue(d, decision, t)

    def _decide(self) -> str:
        if self._fixed_decision is not None:
            if self.scheme == "daemon":
                self.sim.stats.note_decision(self._fixed_decision, self.inflight)
            return self._fixed_decision
        dec = select_granularity(self.inflight.sub_util, self.inflight.page_util,
                                 self.cfg.daemon_thresholds, self.cfg.daemon_selector)
        self.sim.stats.note_decision(dec, self.inflight)
        return dec

    def _issue(self, d: Demand, decision: str, now: float) -> None:
        infl = self.inflight
        want_line = decision in (LINE_ONLY, BOTH)
        want_page = decision in (PAGE_ONLY, BOTH)
        line_key = (d.page_id, d.line_in_page)
        placed = False

        if want_page:
            r = infl.coalesce_or_issue("page", d.page_id, d)
            if r == ISSUED:
                self._send_page_request(d, now)
            if r != FULL:
                placed = True
                # critical-line fetch for a demand landing on an inflight page
                if (r == ATTACHED and not want_line and self.scheme == "daemon"
                        and self.cfg.critical_line_on_inflight_page):
                    # best-effort: skipped silently when the sub buffer is full,
                    # since the page entry already covers this demand
                    r2 = infl.coalesce_or_issue("line", line_key, d)
                    if r2 == ISSUED:
                        self._send_line_request(d, now)

        if want_line:
            r = infl.coalesce_or_issue("line", line_key, d)
            if r == ISSUED:
                self._send_line_request(d, now)
            if r != FULL:
                placed = True

        if placed:
            return
        # every wanted buffer is full: attach to any covering entry for free,
        # otherwise stall until an entry frees (backpressure, no drop)
        if infl.attach_if_present("page", d.page_id, d):
            return
        if infl.attach_if_present("line", line_key, d):
            return
        self.sim.stall(d)

    def _channel_for(self, page_kind: bool) -> str:
        if not self.dual_channel:
            return SHARED_CHANNEL
        return PAGE_CHANNEL if page_kind else SUB_CHANNEL

    def _send_line_request(self, d: Demand, now: float) -> None:
        pkt = Packet(LINE_REQUEST, d.page_id, d.line_in_page, payload_bytes=0,
                     src="cc", dst=f"mc{page_to_mc(d.page_id, self.cfg.num_mcs)}",
                     job_id=d.job_id)
        self.sim.send_to_mc(pkt, self._channel_for(False), now)

    def _send_page_request(self, d: Demand, now: float) -> None:
        pkt = Packet(PAGE_REQUEST, d.page_id, payload_bytes=0,
                     src="cc", dst=f"mc{page_to_mc(d.page_id, self.cfg.num_mcs)}",
                     job_id=d.job_id)
        self.sim.send_to_mc(pkt, self._channel_for(True), now)

    # ---- arrival path (CC side) ----

    def handle_arrival(self, pkt: Packet, now: float) -> None:
        if pkt.kind == LINE_REPLY:
            self._handle_line_reply(pkt, now)
        elif pkt.kind == PAGE_REPLY:
            if pkt.page_id not in self.inflight.page:
                raise PolicyError(f"page reply with no inflight entry for {pkt.page_id}")
            decomp = self.cfg.decomp_latency_ns if self.compression else 0.0
            self.sim.schedule(now + decomp, self._install_page, pkt)
        else:
            raise PolicyError(f"unexpected packet kind at CC: {pkt.kind}")

    def _handle_line_reply(self, pkt: Packet, now: float) -> None:
        sim = self.sim
        key = (pkt.page_id, pkt.line_in_page)
        entry = self.inflight.remove_line(key)
        pending = [w for w in entry.waiters if not w.completed]
        dirty = any(w.is_write for w in pending)
        sim.fill_llc(pkt.page_id, pkt.line_in_page, dirty)
        for w in pending:
            sim.complete_demand(now, w, "line_reply")
        sim.retry_stalled(now)

    def _install_page(self, now: float, pkt: Packet) -> None:
        sim, cfg = self.sim, self.cfg
        entry = self.inflight.remove_page(pkt.page_id)
        victim = sim.local.insert(pkt.page_id, dirty=False)
        sim.stats.local_evictions += victim is not None
        if victim is not None and victim.dirty:
            self._send_writeback(victim.key, now)
        completing = [w for w in entry.waiters if not w.completed]
        # line waiters inside this page that are still pending complete now too
        for line_key in sorted(self.inflight.lines_by_page.get(pkt.page_id, ())):
            sub_entry = self.inflight.sub[line_key]
            completing.extend(w for w in sub_entry.waiters if not w.completed)
        if any(w.is_write for w in completing):
            sim.local.mark_dirty(pkt.page_id)
        filled = set()
        for w in completing:
            if w.line_in_page not in filled:
                sim.fill_llc(pkt.page_id, w.line_in_page, w.is_write)
                filled.add(w.line_in_page)
            sim.complete_demand(now, w, "page_reply")
        sim.retry_stalled(now)

    def _send_writeback(self, page_id: int, now: float) -> None:
        if self.compression:
            payload, _, _ = compress_page_payload(page_id, self.cmap, self.cfg)
        else:
            payload = self.cfg.page_size_bytes
        pkt = Packet(PAGE_WRITEBACK, page_id, payload_bytes=payload,
                     src="cc", dst=f"mc{page_to_mc(page_id, self.cfg.num_mcs)}",
                     free_ride=self.free_ride_pages)
        self.sim.stats.writebacks += 1
        self.sim.send_to_mc(pkt, self._channel_for(True), now)
