"""Compute-side memory hierarchy: set-associative LLC (line granularity) and
the local-memory page cache (page granularity), plus the fixed-latency MC
service model.

The LLC and the local page cache are non-inclusive and independently managed;
sub-blocks fill the LLC and pages fill local memory. Replacement is LRU at
both levels.
"""

from __future__ import annotations

from collections import OrderedDict
from typing import NamedTuple, Optional


class HierarchyError(RuntimeError):
    """Internal-consistency error in cache bookkeeping (signals a policy bug)."""


class Victim(NamedTuple):
    key: object   # (page_id, line_in_page) for the LLC, page_id for local memory
    dirty: bool


class Llc:
    """Set-associative LRU cache keyed by (page_id, line_in_page)."""

    def __init__(self, capacity_lines: int, associativity: int, lines_per_page: int):
        if capacity_lines % associativity != 0:
            raise HierarchyError("associativity must divide capacity")
        self.associativity = associativity
        self.num_sets = capacity_lines // associativity
        self.lines_per_page = lines_per_page
        # per set: key -> dirty, ordered least- to most-recently used
        self._sets = [OrderedDict() for _ in range(self.num_sets)]

    def _set_for(self, page_id: int, line_in_page: int) -> OrderedDict:
        return self._sets[(page_id * self.lines_per_page + line_in_page) % self.num_sets]

    def access(self, page_id: int, line_in_page: int, is_write: bool) -> bool:
        """Probe the cache; on hit, touch to most-recent and update dirtiness."""
        s = self._set_for(page_id, line_in_page)
        key = (page_id, line_in_page)
        if key not in s:
            return False
        s[key] |= is_write
        s.move_to_end(key)
        return True

    def fill(self, page_id: int, line_in_page: int, dirty: bool) -> Optional[Victim]:
        """Insert a line as most-recent, evicting the set's LRU entry if full."""
        s = self._set_for(page_id, line_in_page)
        key = (page_id, line_in_page)
        if key in s:
            s[key] |= dirty
            s.move_to_end(key)
            return None
        victim = None
        if len(s) >= self.associativity:
            vkey, vdirty = s.popitem(last=False)
            victim = Victim(vkey, vdirty)
        s[key] = dirty
        return victim


class LocalPageCache:
    """LRU cache of whole pages; capacity derives from local_mem_fraction."""

    def __init__(self, capacity_pages: int):
        if capacity_pages < 1:
            raise HierarchyError("capacity_pages must be >= 1")
        self.capacity_pages = capacity_pages
        self._pages = OrderedDict()   # page_id -> dirty

    def __len__(self):
        return len(self._pages)

    def lookup(self, page_id: int, touch: bool = True) -> bool:
        if page_id not in self._pages:
            return False
        if touch:
            self._pages.move_to_end(page_id)
        return True

    def mark_dirty(self, page_id: int) -> None:
        if page_id not in self._pages:
            raise HierarchyError(f"mark_dirty on non-resident page {page_id}")
        self._pages[page_id] = True

    def insert(self, page_id: int, dirty: bool = False) -> Optional[Victim]:
        if page_id in self._pages:
            raise HierarchyError(f"duplicate insert of resident page {page_id}")
        victim = None
        if len(self._pages) >= self.capacity_pages:
            vkey, vdirty = self._pages.popitem(last=False)
            victim = Victim(vkey, vdirty)
        self._pages[page_id] = dirty
        return victim


def mc_service_time(kind: str, cfg) -> float:
    """Fixed-latency MC model: every request kind costs the DRAM latency."""
    return cfg.mc_dram_latency_ns
