import pytest

from dmsim.config import SimConfig
from dmsim.hierarchy import (HierarchyError, Llc, LocalPageCache, Victim,
                             mc_service_time)


def test_llc_miss_then_hit():
    llc = Llc(capacity_lines=4, associativity=2, lines_per_page=64)
    assert llc.access(0, 0, False) is False
    assert llc.fill(0, 0, dirty=False) is None
    assert llc.access(0, 0, False) is True


def test_llc_lru_eviction_within_set():
    llc = Llc(capacity_lines=2, associativity=2, lines_per_page=2)
    # num_sets = 1 here, so every line shares the single set
    llc.fill(0, 0, dirty=False)
    llc.fill(0, 1, dirty=True)
    llc.access(0, 0, False)            # make (0,0) most recent
    victim = llc.fill(1, 0, dirty=False)
    assert victim == Victim((0, 1), True)
    assert llc.access(0, 0, False) is True
    assert llc.access(0, 1, False) is False


def test_llc_write_sets_dirty_and_refill_keeps_it():
    llc = Llc(capacity_lines=1, associativity=1, lines_per_page=64)
    llc.fill(0, 0, dirty=False)
    llc.access(0, 0, is_write=True)
    victim = llc.fill(0, 1, dirty=False)
    assert victim.dirty is True


def test_llc_duplicate_fill_is_touch_not_evict():
    llc = Llc(capacity_lines=2, associativity=2, lines_per_page=2)
    llc.fill(0, 0, dirty=False)
    llc.fill(0, 1, dirty=False)
    assert llc.fill(0, 0, dirty=True) is None      # already resident
    victim = llc.fill(1, 0, dirty=False)
    assert victim == Victim((0, 1), False)         # (0,0) was touched by refill


def test_llc_set_mapping_spreads_lines():
    llc = Llc(capacity_lines=4, associativity=1, lines_per_page=4)
    for line in range(4):
        llc.fill(0, line, dirty=False)
    # four sets, four lines of page 0: no conflicts
    assert all(llc.access(0, line, False) for line in range(4))


def test_local_cache_insert_lookup_evict():
    local = LocalPageCache(capacity_pages=2)
    assert local.insert(10) is None
    assert local.insert(11) is None
    assert local.lookup(10) is True            # touch: 10 becomes most recent
    victim = local.insert(12)
    assert victim == Victim(11, False)
    assert local.lookup(11) is False
    assert len(local) == 2


def test_local_cache_dirty_eviction():
    local = LocalPageCache(capacity_pages=1)
    local.insert(5)
    local.mark_dirty(5)
    assert local.insert(6) == Victim(5, True)


def test_local_cache_misuse_raises():
    local = LocalPageCache(capacity_pages=2)
    local.insert(1)
    with pytest.raises(HierarchyError):
        local.insert(1)
    with pytest.raises(HierarchyError):
        local.mark_dirty(99)


def test_local_capacity_from_fraction():
    cfg = SimConfig(footprint_pages=1024, local_mem_fraction=0.20)
    assert cfg.local_capacity_pages == 205     # ceil(0.2 * 1024)
    tiny = SimConfig(footprint_pages=1, local_mem_fraction=0.01)
    assert tiny.local_capacity_pages == 1      # floor of one page


def test_mc_service_time_is_flat():
    cfg = SimConfig(mc_dram_latency_ns=60.0)
    assert mc_service_time("line_request", cfg) == 60.0
    assert mc_service_time("page_request", cfg) == 60.0
