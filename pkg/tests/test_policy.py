import pytest

from dmsim.config import SimConfig
from dmsim.policy import (ATTACHED, BOTH, FULL, ISSUED, LINE_ONLY, PAGE_ONLY,
                          Demand, InflightState, PolicyError,
                          compress_page_payload, select_granularity)

THR = (0.25, 0.75)


def demand(page=0, line=0, write=False):
    return Demand(core_id=0, job_id=0, issue_ns=0.0, page_id=page,
                  line_in_page=line, is_write=write)


# ---- granularity selection ----

def test_selection_table():
    assert select_granularity(0.0, 0.0, THR) == BOTH
    assert select_granularity(0.0, 0.75, THR) == LINE_ONLY
    assert select_granularity(0.0, 1.0, THR) == LINE_ONLY
    assert select_granularity(0.75, 0.0, THR) == PAGE_ONLY
    assert select_granularity(1.0, 0.0, THR) == PAGE_ONLY
    assert select_granularity(0.5, 0.5, THR) == BOTH
    # congested page buffer wins the tie
    assert select_granularity(1.0, 1.0, THR) == LINE_ONLY


def test_selection_boundary_is_inclusive():
    assert select_granularity(0.0, 0.7499, THR) == BOTH
    assert select_granularity(0.75, 0.7499, THR) == PAGE_ONLY


def test_selection_low_util_both_variant():
    v = "low_util_both"
    assert select_granularity(0.1, 0.2, THR, v) == BOTH
    assert select_granularity(0.3, 0.1, THR, v) == LINE_ONLY
    assert select_granularity(0.1, 0.3, THR, v) == LINE_ONLY


# ---- compression model ----

def test_compress_exact_ratios():
    cfg = SimConfig(compression_enabled=True, comp_latency_ns=250.0,
                    decomp_latency_ns=250.0)
    assert compress_page_payload(0, {0: 2.0}, cfg) == (2048, 250.0, 250.0)
    assert compress_page_payload(0, {0: 1.0}, cfg) == (4096, 250.0, 250.0)
    payload, _, _ = compress_page_payload(0, {0: 3.0}, cfg)
    assert payload == 1366   # ceil(4096 / 3)


def test_compress_disabled_is_identity_and_free():
    cfg = SimConfig(compression_enabled=False)
    assert compress_page_payload(0, {0: 4.0}, cfg) == (4096, 0.0, 0.0)


def test_compress_missing_map_defaults_to_incompressible():
    cfg = SimConfig(compression_enabled=True)
    payload, comp, decomp = compress_page_payload(7, None, cfg)
    assert payload == 4096
    assert (comp, decomp) == (250.0, 250.0)


def test_compress_errors():
    cfg = SimConfig(compression_enabled=True)
    with pytest.raises(PolicyError, match="missing"):
        compress_page_payload(9, {0: 2.0}, cfg)
    with pytest.raises(PolicyError, match="below 1.0"):
        compress_page_payload(0, {0: 0.9}, cfg)


# ---- inflight buffers ----

def test_issue_then_coalesce():
    infl = InflightState(sub_cap=2, page_cap=2)
    d1, d2 = demand(0, 3), demand(0, 3)
    assert infl.coalesce_or_issue("line", (0, 3), d1) == ISSUED
    assert infl.coalesce_or_issue("line", (0, 3), d2) == ATTACHED
    assert len(infl.sub) == 1
    assert infl.sub[(0, 3)].waiters == [d1, d2]


def test_full_buffer_reports_full_but_still_coalesces_existing():
    infl = InflightState(sub_cap=1, page_cap=1)
    assert infl.coalesce_or_issue("line", (0, 0), demand(0, 0)) == ISSUED
    assert infl.coalesce_or_issue("line", (1, 0), demand(1, 0)) == FULL
    assert infl.coalesce_or_issue("line", (0, 0), demand(0, 0)) == ATTACHED
    assert infl.attach_if_present("line", (1, 0), demand(1, 0)) is False
    assert infl.attach_if_present("line", (0, 0), demand(0, 0)) is True


def test_utilization_tracks_occupancy():
    infl = InflightState(sub_cap=4, page_cap=2)
    assert (infl.sub_util, infl.page_util) == (0.0, 0.0)
    infl.coalesce_or_issue("line", (0, 0), demand())
    infl.coalesce_or_issue("page", 0, demand())
    assert infl.sub_util == 0.25
    assert infl.page_util == 0.5
    infl.remove_line((0, 0))
    infl.remove_page(0)
    assert (infl.sub_util, infl.page_util) == (0.0, 0.0)


def test_lines_by_page_index_maintained():
    infl = InflightState(sub_cap=8, page_cap=8)
    infl.coalesce_or_issue("line", (3, 0), demand(3, 0))
    infl.coalesce_or_issue("line", (3, 5), demand(3, 5))
    infl.coalesce_or_issue("line", (4, 0), demand(4, 0))
    assert infl.lines_by_page[3] == {(3, 0), (3, 5)}
    infl.remove_line((3, 0))
    assert infl.lines_by_page[3] == {(3, 5)}
    infl.remove_line((3, 5))
    assert 3 not in infl.lines_by_page


def test_orphan_removal_raises():
    infl = InflightState(sub_cap=2, page_cap=2)
    with pytest.raises(PolicyError, match="no inflight entry"):
        infl.remove_line((0, 0))
    with pytest.raises(PolicyError, match="no inflight entry"):
        infl.remove_page(0)


def test_page_and_line_tables_are_independent():
    infl = InflightState(sub_cap=1, page_cap=1)
    assert infl.coalesce_or_issue("page", 0, demand()) == ISSUED
    # the full page buffer does not constrain the line buffer
    assert infl.coalesce_or_issue("line", (0, 0), demand()) == ISSUED
