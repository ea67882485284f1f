import pytest
from hypothesis import given, strategies as st

from dmsim.config import (AddressParts, ConfigError, SimConfig, addr_decompose,
                          addr_recompose, config_from_dict, page_to_mc,
                          parse_config)


def test_empty_document_gives_defaults():
    cfg = parse_config("")
    assert cfg.line_size_bytes == 64
    assert cfg.page_size_bytes == 4096
    assert cfg.local_mem_fraction == 0.20
    cfg2 = parse_config("{}")
    assert cfg2 == cfg


def test_network_bandwidth_from_factor():
    cfg = parse_config('{"net_bandwidth_factor": 8, "bus_bandwidth_bytes_per_ns": 16}')
    assert cfg.net_bandwidth_bytes_per_ns == 2.0


def test_non_power_of_two_page_rejected():
    with pytest.raises(ConfigError, match="power of two"):
        parse_config('{"page_size_bytes": 100}')


def test_unknown_key_rejected_by_name():
    with pytest.raises(ConfigError, match="bogus_key"):
        parse_config('{"bogus_key": 1}')


def test_invariant_violations_name_the_field():
    with pytest.raises(ConfigError, match="local_mem_fraction"):
        config_from_dict({"local_mem_fraction": 0.0})
    with pytest.raises(ConfigError, match="net_bandwidth_factor"):
        config_from_dict({"net_bandwidth_factor": 0.5})
    with pytest.raises(ConfigError, match="daemon_thresholds"):
        config_from_dict({"daemon_thresholds": [0.8, 0.2]})
    with pytest.raises(ConfigError, match="daemon_weights"):
        config_from_dict({"daemon_weights": [0, 1]})
    with pytest.raises(ConfigError, match="scheme"):
        config_from_dict({"scheme": "teleport"})


def test_scheme_aliases():
    assert config_from_dict({"scheme": "CacheLinePage"}).scheme == "cache_line_page"
    assert config_from_dict({"scheme": "DaeMon"}).scheme == "daemon"


def test_parse_is_idempotent_on_serialized_output():
    cfg = config_from_dict({"net_bandwidth_factor": 8, "scheme": "page"})
    assert parse_config(cfg.to_json()) == cfg


def test_addr_decompose_examples():
    cfg = parse_config("{}")
    assert addr_decompose(0, cfg) == AddressParts(0, 0, 0)
    assert addr_decompose(4160, cfg) == AddressParts(1, 1, 0)
    assert addr_decompose(4095, cfg) == AddressParts(0, 63, 63)


@given(st.integers(min_value=0, max_value=2**40))
def test_addr_round_trip(addr):
    cfg = SimConfig()
    assert addr_recompose(addr_decompose(addr, cfg), cfg) == addr


def test_page_to_mc_examples():
    assert page_to_mc(5, 4) == 1
    assert page_to_mc(123456, 1) == 0
    assert page_to_mc(7, 2) == 1


@given(st.integers(min_value=0, max_value=10**9), st.integers(min_value=1, max_value=64))
def test_page_to_mc_total_and_stable(page, mcs):
    assert 0 <= page_to_mc(page, mcs) < mcs
    assert page_to_mc(page, mcs) == page_to_mc(page, mcs)
