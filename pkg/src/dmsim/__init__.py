"""Trace-driven discrete-event simulator of data movement in disaggregated
systems: compute components with an LLC and a local-memory page cache of
remote memory, network links with bandwidth partitioning, and six data
movement schemes including an adaptive dual-granularity scheme with link
compression.
"""

from .config import (AddressParts, ConfigError, SimConfig, addr_decompose,
                     addr_recompose, config_from_dict, page_to_mc, parse_config)
from .engine import RunStats, SimulationError, geomean, run_simulation, slowdown
from .experiment import (ExperimentError, ExperimentSpec, emit_results,
                         load_experiment, load_experiment_doc, run_experiment)
from .link import transfer_duration
from .policy import (Demand, InflightState, Policy, PolicyError,
                     compress_page_payload, select_granularity)
from .workload import (AccessRecord, AccessTrace, WorkloadError, WorkloadParams,
                       gen_compressibility_map, gen_synthetic_trace,
                       load_compressibility_file, load_trace_file,
                       save_compressibility_file, save_trace_file)

__all__ = [
    "AddressParts", "ConfigError", "SimConfig", "addr_decompose",
    "addr_recompose", "config_from_dict", "page_to_mc", "parse_config",
    "RunStats", "SimulationError", "geomean", "run_simulation", "slowdown",
    "ExperimentError", "ExperimentSpec", "emit_results", "load_experiment",
    "load_experiment_doc", "run_experiment", "transfer_duration",
    "Demand", "InflightState", "Policy", "PolicyError",
    "compress_page_payload", "select_granularity",
    "AccessRecord", "AccessTrace", "WorkloadError", "WorkloadParams",
    "gen_compressibility_map", "gen_synthetic_trace",
    "load_compressibility_file", "load_trace_file",
    "save_compressibility_file", "save_trace_file",
]

__version__ = "0.1.0"
