"""Run all six data-movement schemes on one synthetic workload and print a
comparison table.

Usage: python3 demos/compare_schemes.py [spatial_locality]
"""

import sys

from dmsim import SimConfig, WorkloadParams, gen_synthetic_trace, run_simulation

locality = float(sys.argv[1]) if len(sys.argv) > 1 else 0.4
params = WorkloadParams(num_accesses=6000, spatial_locality=locality,
                        zipf_alpha=0.8, write_fraction=0.2,
                        footprint_pages=256)
trace = gen_synthetic_trace(params, seed=1)
cmap = {p: 2.0 for p in range(256)}

print(f"spatial locality {locality}, 6000 accesses over 256 pages, "
      "bandwidth factor 8\n")
print(f"{'scheme':<16}{'elapsed (us)':>14}{'net KB':>10}{'local hit %':>13}")
baseline = None
for scheme in ("local", "page", "page_free", "cache_line",
               "cache_line_page", "daemon"):
    cfg = SimConfig(scheme=scheme, footprint_pages=256,
                    net_bandwidth_factor=8, max_outstanding_per_core=4)
    st = run_simulation(cfg, [trace], cmap)
    if baseline is None:
        baseline = st.elapsed_ns
    misses = st.local_hits + st.local_misses
    hit_pct = 100.0 * st.local_hits / misses if misses else float("nan")
    print(f"{scheme:<16}{st.elapsed_ns / 1000:>14.1f}"
          f"{st.total_network_bytes / 1024:>10.1f}{hit_pct:>13.1f}"
          f"   ({st.elapsed_ns / baseline:.2f}x local)")
