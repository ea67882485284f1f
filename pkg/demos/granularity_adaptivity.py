"""Show how page compressibility shifts the adaptive granularity decision.

Compressible pages drain the inflight page buffer faster, so its utilization
stays lower and the selector keeps choosing page-bearing decisions; with
incompressible pages the buffer backs up and the selector falls back to
line-only movement.
"""

from dmsim import SimConfig, WorkloadParams, gen_synthetic_trace, run_simulation

params = WorkloadParams(num_accesses=20_000, spatial_locality=0.2,
                        footprint_pages=256)
trace = gen_synthetic_trace(params, seed=7)
cfg = SimConfig(scheme="daemon", footprint_pages=256, net_bandwidth_factor=8,
                max_outstanding_per_core=4)

print(f"{'ratio':>6}{'line_only':>11}{'page_only':>11}{'both':>7}"
      f"{'elapsed (us)':>14}")
for ratio in (1.0, 2.0, 4.0):
    st = run_simulation(cfg, [trace], {p: ratio for p in range(256)})
    d = st.decisions
    print(f"{ratio:>6.1f}{d['line_only']:>11}{d['page_only']:>11}"
          f"{d['both']:>7}{st.elapsed_ns / 1000:>14.1f}")
