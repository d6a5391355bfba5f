"""The pre-copy migration model: rounds, stop conditions, and limits.

Round 0 copies all VM memory; each later round re-copies what was dirtied
during the previous one. The loop stops when pending dirty pages fall under
a threshold, when the round cap is hit, or when cumulative transfer exceeds
a multiple of the VM memory; the remainder moves during stop-and-copy.
"""

from cyclemig import MigrationParams, StepRate, bounds, simulate_precopy, synthesize, PhaseSpec

params = MigrationParams(v_mem=1024, bandwidth=128)
lo, up_mig, up_down = bounds(params)
print(f"1024 MB over 128 MB/s: {lo:.1f} s <= t_mig <= {up_mig:.1f} s")

# ---------------------------------------------------------------------------
# An idle VM hits the lower limit: one full copy plus the activation cost.

idle = simulate_precopy(params, lambda t: 0.0)
print(f"\nidle VM:   t_mig {idle.t_mig:6.2f} s, rounds {idle.rounds}, "
      f"moved {idle.transferred:7.1f} MB ({idle.stop_reason})")

# ---------------------------------------------------------------------------
# Dirty-rate sweep: round volumes decay geometrically while the dirty volume
# rate stays under the link rate, then the transfer cap takes over.

for rate in (1000, 2560, 10000, 40000):
    out = simulate_precopy(params, lambda t, r=rate: float(r))
    print(f"{rate:6d} pages/s: t_mig {out.t_mig:7.2f} s, t_down {out.t_down:5.2f} s, "
          f"rounds {out.rounds:2d}, moved {out.transferred:7.1f} MB ({out.stop_reason})")

# ---------------------------------------------------------------------------
# Trace-driven rates: migrating during a memory-hot phase costs several
# extra rounds; the same VM migrated in its CPU phase converges immediately.

series = synthesize(
    [PhaseSpec("MEM", 300), PhaseSpec("CPU", 300)], repetitions=4, interval=15, seed=5
)
rate = StepRate(series)
hot = simulate_precopy(params, rate, start_time=0.0)      # MEM phase
cool = simulate_precopy(params, rate, start_time=300.0)   # CPU phase
print(f"\nstart in MEM phase: t_mig {hot.t_mig:6.2f} s, moved {hot.transferred:7.1f} MB")
print(f"start in CPU phase: t_mig {cool.t_mig:6.2f} s, moved {cool.transferred:7.1f} MB")
print(f"deferring the migration saves "
      f"{100 * (1 - cool.transferred / hot.transferred):.0f}% of the traffic")
