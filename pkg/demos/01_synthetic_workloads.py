"""Building resource-usage traces with planted phase cycles.

A VM workload is a time series of load samples: cpu %, mem %, dirty pages/s,
and I/O ops/s, one sample per characterization interval. This script builds
a cyclic workload out of phases, shows the CSV wire format, and resamples an
irregular trace onto the sampling grid.
"""

import numpy as np

from cyclemig import LoadSample, LoadSeries, PhaseSpec, parse_trace, resample, synthesize, write_trace

# ---------------------------------------------------------------------------
# A workload that alternates memory-hot and processor-hot phases. MEM phases
# dirty ~5000 pages/s (hostile to pre-copy migration); CPU phases barely
# touch memory.

phases = [
    PhaseSpec("MEM", duration=300),
    PhaseSpec("IDLE", duration=300),
    PhaseSpec("CPU", duration=300),
]
series = synthesize(phases, repetitions=2, interval=15, noise=0.1, seed=7, vm_id="demo")

print(f"samples: {len(series)} (900 s cycle x 2 at 15 s)")
print(f"cpu     mean per phase: {[round(float(series.cpu[i*20:(i+1)*20].mean()), 1) for i in range(6)]}")
print(f"dirty   mean per phase: {[round(float(series.dirty_rate[i*20:(i+1)*20].mean())) for i in range(6)]}")

# noise=0 gives an exactly periodic series: position i repeats every cycle
clean = synthesize(phases, repetitions=4, interval=15, noise=0.0, seed=0)
cycle_len = 60
assert np.array_equal(clean.cpu[:-cycle_len], clean.cpu[cycle_len:])
print("noise=0 synthesis is exactly periodic")

# ---------------------------------------------------------------------------
# The CSV wire format round-trips exactly.

csv_text = write_trace(series)
print("\nfirst trace rows:")
print("\n".join(csv_text.splitlines()[:4]))
assert parse_trace(csv_text, vm_id="demo", interval=15) == series
print("parse(write(series)) == series")

# ---------------------------------------------------------------------------
# Raw collector output is rarely on a clean grid. Resampling buckets samples
# into [k*interval, (k+1)*interval) windows, averages each bucket, and
# forward-fills collector gaps.

ragged = LoadSeries.from_samples(
    "ragged",
    15,
    [
        LoadSample(0, 40, 10, 100, 1),
        LoadSample(5, 60, 20, 300, 1),  # same bucket as t=0
        LoadSample(21, 80, 30, 500, 2),
        LoadSample(55, 20, 10, 50, 1),  # bucket at t=45; t=30 is a gap
    ],
)
regular = resample(ragged, 15)
print(f"\nresampled timestamps: {regular.timestamps.tolist()}")
print(f"resampled cpu:        {regular.cpu.tolist()}  (t=30 forward-filled)")
