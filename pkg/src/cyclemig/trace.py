"""Per-VM resource usage traces: data model, CSV I/O, resampling, synthesis.

A trace is a time-ordered sequence of load samples (cpu %, mem %, dirty
pages/s, I/O ops/s) at a nominal sampling interval. Synthetic traces are
built from repeating phase patterns (CPU / MEM / IO / IDLE) so that cyclic
workloads can be planted with known ground truth.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

TRACE_HEADER = ["timestamp", "cpu", "mem", "dirty_rate", "io_rate"]

# Mean load levels per phase kind: (cpu %, mem %, dirty pages/s, io ops/s).
# MEM dirties pages heavily and IO hammers the storage path, so both are
# hostile to pre-copy; CPU and IDLE leave memory almost untouched.
PHASE_LEVELS = {
    "CPU": (95.0, 30.0, 50.0, 5.0),
    "MEM": (60.0, 85.0, 5000.0, 10.0),
    "IO": (30.0, 40.0, 200.0, 500.0),
    "IDLE": (2.0, 5.0, 10.0, 1.0),
}


class TraceError(ValueError):
    """Malformed or inconsistent trace data."""


class TraceParseError(TraceError):
    """CSV parse failure; carries the 1-based line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class LoadSample:
    """One resource usage measurement."""

    timestamp: float  # seconds since scenario start
    cpu: float  # percent, [0, 100]
    mem: float  # percent of VM memory active, [0, 100]
    dirty_rate: float  # pages/s, >= 0
    io_rate: float  # operations/s, >= 0

    def __post_init__(self):
        if self.timestamp < 0:
            raise TraceError(f"timestamp must be >= 0, got {self.timestamp}")
        for name in ("cpu", "mem"):
            v = getattr(self, name)
            if not 0.0 <= v <= 100.0:
                raise TraceError(f"{name} must be in [0, 100], got {v}")
        for name in ("dirty_rate", "io_rate"):
            v = getattr(self, name)
            if v < 0:
                raise TraceError(f"{name} must be >= 0, got {v}")


@dataclass(eq=False)
class LoadSeries:
    """Columnar time series of load samples for one VM.

    Timestamps must be strictly increasing. After :func:`resample` they lie
    exactly on the ``k * interval`` grid.
    """

    vm_id: str
    interval: float
    timestamps: np.ndarray
    cpu: np.ndarray
    mem: np.ndarray
    dirty_rate: np.ndarray
    io_rate: np.ndarray

    def __post_init__(self):
        if self.interval <= 0:
            raise TraceError(f"interval must be > 0, got {self.interval}")
        for name in ("timestamps", "cpu", "mem", "dirty_rate", "io_rate"):
            setattr(self, name, np.asarray(getattr(self, name), dtype=float))
        n = len(self.timestamps)
        for name in ("cpu", "mem", "dirty_rate", "io_rate"):
            if len(getattr(self, name)) != n:
                raise TraceError(f"column {name} has length mismatch")
        if n:
            if self.timestamps[0] < 0:
                raise TraceError("timestamps must be >= 0")
            if np.any(np.diff(self.timestamps) <= 0):
                raise TraceError("timestamps must be strictly increasing")
            if np.any((self.cpu < 0) | (self.cpu > 100)):
                raise TraceError("cpu values must be in [0, 100]")
            if np.any((self.mem < 0) | (self.mem > 100)):
                raise TraceError("mem values must be in [0, 100]")
            if np.any(self.dirty_rate < 0) or np.any(self.io_rate < 0):
                raise TraceError("dirty_rate and io_rate must be >= 0")

    @classmethod
    def from_samples(cls, vm_id: str, interval: float, samples) -> "LoadSeries":
        samples = list(samples)
        return cls(
            vm_id=vm_id,
            interval=interval,
            timestamps=[s.timestamp for s in samples],
            cpu=[s.cpu for s in samples],
            mem=[s.mem for s in samples],
            dirty_rate=[s.dirty_rate for s in samples],
            io_rate=[s.io_rate for s in samples],
        )

    def __len__(self) -> int:
        return len(self.timestamps)

    def __eq__(self, other) -> bool:
        if not isinstance(other, LoadSeries):
            return NotImplemented
        return (
            self.vm_id == other.vm_id
            and self.interval == other.interval
            and all(
                np.array_equal(getattr(self, c), getattr(other, c))
                for c in ("timestamps", "cpu", "mem", "dirty_rate", "io_rate")
            )
        )

    def sample(self, i: int) -> LoadSample:
        return LoadSample(
            timestamp=float(self.timestamps[i]),
            cpu=float(self.cpu[i]),
            mem=float(self.mem[i]),
            dirty_rate=float(self.dirty_rate[i]),
            io_rate=float(self.io_rate[i]),
        )

    def samples(self):
        return [self.sample(i) for i in range(len(self))]

    @property
    def end_time(self) -> float:
        """Time covered by the trace: last sample start plus one interval."""
        if not len(self):
            return 0.0
        return float(self.timestamps[-1]) + self.interval


@dataclass(frozen=True)
class PhaseSpec:
    """One phase of a synthetic workload cycle.

    Unset intensity levels default to :data:`PHASE_LEVELS` for the kind.
    """

    kind: str
    duration: float  # seconds
    cpu: float = field(default=None)  # type: ignore[assignment]
    mem: float = field(default=None)  # type: ignore[assignment]
    dirty_rate: float = field(default=None)  # type: ignore[assignment]
    io_rate: float = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.kind not in PHASE_LEVELS:
            raise TraceError(f"unknown phase kind {self.kind!r}")
        if self.duration <= 0:
            raise TraceError(f"phase duration must be > 0, got {self.duration}")
        defaults = PHASE_LEVELS[self.kind]
        for name, default in zip(("cpu", "mem", "dirty_rate", "io_rate"), defaults):
            if getattr(self, name) is None:
                object.__setattr__(self, name, default)

    def levels(self) -> tuple[float, float, float, float]:
        return (self.cpu, self.mem, self.dirty_rate, self.io_rate)


def parse_trace(source, vm_id: str = "vm", interval: float = 15.0) -> LoadSeries:
    """Parse a CSV trace (``timestamp,cpu,mem,dirty_rate,io_rate``).

    ``source`` may be a str, bytes, or a file-like object. Raises
    :class:`TraceParseError` with the offending line number on malformed
    rows, out-of-range fields, or non-monotonic timestamps.
    """
    if isinstance(source, bytes):
        text = source.decode("utf-8")
    elif isinstance(source, str):
        text = source
    else:
        text = source.read()
        if isinstance(text, bytes):
            text = text.decode("utf-8")

    reader = csv.reader(io.StringIO(text))
    rows = list(reader)
    if not rows:
        raise TraceParseError("missing header", line=1)
    header = [h.strip() for h in rows[0]]
    if header != TRACE_HEADER:
        raise TraceParseError(
            f"expected header {','.join(TRACE_HEADER)!r}, got {','.join(header)!r}",
            line=1,
        )

    cols = [[] for _ in TRACE_HEADER]
    prev_ts = None
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(TRACE_HEADER):
            raise TraceParseError(
                f"expected {len(TRACE_HEADER)} fields, got {len(row)}", line=lineno
            )
        try:
            values = [float(v) for v in row]
        except ValueError as exc:
            raise TraceParseError(str(exc), line=lineno) from None
        try:
            LoadSample(*values)
        except TraceError as exc:
            raise TraceParseError(str(exc), line=lineno) from None
        if prev_ts is not None and values[0] <= prev_ts:
            raise TraceParseError(
                f"non-monotonic timestamp {values[0]} (previous {prev_ts})",
                line=lineno,
            )
        prev_ts = values[0]
        for col, v in zip(cols, values):
            col.append(v)

    return LoadSeries(vm_id, interval, *cols)


def write_trace(series: LoadSeries) -> str:
    """Serialize a series to the CSV trace format (inverse of parse_trace)."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(TRACE_HEADER)
    for i in range(len(series)):
        writer.writerow(
            [
                repr(float(series.timestamps[i])),
                repr(float(series.cpu[i])),
                repr(float(series.mem[i])),
                repr(float(series.dirty_rate[i])),
                repr(float(series.io_rate[i])),
            ]
        )
    return out.getvalue()


def resample(series: LoadSeries, interval: float) -> LoadSeries:
    """Rebin a series onto the ``k * interval`` grid.

    Each output sample is the mean of input samples with timestamps in
    ``[k * interval, (k + 1) * interval)``. Buckets with no samples carry the
    previous bucket's value forward (collector gaps should not shorten the
    series). Resampling a series already on the grid is the identity.
    """
    if interval <= 0:
        raise TraceError(f"interval must be > 0, got {interval}")
    if not len(series):
        raise TraceError("cannot resample an empty series")

    bucket = np.floor(series.timestamps / interval).astype(np.int64)
    k_first, k_last = int(bucket[0]), int(bucket[-1])
    n_out = k_last - k_first + 1

    counts = np.zeros(n_out)
    np.add.at(counts, bucket - k_first, 1.0)
    occupied = counts > 0

    def _aggregate(col):
        acc = np.zeros(n_out)
        np.add.at(acc, bucket - k_first, col)
        out = np.empty(n_out)
        out[occupied] = acc[occupied] / counts[occupied]
        # forward-fill empty buckets from the previous occupied one
        idx = np.where(occupied, np.arange(n_out), -1)
        idx = np.maximum.accumulate(idx)
        return out[idx]

    return LoadSeries(
        vm_id=series.vm_id,
        interval=float(interval),
        timestamps=(np.arange(k_first, k_last + 1) * float(interval)),
        cpu=_aggregate(series.cpu),
        mem=_aggregate(series.mem),
        dirty_rate=_aggregate(series.dirty_rate),
        io_rate=_aggregate(series.io_rate),
    )


def synthesize(
    phases,
    repetitions: int = 1,
    interval: float = 15.0,
    noise: float = 0.0,
    seed: int = 0,
    vm_id: str = "vm",
) -> LoadSeries:
    """Generate a trace by repeating a phase pattern.

    The pattern is the concatenation of ``phases`` repeated ``repetitions``
    times; samples are emitted every ``interval`` seconds. ``noise`` is the
    relative standard deviation of multiplicative Gaussian noise applied to
    every level (clamped back to valid ranges). Output is deterministic for
    a given seed; with ``noise=0`` the output is exactly periodic.
    """
    phases = [p if isinstance(p, PhaseSpec) else PhaseSpec(*p) for p in phases]
    if not phases:
        raise TraceError("phases must be non-empty")
    if repetitions < 1:
        raise TraceError(f"repetitions must be >= 1, got {repetitions}")
    if not 0.0 <= noise <= 0.5:
        raise TraceError(f"noise must be in [0, 0.5], got {noise}")
    if interval <= 0:
        raise TraceError(f"interval must be > 0, got {interval}")

    boundaries = np.cumsum([p.duration for p in phases])
    cycle_duration = float(boundaries[-1])
    total = cycle_duration * repetitions
    n = int(np.floor(total / interval + 1e-9))

    times = np.arange(n) * float(interval)
    in_cycle = np.mod(times, cycle_duration)
    phase_idx = np.searchsorted(boundaries, in_cycle, side="right")

    levels = np.array([p.levels() for p in phases])  # (n_phases, 4)
    base = levels[phase_idx]  # (n, 4)

    rng = np.random.default_rng(seed)
    factors = 1.0 + noise * rng.standard_normal((n, 4))
    values = base * factors

    return LoadSeries(
        vm_id=vm_id,
        interval=float(interval),
        timestamps=times,
        cpu=np.clip(values[:, 0], 0.0, 100.0),
        mem=np.clip(values[:, 1], 0.0, 100.0),
        dirty_rate=np.clip(values[:, 2], 0.0, None),
        io_rate=np.clip(values[:, 3], 0.0, None),
    )


class StepRate:
    """Piecewise-constant dirty-page rate derived from a trace.

    ``rate(t)`` is the dirty rate of the sample covering ``t`` (clamped to
    the first/last sample outside the trace). ``integral(a, b)`` is exact
    for this step function.
    """

    def __init__(self, series: LoadSeries):
        if not len(series):
            raise TraceError("cannot build a rate function from an empty series")
        self._t = np.asarray(series.timestamps, dtype=float)
        self._r = np.asarray(series.dirty_rate, dtype=float)

    @property
    def breakpoints(self) -> np.ndarray:
        return self._t

    def rate(self, t: float) -> float:
        i = int(np.searchsorted(self._t, t, side="right")) - 1
        return float(self._r[max(i, 0)])

    def __call__(self, t: float) -> float:
        return self.rate(t)

    def integral(self, a: float, b: float) -> float:
        """Pages dirtied over [a, b]."""
        if b <= a:
            return 0.0
        cuts = self._t[(self._t > a) & (self._t < b)]
        edges = np.concatenate(([a], cuts, [b]))
        mids = (edges[:-1] + edges[1:]) / 2.0
        idx = np.maximum(np.searchsorted(self._t, mids, side="right") - 1, 0)
        return float(np.sum(self._r[idx] * np.diff(edges)))
