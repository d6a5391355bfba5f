import numpy as np
import pytest

from cyclemig.trace import (
    LoadSample,
    LoadSeries,
    PhaseSpec,
    StepRate,
    TraceError,
    TraceParseError,
    parse_trace,
    resample,
    synthesize,
    write_trace,
)

HEADER = "timestamp,cpu,mem,dirty_rate,io_rate\n"


def test_parse_empty_body():
    series = parse_trace(HEADER)
    assert len(series) == 0


def test_parse_single_row_identity():
    series = parse_trace(HEADER + "0,50,20,100,10\n")
    assert len(series) == 1
    s = series.sample(0)
    assert (s.timestamp, s.cpu, s.mem, s.dirty_rate, s.io_rate) == (0, 50, 20, 100, 10)


def test_parse_rejects_out_of_range_cpu():
    with pytest.raises(TraceParseError) as exc:
        parse_trace(HEADER + "0,120,20,100,10\n")
    assert "cpu" in str(exc.value)
    assert "line 2" in str(exc.value)


def test_parse_rejects_bad_header():
    with pytest.raises(TraceParseError) as exc:
        parse_trace("time,cpu,mem,dirty,io\n")
    assert exc.value.line == 1


def test_parse_rejects_non_monotonic_timestamps():
    body = HEADER + "0,10,10,1,1\n30,10,10,1,1\n15,10,10,1,1\n"
    with pytest.raises(TraceParseError) as exc:
        parse_trace(body)
    assert "monotonic" in str(exc.value)
    assert exc.value.line == 4


def test_parse_rejects_malformed_row():
    with pytest.raises(TraceParseError) as exc:
        parse_trace(HEADER + "0,10,10,1\n")
    assert exc.value.line == 2


def test_parse_accepts_bytes_and_files(tmp_path):
    body = HEADER + "0,10,10,1,1\n"
    assert parse_trace(body.encode()) == parse_trace(body)
    p = tmp_path / "t.csv"
    p.write_text(body)
    with open(p) as fh:
        assert parse_trace(fh) == parse_trace(body)


def test_round_trip():
    rng = np.random.default_rng(7)
    series = synthesize(
        [PhaseSpec("MEM", 120), PhaseSpec("CPU", 60)],
        repetitions=3,
        noise=0.2,
        seed=int(rng.integers(1 << 30)),
        vm_id="vm1",
    )
    again = parse_trace(write_trace(series), vm_id="vm1", interval=series.interval)
    assert again == series


def test_resample_idempotent_at_own_interval():
    series = synthesize([PhaseSpec("CPU", 150)], repetitions=2, interval=15)
    assert resample(series, 15) == series


def test_resample_bucket_mean():
    series = LoadSeries.from_samples(
        "vm",
        15,
        [LoadSample(0, 40, 10, 5, 1), LoadSample(5, 60, 20, 15, 3)],
    )
    out = resample(series, 15)
    assert len(out) == 1
    assert out.timestamps[0] == 0
    assert out.cpu[0] == pytest.approx(50)
    assert out.mem[0] == pytest.approx(15)
    assert out.dirty_rate[0] == pytest.approx(10)


def test_resample_bucket_count_over_60s():
    # samples at 0, 18, 37, 59 span four 15 s buckets
    ts = [0, 18, 37, 59]
    series = LoadSeries.from_samples(
        "vm", 15, [LoadSample(t, 10, 10, 1, 1) for t in ts]
    )
    out = resample(series, 15)
    assert len(out) == 4
    assert list(out.timestamps) == [0, 15, 30, 45]


def test_resample_forward_fills_gaps():
    series = LoadSeries.from_samples(
        "vm", 15, [LoadSample(0, 40, 10, 5, 1), LoadSample(50, 80, 10, 5, 1)]
    )
    out = resample(series, 15)
    # buckets: [0], gap, gap, [45]; gaps carry bucket-0 values
    assert len(out) == 4
    assert list(out.cpu) == [40, 40, 40, 80]


def test_resample_empty_series_errors():
    empty = LoadSeries("vm", 15, [], [], [], [], [])
    with pytest.raises(TraceError):
        resample(empty, 15)


def test_synthesize_idle_baseline():
    series = synthesize([PhaseSpec("IDLE", 300)], noise=0.0)
    assert np.all(series.cpu <= 5)
    assert np.all(series.dirty_rate <= 20)


def test_synthesize_length_and_interval():
    series = synthesize(
        [PhaseSpec("MEM", 300), PhaseSpec("IDLE", 300), PhaseSpec("CPU", 300)],
        repetitions=2,
        interval=15,
    )
    assert len(series) == 120
    assert np.all(np.diff(series.timestamps) == 15)


def test_synthesize_deterministic():
    a = synthesize([PhaseSpec("MEM", 120)], repetitions=2, noise=0.3, seed=99)
    b = synthesize([PhaseSpec("MEM", 120)], repetitions=2, noise=0.3, seed=99)
    assert a == b


def test_synthesize_noiseless_exactly_periodic():
    phases = [PhaseSpec("MEM", 120), PhaseSpec("IDLE", 60), PhaseSpec("CPU", 120)]
    series = synthesize(phases, repetitions=4, interval=15, noise=0.0)
    cycle_len = int(sum(p.duration for p in phases) / 15)
    n = len(series)
    for col in (series.cpu, series.mem, series.dirty_rate, series.io_rate):
        assert np.array_equal(col[: n - cycle_len], col[cycle_len:])


def test_synthesize_phase_means_within_noise():
    series = synthesize([PhaseSpec("CPU", 1500)], noise=0.1, seed=3, interval=15)
    assert series.cpu.mean() == pytest.approx(95, rel=0.05)
    assert series.dirty_rate.mean() == pytest.approx(50, rel=0.05)


def test_synthesize_validates_inputs():
    with pytest.raises(TraceError):
        synthesize([], repetitions=1)
    with pytest.raises(TraceError):
        synthesize([PhaseSpec("CPU", 100)], repetitions=0)
    with pytest.raises(TraceError):
        synthesize([PhaseSpec("CPU", 100)], noise=0.9)
    with pytest.raises(TraceError):
        PhaseSpec("GPU", 100)
    with pytest.raises(TraceError):
        PhaseSpec("CPU", -5)


def test_load_sample_invariants():
    with pytest.raises(TraceError):
        LoadSample(-1, 10, 10, 1, 1)
    with pytest.raises(TraceError):
        LoadSample(0, 10, 101, 1, 1)
    with pytest.raises(TraceError):
        LoadSample(0, 10, 10, -1, 1)


def test_step_rate_integral_matches_rectangles():
    series = LoadSeries.from_samples(
        "vm",
        10,
        [
            LoadSample(0, 10, 10, 100, 1),
            LoadSample(10, 10, 10, 200, 1),
            LoadSample(20, 10, 10, 50, 1),
        ],
    )
    sr = StepRate(series)
    assert sr.rate(0) == 100
    assert sr.rate(9.99) == 100
    assert sr.rate(10) == 200
    assert sr.rate(25) == 50
    assert sr.rate(1000) == 50  # clamp past the end
    assert sr.integral(0, 30) == pytest.approx(100 * 10 + 200 * 10 + 50 * 10)
    assert sr.integral(5, 15) == pytest.approx(100 * 5 + 200 * 5)
    assert sr.integral(12, 12) == 0.0
