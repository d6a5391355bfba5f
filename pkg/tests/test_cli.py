import json

import pytest

from cyclemig.cli import main
from cyclemig.trace import PhaseSpec, synthesize, write_trace


def test_simulate_both_modes_and_compare(tmp_path, capsys):
    trad = tmp_path / "trad.json"
    alma = tmp_path / "alma.json"
    assert main(
        ["simulate", "--scenario", "benchmark", "--mode", "traditional", "--out", str(trad)]
    ) == 0
    assert main(
        ["simulate", "--scenario", "benchmark", "--mode", "alma", "--out", str(alma)]
    ) == 0

    doc = json.loads(trad.read_text())
    assert doc["mode"] == "traditional"
    assert doc["totals"]["migrations_executed"] == 4

    table = tmp_path / "table.json"
    assert main(
        ["compare", "--baseline", str(trad), "--candidate", str(alma), "--out", str(table)]
    ) == 0
    out = capsys.readouterr().out
    assert "Reduction (%)" in out
    rows = json.loads(table.read_text())["rows"]
    traffic = [r for r in rows if r["metric"] == "data_traffic"]
    assert traffic[0]["reduction_pct"] > 0


def test_simulate_scenario_file(tmp_path):
    doc = {
        "version": 1,
        "interval": 15,
        "hosts": [
            {"host_id": "h1", "cpu_capacity": 4, "mem_capacity": 4096},
            {"host_id": "h2", "cpu_capacity": 4, "mem_capacity": 4096},
        ],
        "vms": [
            {
                "vm_id": "vm",
                "vcpus": 1,
                "mem": 256,
                "host": "h1",
                "workload": {"phases": [["IDLE", 300]], "repetitions": 1},
            }
        ],
        "triggers": [{"time": 0, "moves": [{"vm_id": "vm", "target_host": "h2"}]}],
        "policy": {"mode": "traditional", "link_bandwidth": 100},
    }
    path = tmp_path / "s.json"
    path.write_text(json.dumps(doc))
    out = tmp_path / "r.json"
    assert main(["simulate", "--scenario", str(path), "--out", str(out)]) == 0
    assert json.loads(out.read_text())["totals"]["migrations_executed"] == 1


def test_simulate_invalid_scenario_exits_2(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"version": 77, "hosts": [], "vms": [], "triggers": []}))
    assert main(["simulate", "--scenario", str(path)]) == 2
    assert "error:" in capsys.readouterr().err


def test_simulate_missing_file_exits_2(tmp_path):
    assert main(["simulate", "--scenario", str(tmp_path / "nope.json")]) == 2


def test_cycles_subcommand(tmp_path):
    series = synthesize(
        [PhaseSpec("MEM", 150), PhaseSpec("IDLE", 150)],
        repetitions=10,
        interval=15,
        vm_id="vm",
    )
    trace = tmp_path / "t.csv"
    trace.write_text(write_trace(series))
    out = tmp_path / "profile.json"
    spec = tmp_path / "spectrum.csv"
    assert main(
        ["cycles", "--trace", str(trace), "--out", str(out), "--spectrum", str(spec)]
    ) == 0
    profile = json.loads(out.read_text())
    assert profile["acyclic"] is False
    assert profile["cycle_size"] == 20
    assert sorted(profile["array_lm"] + profile["array_nlm"]) == list(range(20))
    lines = spec.read_text().splitlines()
    assert lines[0] == "bin,magnitude,period_samples"
    assert len(lines) == 2 + len(series) // 2  # header + rfft bins


def test_cycles_acyclic_trace(tmp_path):
    series = synthesize([PhaseSpec("IDLE", 600)], interval=15, vm_id="vm")
    trace = tmp_path / "t.csv"
    trace.write_text(write_trace(series))
    out = tmp_path / "profile.json"
    assert main(["cycles", "--trace", str(trace), "--out", str(out)]) == 0
    assert json.loads(out.read_text())["acyclic"] is True


def test_migrate_once(tmp_path, capsys):
    assert main(
        ["migrate-once", "--v-mem", "1024", "--bandwidth", "128", "--dirty-rate", "0"]
    ) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["t_mig"] == pytest.approx(8.2)
    assert doc["rounds"] == 1
    assert doc["bounds"]["upper_mig"] == pytest.approx(240.0)


def test_migrate_once_rejects_bad_params(capsys):
    assert main(["migrate-once", "--v-mem", "-5", "--bandwidth", "128"]) == 2


def test_diagram_subcommand(tmp_path):
    report = tmp_path / "r.json"
    assert main(
        ["simulate", "--scenario", "benchmark", "--mode", "alma", "--out", str(report)]
    ) == 0
    out = tmp_path / "d.csv"
    assert main(
        ["diagram", "--report", str(report), "--vm", "vm02_A", "--out", str(out)]
    ) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "time,workload_class,event"
    assert any(",executed" in line for line in lines)


def test_diagram_unknown_vm_exits_2(tmp_path):
    report = tmp_path / "r.json"
    main(["simulate", "--scenario", "benchmark", "--mode", "alma", "--out", str(report)])
    assert main(["diagram", "--report", str(report), "--vm", "ghost", "--out", "-"]) == 2


def test_plan_subcommand(tmp_path):
    doc = {
        "version": 1,
        "hosts": [
            {"host_id": "h1", "cpu_capacity": 8, "mem_capacity": 8192},
            {"host_id": "h2", "cpu_capacity": 8, "mem_capacity": 8192},
        ],
        "vms": [
            {
                "vm_id": f"vm{i}",
                "vcpus": 1,
                "mem": 1024,
                "host": f"h{1 + i % 2}",
                "workload": {"phases": [["IDLE", 300]], "repetitions": 1},
            }
            for i in range(4)
        ],
        "triggers": [],
        "policy": {"mode": "traditional", "link_bandwidth": 100},
    }
    path = tmp_path / "s.json"
    path.write_text(json.dumps(doc))
    out = tmp_path / "plan.json"
    assert main(["plan", "--scenario", str(path), "--out", str(out)]) == 0
    moves = json.loads(out.read_text())
    assert len(moves) == 2  # drain one of the two evenly loaded hosts
    assert len({m["target_host"] for m in moves}) == 1


def test_cycles_with_serialized_model(tmp_path):
    from cyclemig.classifier import default_model

    model_path = tmp_path / "model.json"
    model_path.write_text(default_model().to_json())
    series = synthesize(
        [PhaseSpec("MEM", 150), PhaseSpec("CPU", 150)],
        repetitions=10,
        interval=15,
        vm_id="vm",
    )
    trace = tmp_path / "t.csv"
    trace.write_text(write_trace(series))
    out = tmp_path / "profile.json"
    assert main(
        ["cycles", "--trace", str(trace), "--model", str(model_path), "--out", str(out)]
    ) == 0
    assert json.loads(out.read_text())["cycle_size"] == 20
