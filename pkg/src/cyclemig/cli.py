"""Command-line front end.

Subcommands: ``simulate`` runs a scenario under one policy; ``compare``
reduces two report JSONs to a reduction table; ``cycles`` extracts a cycle
profile (plus spectrum CSV) from a trace; ``migrate-once`` runs a single
what-if pre-copy migration; ``diagram`` dumps a cycle-accuracy event CSV.

Exit status: 0 on success, 2 on configuration/scenario errors.
"""

from __future__ import annotations

import argparse
import json
import sys

from .classifier import NBModel, classify_series, default_model
from .consolidation import VMSpec, plan
from .cycles import InsufficientDataError, decompose, detect_cycle_size, spectrum
from .migration import MigrationParams, simulate_precopy
from .orchestrator import ScenarioError, ScenarioReport, load_scenario, run
from .report import compare, emit_cycle_diagram
from .scenarios import bundled_scenario, bundled_scenario_names
from .trace import parse_trace, resample

EXIT_OK = 0
EXIT_SCENARIO_ERROR = 2


def _write(path: str | None, text: str):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _load_scenario_arg(ref: str):
    if ref in bundled_scenario_names():
        return load_scenario(bundled_scenario(ref))
    with open(ref) as fh:
        return load_scenario(fh)


def _cmd_simulate(args) -> int:
    scenario = _load_scenario_arg(args.scenario)
    report = run(scenario, mode=args.mode)
    _write(args.out, report.to_json())
    return EXIT_OK


def _cmd_compare(args) -> int:
    with open(args.baseline) as fh:
        baseline = ScenarioReport.from_json(fh.read())
    with open(args.candidate) as fh:
        candidate = ScenarioReport.from_json(fh.read())
    table = compare(baseline, candidate)
    sys.stdout.write(table.to_text())
    if args.out:
        _write(args.out, table.to_json())
    return EXIT_OK


def _cmd_cycles(args) -> int:
    with open(args.trace, "rb") as fh:
        series = parse_trace(fh, vm_id=args.vm_id, interval=args.interval)
    series = resample(series, args.interval)
    if args.model:
        with open(args.model) as fh:
            model = NBModel.from_json(fh.read())
    else:
        model = default_model()
    classes = classify_series(model, series)
    detect_input = series.cpu if args.signal == "cpu" else classes

    bins, mags = spectrum(detect_input)
    if args.spectrum:
        lines = ["bin,magnitude,period_samples"]
        for k, m in zip(bins.tolist(), mags.tolist()):
            period = "" if k == 0 else repr(len(classes) / k)
            lines.append(f"{k},{m!r},{period}")
        _write(args.spectrum, "\n".join(lines) + "\n")

    try:
        est = detect_cycle_size(detect_input, threshold=args.threshold)
    except InsufficientDataError as exc:
        raise ScenarioError(str(exc)) from None
    if est.acyclic:
        doc = {"acyclic": True, "strength": est.strength}
    else:
        profile = decompose(classes, cycle_size=est.cycle_size)
        doc = {"acyclic": False, "strength": est.strength, **profile.to_dict()}
        doc["dominant_period_strength"] = est.strength
    _write(args.out, json.dumps(doc, sort_keys=True, indent=2) + "\n")
    return EXIT_OK


def _cmd_migrate_once(args) -> int:
    params = MigrationParams(
        v_mem=args.v_mem,
        bandwidth=args.bandwidth,
        page_size=args.page_size,
        max_rounds=args.max_rounds,
        dirty_page_threshold=args.dirty_page_threshold,
        transfer_cap_factor=args.transfer_cap_factor,
        activation_overhead=args.activation_overhead,
    )
    outcome = simulate_precopy(params, lambda t: args.dirty_rate)
    _write(args.out, json.dumps(outcome.to_dict(), sort_keys=True, indent=2) + "\n")
    return EXIT_OK


def _cmd_diagram(args) -> int:
    with open(args.report) as fh:
        report = ScenarioReport.from_json(fh.read())
    _write(args.out, emit_cycle_diagram(report, args.vm))
    return EXIT_OK


def _cmd_plan(args) -> int:
    scenario = _load_scenario_arg(args.scenario)
    specs = [VMSpec(vm.vm_id, vm.vcpus, vm.mem, vm.host) for vm in scenario.vms]
    requests = plan(scenario.hosts, specs, submitted_at=args.submitted_at)
    doc = [
        {
            "vm_id": r.vm_id,
            "source_host": r.source_host,
            "target_host": r.target_host,
            "submitted_at": r.submitted_at,
        }
        for r in requests
    ]
    _write(args.out, json.dumps(doc, sort_keys=True, indent=2) + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cyclemig",
        description="Cycle-aware live-migration orchestration toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a scenario under one policy")
    p.add_argument(
        "--scenario",
        required=True,
        help=f"scenario JSON path or bundled name ({', '.join(bundled_scenario_names())})",
    )
    p.add_argument("--mode", choices=["alma", "traditional"], default=None)
    p.add_argument("--out", default="-", help="report JSON path (default stdout)")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("compare", help="reduction table from two reports")
    p.add_argument("--baseline", required=True)
    p.add_argument("--candidate", required=True)
    p.add_argument("--out", default=None, help="also write the table as JSON")
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("cycles", help="cycle profile of a CSV trace")
    p.add_argument("--trace", required=True)
    p.add_argument("--vm-id", default="vm")
    p.add_argument("--interval", type=float, default=15.0)
    p.add_argument("--threshold", type=float, default=4.0)
    p.add_argument("--model", default=None, help="serialized classifier JSON")
    p.add_argument(
        "--signal",
        choices=["classification", "cpu"],
        default="classification",
        help="detect the cycle from the LM/NLM labels or from raw cpu",
    )
    p.add_argument("--out", default="-", help="profile JSON path (default stdout)")
    p.add_argument("--spectrum", default=None, help="spectrum CSV path")
    p.set_defaults(func=_cmd_cycles)

    p = sub.add_parser("plan", help="consolidation plan for a scenario's cluster")
    p.add_argument("--scenario", required=True)
    p.add_argument("--submitted-at", type=float, default=0.0)
    p.add_argument("--out", default="-")
    p.set_defaults(func=_cmd_plan)

    p = sub.add_parser("migrate-once", help="single what-if pre-copy migration")
    p.add_argument("--v-mem", type=float, required=True, help="MB")
    p.add_argument("--bandwidth", type=float, required=True, help="MB/s")
    p.add_argument("--dirty-rate", type=float, default=0.0, help="pages/s")
    p.add_argument("--page-size", type=float, default=4.0, help="KB")
    p.add_argument("--max-rounds", type=int, default=29)
    p.add_argument("--dirty-page-threshold", type=float, default=50.0)
    p.add_argument("--transfer-cap-factor", type=float, default=3.0)
    p.add_argument("--activation-overhead", type=float, default=0.2)
    p.add_argument("--out", default="-")
    p.set_defaults(func=_cmd_migrate_once)

    p = sub.add_parser("diagram", help="cycle-accuracy event CSV for one VM")
    p.add_argument("--report", required=True)
    p.add_argument("--vm", required=True)
    p.add_argument("--out", default="-")
    p.set_defaults(func=_cmd_diagram)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError) as exc:
        # covers scenario, trace, comparison, planning, and model errors
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCENARIO_ERROR


if __name__ == "__main__":
    sys.exit(main())
