"""Baseline-versus-candidate reduction tables and cycle-accuracy diagrams."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass

from .orchestrator import ScenarioReport, class_at

METRIC_MIGRATION_TIME = "live_migration_time"
METRIC_DOWNTIME = "downtime"
METRIC_DATA_TRAFFIC = "data_traffic"

EVENT_NONE = "none"
EVENT_REQUESTED = "requested"
EVENT_EXECUTED = "executed"


class ComparisonError(ValueError):
    """Reports cannot be compared."""


def _reduction_pct(baseline: float, candidate: float) -> float:
    if baseline == 0.0:
        return 0.0
    return round((baseline - candidate) / baseline * 100.0, 2)


@dataclass(frozen=True)
class ReductionRow:
    metric: str
    vm_id: str | None  # None -> cluster-level row
    baseline: float
    candidate: float
    reduction_pct: float

    def to_dict(self) -> dict:
        return {
            "metric": self.metric,
            "vm_id": self.vm_id,
            "baseline": self.baseline,
            "candidate": self.candidate,
            "reduction_pct": self.reduction_pct,
        }


@dataclass(frozen=True)
class ReductionTable:
    baseline_mode: str
    candidate_mode: str
    rows: tuple

    def to_dict(self) -> dict:
        return {
            "baseline_mode": self.baseline_mode,
            "candidate_mode": self.candidate_mode,
            "rows": [r.to_dict() for r in self.rows],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    def to_text(self) -> str:
        header = (
            f"{'Metric':<22}{'VM':<12}{self.baseline_mode:>14}"
            f"{self.candidate_mode:>14}{'Reduction (%)':>16}"
        )
        lines = [header, "-" * len(header)]
        for r in self.rows:
            lines.append(
                f"{r.metric:<22}{(r.vm_id or '(cluster)'):<12}"
                f"{r.baseline:>14.2f}{r.candidate:>14.2f}{r.reduction_pct:>16.2f}"
            )
        return "\n".join(lines) + "\n"


def compare(baseline: ScenarioReport, candidate: ScenarioReport) -> ReductionTable:
    """Per-VM migration-time and downtime reductions plus cluster traffic.

    Both reports must cover the same VMs with the same request schedule.
    Reductions are ``(baseline - candidate) / baseline * 100`` rounded to
    two decimals; regressions come out negative.
    """
    base_vms = {r.vm_id: r for r in baseline.vms}
    cand_vms = {r.vm_id: r for r in candidate.vms}
    if set(base_vms) != set(cand_vms):
        raise ComparisonError(
            f"VM sets differ: {sorted(set(base_vms) ^ set(cand_vms))}"
        )
    for vm_id in base_vms:
        t0 = base_vms[vm_id].request.submitted_at
        t1 = cand_vms[vm_id].request.submitted_at
        if t0 != t1:
            raise ComparisonError(
                f"vm {vm_id}: request schedules differ ({t0} vs {t1})"
            )

    rows = []
    for vm_id in sorted(base_vms):
        b, c = base_vms[vm_id], cand_vms[vm_id]
        if b.outcome is None or c.outcome is None:
            continue  # cancelled on one side: no per-VM comparison
        rows.append(
            ReductionRow(
                METRIC_MIGRATION_TIME,
                vm_id,
                b.outcome.t_mig,
                c.outcome.t_mig,
                _reduction_pct(b.outcome.t_mig, c.outcome.t_mig),
            )
        )
        rows.append(
            ReductionRow(
                METRIC_DOWNTIME,
                vm_id,
                b.outcome.t_down,
                c.outcome.t_down,
                _reduction_pct(b.outcome.t_down, c.outcome.t_down),
            )
        )
    traffic_b = baseline.totals["data_traffic_mb"]
    traffic_c = candidate.totals["data_traffic_mb"]
    rows.append(
        ReductionRow(
            METRIC_DATA_TRAFFIC,
            None,
            traffic_b,
            traffic_c,
            _reduction_pct(traffic_b, traffic_c),
        )
    )
    return ReductionTable(
        baseline_mode=baseline.mode,
        candidate_mode=candidate.mode,
        rows=tuple(rows),
    )


def emit_cycle_diagram(report: ScenarioReport, vm_id: str) -> str:
    """CSV event stream for one VM: ``time,workload_class,event``.

    One row per classification sample (event ``none``) plus one row for the
    request instant and one for the execution instant, enough to redraw the
    request-versus-execution diagram against the workload cycle.
    """
    if vm_id not in report.timelines:
        raise ComparisonError(f"vm {vm_id} not present in report")
    timeline = report.timelines[vm_id]
    interval = report.interval
    record = next((r for r in report.vms if r.vm_id == vm_id), None)

    rows = []
    for i, ch in enumerate(timeline):
        klass = "LM" if ch == "L" else "NLM"
        rows.append((i * interval, klass, EVENT_NONE))
    if record is not None:
        t_req = record.request.submitted_at
        rows.append((t_req, class_at(timeline, interval, t_req), EVENT_REQUESTED))
        if record.executed_at is not None:
            rows.append(
                (
                    record.executed_at,
                    class_at(timeline, interval, record.executed_at),
                    EVENT_EXECUTED,
                )
            )

    event_rank = {EVENT_NONE: 0, EVENT_REQUESTED: 1, EVENT_EXECUTED: 2}
    rows.sort(key=lambda r: (r[0], event_rank[r[2]]))

    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["time", "workload_class", "event"])
    writer.writerows(rows)
    return out.getvalue()
