"""Cluster-level orchestration of live-migration requests.

A scenario describes hosts, VMs with their workload traces, consolidation
trigger times, and a policy. The orchestrator replays the scenario on a
deterministic event loop: each migration request is decided (run now,
postpone to the next migration-suitable moment, or cancel), and executed
migrations share the link bandwidth fairly, re-divided whenever one starts
or finishes.

Two policies are supported: ``traditional`` migrates on request;
``alma`` consults the VM's classification series and cycle profile and
defers requests that arrive at migration-hostile moments.
"""

from __future__ import annotations

import json
import math
import time as _time
from dataclasses import dataclass, field

from . import cycles as _cycles
from .classifier import LM, NLM, ClassificationSeries, classify_series, default_model
from .consolidation import HostSpec, MigrationRequest, VMSpec, plan
from .migration import MigrationOutcome, MigrationParams, PrecopyState
from .trace import LoadSeries, PhaseSpec, StepRate, parse_trace, resample, synthesize

SCENARIO_FORMAT_VERSION = 1

MODE_TRADITIONAL = "traditional"
MODE_ALMA = "alma"

KIND_IMMEDIATE = "immediate"
KIND_POSTPONED = "postponed"
KIND_CANCELLED = "cancelled"

REASON_TRADITIONAL = "traditional-policy"
REASON_ALREADY_LM = "already-LM"
REASON_WAIT = "wait-for-LM"
REASON_MAX_WAIT = "max-wait-cap"
REASON_NO_PROFILE = "no-cycle-profile"
REASON_NO_LM = "no-LM-in-cycle"
REASON_ENDING = "workload-ending"


class ScenarioError(ValueError):
    """Invalid scenario configuration or an unsatisfiable schedule."""


@dataclass(frozen=True)
class Policy:
    mode: str = MODE_ALMA
    max_wait: float = 900.0  # s, provider cap on postponement
    cancel_horizon: float | None = None  # s; None -> projected migration bound
    link_bandwidth: float = 100.0  # MB/s shared by concurrent migrations
    max_concurrent: int | None = None  # None -> unlimited

    def __post_init__(self):
        if self.mode not in (MODE_TRADITIONAL, MODE_ALMA):
            raise ScenarioError(f"unknown policy mode {self.mode!r}")
        if self.max_wait < 0:
            raise ScenarioError("max_wait must be >= 0")
        if self.link_bandwidth <= 0:
            raise ScenarioError("link_bandwidth must be > 0")
        if self.max_concurrent is not None and self.max_concurrent < 1:
            raise ScenarioError("max_concurrent must be >= 1 or None")


@dataclass(frozen=True)
class Decision:
    vm_id: str
    kind: str
    scheduled_at: float
    reason: str

    def to_dict(self) -> dict:
        return {
            "vm_id": self.vm_id,
            "kind": self.kind,
            "scheduled_at": self.scheduled_at,
            "reason": self.reason,
        }


def _grid_floor(t: float, interval: float) -> float:
    return math.floor(t / interval + 1e-9) * interval


def _grid_ceil(t: float, interval: float) -> float:
    return math.ceil(t / interval - 1e-9) * interval


def decide(
    request: MigrationRequest,
    profile: _cycles.CycleProfile | None,
    now: float,
    policy: Policy,
    interval: float,
    workload_end: float | None = None,
    mig_upper_bound: float | None = None,
) -> Decision:
    """Postpone, run immediately, or cancel one migration request.

    ``profile`` is the VM's cycle profile, or None when the workload is
    acyclic or not yet characterized (both fall back to migrating now).
    Postponement is capped at ``policy.max_wait`` past ``now``; a workload
    whose trace ends within the cancel horizon is cancelled outright.
    """
    if policy.mode == MODE_TRADITIONAL:
        return Decision(request.vm_id, KIND_IMMEDIATE, now, REASON_TRADITIONAL)

    if workload_end is not None:
        horizon = (
            policy.cancel_horizon
            if policy.cancel_horizon is not None
            else (mig_upper_bound or 0.0)
        )
        if workload_end - now <= horizon:
            return Decision(request.vm_id, KIND_CANCELLED, now, REASON_ENDING)

    if profile is None:
        return Decision(request.vm_id, KIND_IMMEDIATE, now, REASON_NO_PROFILE)

    m_current = int(now // interval + 1e-9)
    result = _cycles.remaining_time(profile, m_current)

    if result.basis == _cycles.BASIS_ALREADY_LM:
        return Decision(request.vm_id, KIND_IMMEDIATE, now, REASON_ALREADY_LM)

    if result.basis == _cycles.BASIS_NO_LM:
        wait, reason = policy.max_wait, REASON_NO_LM
    else:
        wait = result.remain_time * interval
        reason = REASON_WAIT
        if wait > policy.max_wait:
            wait, reason = policy.max_wait, REASON_MAX_WAIT

    # decisions land on sample boundaries; cap waits round down so the
    # provider limit is never exceeded
    scheduled = max(now, _grid_floor(now + wait, interval))
    kind = KIND_POSTPONED if scheduled > now else KIND_IMMEDIATE
    return Decision(request.vm_id, kind, scheduled, reason)


# --------------------------------------------------------------------------
# scenario configuration


@dataclass(frozen=True)
class ScenarioVM:
    vm_id: str
    vcpus: int
    mem: float
    host: str
    workload: dict | None = None  # synthesis spec
    trace_file: str | None = None

    def __post_init__(self):
        if (self.workload is None) == (self.trace_file is None):
            raise ScenarioError(
                f"vm {self.vm_id}: exactly one of workload/trace_file required"
            )


@dataclass(frozen=True)
class Trigger:
    time: float
    moves: tuple | None = None  # None -> plan automatically


@dataclass(frozen=True)
class Scenario:
    name: str
    interval: float
    seed: int
    hosts: tuple
    vms: tuple
    triggers: tuple
    policy: Policy
    migration: dict = field(default_factory=dict)
    classifier: dict = field(default_factory=dict)


def load_scenario(source) -> Scenario:
    """Load a scenario from a JSON document (dict, str, or file object)."""
    if isinstance(source, dict):
        doc = source
    elif isinstance(source, (str, bytes)):
        doc = json.loads(source)
    else:
        doc = json.load(source)

    version = doc.get("version")
    if version != SCENARIO_FORMAT_VERSION:
        raise ScenarioError(f"unsupported scenario version {version!r}")

    try:
        hosts = tuple(
            HostSpec(h["host_id"], h["cpu_capacity"], h["mem_capacity"])
            for h in doc["hosts"]
        )
        vms = tuple(
            ScenarioVM(
                vm_id=v["vm_id"],
                vcpus=v["vcpus"],
                mem=v["mem"],
                host=v["host"],
                workload=v.get("workload"),
                trace_file=v.get("trace_file"),
            )
            for v in doc["vms"]
        )
        triggers = tuple(
            Trigger(
                time=t["time"],
                moves=(
                    tuple((m["vm_id"], m["target_host"]) for m in t["moves"])
                    if "moves" in t
                    else None
                ),
            )
            for t in doc["triggers"]
        )
        policy = Policy(**doc.get("policy", {}))
    except KeyError as exc:
        raise ScenarioError(f"missing scenario field: {exc}") from None

    host_ids = {h.host_id for h in hosts}
    for vm in vms:
        if vm.host not in host_ids:
            raise ScenarioError(f"vm {vm.vm_id} placed on unknown host {vm.host}")

    migration = dict(doc.get("migration", {}))
    allowed = {
        "page_size",
        "max_rounds",
        "dirty_page_threshold",
        "transfer_cap_factor",
        "activation_overhead",
    }
    unknown = set(migration) - allowed
    if unknown:
        raise ScenarioError(f"unknown migration parameter(s): {sorted(unknown)}")

    return Scenario(
        name=doc.get("name", "scenario"),
        interval=float(doc.get("interval", 15.0)),
        seed=int(doc.get("seed", 0)),
        hosts=hosts,
        vms=vms,
        triggers=tuple(sorted(triggers, key=lambda t: t.time)),
        policy=policy,
        migration=migration,
        classifier=dict(doc.get("classifier", {})),
    )


def _build_trace(scenario: Scenario, vm: ScenarioVM, index: int) -> LoadSeries:
    if vm.workload is not None:
        spec = vm.workload
        phases = []
        for p in spec["phases"]:
            if isinstance(p, dict):
                phases.append(PhaseSpec(**p))
            else:
                phases.append(PhaseSpec(p[0], p[1]))
        return synthesize(
            phases,
            repetitions=int(spec.get("repetitions", 1)),
            interval=scenario.interval,
            noise=float(spec.get("noise", 0.0)),
            seed=int(spec.get("seed", scenario.seed + index)),
            vm_id=vm.vm_id,
        )
    with open(vm.trace_file, "rb") as fh:
        raw = parse_trace(fh, vm_id=vm.vm_id, interval=scenario.interval)
    return resample(raw, scenario.interval)


# --------------------------------------------------------------------------
# scenario report


@dataclass
class VMRecord:
    """Everything the report keeps about one migration request."""

    vm_id: str
    request: MigrationRequest
    decision: Decision
    outcome: MigrationOutcome | None = None
    executed_at: float | None = None  # transfer start
    transfer_end: float | None = None
    finished_at: float | None = None  # transfer end plus activation
    class_at_request: str | None = None
    class_at_execution: str | None = None

    def to_dict(self) -> dict:
        return {
            "vm_id": self.vm_id,
            "request": {
                "vm_id": self.request.vm_id,
                "source_host": self.request.source_host,
                "target_host": self.request.target_host,
                "submitted_at": self.request.submitted_at,
            },
            "decision": self.decision.to_dict(),
            "outcome": self.outcome.to_dict() if self.outcome else None,
            "executed_at": self.executed_at,
            "transfer_end": self.transfer_end,
            "finished_at": self.finished_at,
            "class_at_request": self.class_at_request,
            "class_at_execution": self.class_at_execution,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "VMRecord":
        outcome = None
        if d["outcome"] is not None:
            o = d["outcome"]
            outcome = MigrationOutcome(
                t_mig=o["t_mig"],
                t_down=o["t_down"],
                transferred=o["transferred"],
                rounds=o["rounds"],
                stop_reason=o["stop_reason"],
                bounds=(
                    o["bounds"]["lower_mig"],
                    o["bounds"]["upper_mig"],
                    o["bounds"]["upper_down"],
                ),
            )
        r = d["request"]
        dec = d["decision"]
        return cls(
            vm_id=d["vm_id"],
            request=MigrationRequest(
                r["vm_id"], r["source_host"], r["target_host"], r["submitted_at"]
            ),
            decision=Decision(
                dec["vm_id"], dec["kind"], dec["scheduled_at"], dec["reason"]
            ),
            outcome=outcome,
            executed_at=d["executed_at"],
            transfer_end=d["transfer_end"],
            finished_at=d["finished_at"],
            class_at_request=d["class_at_request"],
            class_at_execution=d["class_at_execution"],
        )


@dataclass
class ScenarioReport:
    scenario_name: str
    mode: str
    interval: float
    link_bandwidth: float
    seed: int
    vms: list
    timelines: dict  # vm_id -> "LNN..." classification string
    totals: dict = field(default_factory=dict)

    def compute_totals(self):
        executed = [r for r in self.vms if r.outcome is not None]
        self.totals = {
            "migrations_executed": len(executed),
            "migrations_cancelled": sum(
                1 for r in self.vms if r.decision.kind == KIND_CANCELLED
            ),
            "data_traffic_mb": sum(r.outcome.transferred for r in executed),
            "total_migration_time": sum(r.outcome.t_mig for r in executed),
            "total_downtime": sum(r.outcome.t_down for r in executed),
            "wall_clock_span": (
                max(r.finished_at for r in executed)
                - min(r.request.submitted_at for r in self.vms)
                if executed
                else 0.0
            ),
        }

    def to_dict(self) -> dict:
        return {
            "scenario_name": self.scenario_name,
            "mode": self.mode,
            "interval": self.interval,
            "link_bandwidth": self.link_bandwidth,
            "seed": self.seed,
            "vms": [r.to_dict() for r in self.vms],
            "timelines": self.timelines,
            "totals": self.totals,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioReport":
        return cls(
            scenario_name=d["scenario_name"],
            mode=d["mode"],
            interval=d["interval"],
            link_bandwidth=d["link_bandwidth"],
            seed=d["seed"],
            vms=[VMRecord.from_dict(v) for v in d["vms"]],
            timelines=dict(d["timelines"]),
            totals=dict(d["totals"]),
        )

    @classmethod
    def from_json(cls, text: str) -> "ScenarioReport":
        return cls.from_dict(json.loads(text))


def _timeline_string(classes: ClassificationSeries) -> str:
    return "".join("L" if c else "N" for c in classes.lm_mask())


def class_at(timeline: str, interval: float, t: float) -> str:
    """Workload class (LM/NLM) at absolute time ``t`` from a timeline string."""
    if not timeline:
        return NLM
    i = min(int(t // interval + 1e-9), len(timeline) - 1)
    return LM if timeline[max(i, 0)] == "L" else NLM


# --------------------------------------------------------------------------
# event loop


class _ActiveMigration:
    def __init__(self, record: VMRecord, state: PrecopyState, share_at_start: float):
        self.record = record
        self.state = state
        self.share_at_start = share_at_start


def run(scenario: Scenario, mode: str | None = None) -> ScenarioReport:
    """Execute a scenario and return its report.

    ``mode`` overrides the policy mode from the config (used to run the
    same scenario under both policies). The loop is single threaded and
    deterministic: identical inputs give byte-identical report JSON.
    """
    policy = scenario.policy
    if mode is not None:
        policy = Policy(
            mode=mode,
            max_wait=policy.max_wait,
            cancel_horizon=policy.cancel_horizon,
            link_bandwidth=policy.link_bandwidth,
            max_concurrent=policy.max_concurrent,
        )

    interval = scenario.interval
    vm_by_id = {vm.vm_id: vm for vm in scenario.vms}
    traces = {
        vm.vm_id: _build_trace(scenario, vm, i) for i, vm in enumerate(scenario.vms)
    }
    model = default_model(**scenario.classifier)
    classes = {vm_id: classify_series(model, tr) for vm_id, tr in traces.items()}
    timelines = {vm_id: _timeline_string(c) for vm_id, c in classes.items()}

    mig_defaults = dict(scenario.migration)
    placement = {vm.vm_id: vm.host for vm in scenario.vms}

    triggers = [
        Trigger(time=_grid_ceil(t.time, interval), moves=t.moves)
        for t in sorted(scenario.triggers, key=lambda t: t.time)
    ]

    records: dict[str, VMRecord] = {}
    order: list[str] = []  # request arrival order, for stable report layout
    pending: list[tuple[float, int, str]] = []  # (scheduled_at, seq, vm_id)
    waiting: list[str] = []  # FIFO overflow beyond max_concurrent
    active: dict[str, _ActiveMigration] = {}
    seq = 0

    def profile_for(vm_id: str, now: float):
        """Cycle profile from data before ``now``; None when unusable."""
        m = int(now // interval + 1e-9)
        window = classes[vm_id].slice(m)
        try:
            est = _cycles.detect_cycle_size(window)
        except _cycles.InsufficientDataError:
            return None
        if est.acyclic or m < 2 * est.cycle_size:  # warm-up: two full cycles
            return None
        return _cycles.decompose(window, cycle_size=est.cycle_size)

    def handle_trigger(trig: Trigger, now: float):
        nonlocal seq
        if trig.moves is not None:
            requests = []
            for vm_id, target in trig.moves:
                if vm_id not in vm_by_id:
                    raise ScenarioError(f"trigger names unknown vm {vm_id}")
                if placement[vm_id] == target:
                    continue  # already where consolidation wants it
                requests.append(
                    MigrationRequest(vm_id, placement[vm_id], target, now)
                )
        else:
            specs = [
                VMSpec(vm.vm_id, vm.vcpus, vm.mem, placement[vm.vm_id])
                for vm in scenario.vms
            ]
            requests = plan(scenario.hosts, specs, submitted_at=now)

        for req in requests:
            if req.vm_id in records:
                raise ScenarioError(f"vm {req.vm_id} has more than one migration request")
            trace = traces[req.vm_id]
            if now > trace.end_time:
                raise ScenarioError(
                    f"trace of vm {req.vm_id} ends at {trace.end_time}s, "
                    f"before its request at {now}s"
                )
            vm = vm_by_id[req.vm_id]
            upper = (
                (mig_defaults.get("max_rounds", 29) + 1)
                * vm.mem
                / policy.link_bandwidth
            )
            decision = decide(
                req,
                profile_for(req.vm_id, now) if policy.mode == MODE_ALMA else None,
                now,
                policy,
                interval,
                workload_end=trace.end_time,
                mig_upper_bound=upper,
            )
            record = VMRecord(
                vm_id=req.vm_id,
                request=req,
                decision=decision,
                class_at_request=class_at(timelines[req.vm_id], interval, now),
            )
            records[req.vm_id] = record
            order.append(req.vm_id)
            if decision.kind != KIND_CANCELLED:
                if decision.scheduled_at > traces[req.vm_id].end_time:
                    raise ScenarioError(
                        f"trace of vm {req.vm_id} ends before its scheduled "
                        f"migration at {decision.scheduled_at}s"
                    )
                pending.append((decision.scheduled_at, seq, req.vm_id))
                seq += 1
        pending.sort()

    def activate(vm_id: str, now: float):
        record = records[vm_id]
        vm = vm_by_id[vm_id]
        params = MigrationParams(
            v_mem=vm.mem, bandwidth=policy.link_bandwidth, **mig_defaults
        )
        state = PrecopyState(
            params, StepRate(traces[vm_id]), start_time=now
        )
        record.executed_at = now
        record.class_at_execution = class_at(timelines[vm_id], interval, now)
        active[vm_id] = _ActiveMigration(record, state, policy.link_bandwidth)

    def finalize(vm_id: str):
        entry = active.pop(vm_id)
        state = entry.state
        record = entry.record
        record.transfer_end = state.transfer_end
        record.finished_at = state.transfer_end + state.params.activation_overhead
        record.outcome = state.outcome(reference_bandwidth=entry.share_at_start)
        placement[vm_id] = record.request.target_host

    now = 0.0
    trig_i = 0
    while trig_i < len(triggers) or pending or active or waiting:
        share = policy.link_bandwidth / len(active) if active else None
        horizon = math.inf
        if trig_i < len(triggers):
            horizon = min(horizon, triggers[trig_i].time)
        if pending:
            horizon = min(horizon, pending[0][0])
        if active:
            horizon = min(
                horizon,
                min(e.state.projected_finish(share) for e in active.values()),
            )
        if waiting and not active:
            horizon = min(horizon, now)  # a queue slot is free right now
        if horizon is math.inf:
            raise ScenarioError("event loop stalled with nothing to do")

        for e in active.values():
            e.state.advance(share, until=horizon)
        now = max(now, horizon)

        for vm_id in sorted(vid for vid, e in active.items() if e.state.done):
            finalize(vm_id)

        while trig_i < len(triggers) and triggers[trig_i].time <= now:
            handle_trigger(triggers[trig_i], max(now, triggers[trig_i].time))
            trig_i += 1

        while pending and pending[0][0] <= now:
            _, _, vm_id = pending.pop(0)
            waiting.append(vm_id)

        while waiting and (
            policy.max_concurrent is None or len(active) < policy.max_concurrent
        ):
            vm_id = waiting.pop(0)
            activate(vm_id, now)
        for e in active.values():  # same-instant starts share the link equally
            if e.record.executed_at == now:
                e.share_at_start = policy.link_bandwidth / len(active)

    report = ScenarioReport(
        scenario_name=scenario.name,
        mode=policy.mode,
        interval=interval,
        link_bandwidth=policy.link_bandwidth,
        seed=scenario.seed,
        vms=[records[v] for v in order],
        timelines=timelines,
    )
    report.compute_totals()
    return report


# --------------------------------------------------------------------------
# scalability probe


def throughput_probe(
    n_vms: int,
    samples_per_vm: int,
    interval: float = 15.0,
    seed: int = 0,
) -> dict:
    """Measure per-VM analysis latency: classify, decompose, decide.

    Synthesizes ``n_vms`` cyclic load streams (generation is untimed), then
    times the full analysis pipeline over each. Returns total and per-VM
    wall-clock seconds.
    """
    if n_vms < 0 or samples_per_vm < 0:
        raise ScenarioError("n_vms and samples_per_vm must be >= 0")
    if n_vms == 0 or samples_per_vm == 0:
        return {
            "n_vms": n_vms,
            "samples_per_vm": samples_per_vm,
            "total_seconds": 0.0,
            "per_vm_seconds": 0.0,
        }

    model = default_model()
    policy = Policy(mode=MODE_ALMA, max_wait=1e9, link_bandwidth=100.0)
    phases = [
        PhaseSpec("MEM", 20 * interval),
        PhaseSpec("IDLE", 20 * interval),
        PhaseSpec("CPU", 20 * interval),
    ]
    cycle_samples = 60
    reps = samples_per_vm // cycle_samples + 1

    total = 0.0
    for i in range(n_vms):
        series = synthesize(
            phases, repetitions=reps, interval=interval, noise=0.05, seed=seed + i,
            vm_id=f"vm{i}",
        )
        series = LoadSeries(
            vm_id=series.vm_id,
            interval=interval,
            timestamps=series.timestamps[:samples_per_vm],
            cpu=series.cpu[:samples_per_vm],
            mem=series.mem[:samples_per_vm],
            dirty_rate=series.dirty_rate[:samples_per_vm],
            io_rate=series.io_rate[:samples_per_vm],
        )
        request = MigrationRequest(series.vm_id, "a", "b", 0.0)

        t0 = _time.perf_counter()
        cls = classify_series(model, series)
        try:
            est = _cycles.detect_cycle_size(cls)
            profile = (
                None
                if est.acyclic
                else _cycles.decompose(cls, cycle_size=est.cycle_size, mode="majority")
            )
        except _cycles.InsufficientDataError:
            profile = None
        now = float(series.timestamps[-1]) if len(series) else 0.0
        decide(request, profile, now, policy, interval)
        total += _time.perf_counter() - t0

    return {
        "n_vms": n_vms,
        "samples_per_vm": samples_per_vm,
        "total_seconds": total,
        "per_vm_seconds": total / n_vms,
    }
