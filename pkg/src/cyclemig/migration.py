"""Pre-copy live-migration model.

Iterative memory copy with fluid dirty-page regeneration: round 0 moves the
whole VM memory; each later round moves what was dirtied during the previous
round (capped at the VM memory size). The loop stops on the classic
hypervisor conditions -- pending dirty pages under a threshold, a round cap,
or a cumulative transfer cap -- followed by stop-and-copy of the remainder
plus a fixed activation overhead.

Every simulation also carries the analytic migration/downtime limits
``v_mem / bandwidth <= t_mig`` and ``t_mig, t_down <= (max_rounds + 1) *
v_mem / bandwidth``, which hold throughout the supported parameter ranges.

:class:`PrecopyState` exposes the model incrementally so a scheduler can
change the available bandwidth mid-flight; :func:`simulate_precopy` drives
it to completion at constant bandwidth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

STOP_DIRTY_THRESHOLD = "dirty-threshold"
STOP_MAX_ROUNDS = "max-rounds"
STOP_TRANSFER_CAP = "transfer-cap"


class MigrationModelError(ValueError):
    """Invalid migration model parameters."""


@dataclass(frozen=True)
class MigrationParams:
    """Knobs of the pre-copy model for one VM/link pair."""

    v_mem: float  # MB of VM memory
    bandwidth: float  # MB/s available on the link
    page_size: float = 4.0  # KB
    max_rounds: int = 29  # iterative copy rounds allowed
    dirty_page_threshold: float = 50.0  # pages; stop when pending falls below
    transfer_cap_factor: float = 3.0  # stop when transferred > factor * v_mem
    activation_overhead: float = 0.2  # s; reservation/shutdown/activation cost

    def __post_init__(self):
        for name in ("v_mem", "bandwidth", "page_size", "dirty_page_threshold"):
            if getattr(self, name) <= 0:
                raise MigrationModelError(f"{name} must be > 0")
        if self.max_rounds < 1:
            raise MigrationModelError("max_rounds must be >= 1")
        if self.transfer_cap_factor < 1:
            raise MigrationModelError("transfer_cap_factor must be >= 1")
        if self.activation_overhead < 0:
            raise MigrationModelError("activation_overhead must be >= 0")

    @property
    def page_mb(self) -> float:
        return self.page_size / 1024.0


@dataclass(frozen=True)
class MigrationOutcome:
    """Totals of one simulated migration."""

    t_mig: float  # s, submission-to-activation
    t_down: float  # s, stop-and-copy plus activation
    transferred: float  # MB moved over the link
    rounds: int  # iterative copy rounds run
    stop_reason: str
    bounds: tuple[float, float, float]  # (lower_mig, upper_mig, upper_down)

    def to_dict(self) -> dict:
        return {
            "t_mig": self.t_mig,
            "t_down": self.t_down,
            "transferred": self.transferred,
            "rounds": self.rounds,
            "stop_reason": self.stop_reason,
            "bounds": {
                "lower_mig": self.bounds[0],
                "upper_mig": self.bounds[1],
                "upper_down": self.bounds[2],
            },
        }


def bounds(params: MigrationParams) -> tuple[float, float, float]:
    """Analytic (lower_mig, upper_mig, upper_down) for the pre-copy model.

    The lower limit is the idle-VM case, one full memory copy at line rate;
    the upper limits correspond to every allowed round moving the entire
    memory.
    """
    lower = params.v_mem / params.bandwidth
    upper = (params.max_rounds + 1) * params.v_mem / params.bandwidth
    return (lower, upper, upper)


def _wrap_rate(dirty_rate_at, rate_breakpoints):
    """Return an integral(a, b) giving pages dirtied over [a, b]."""
    if hasattr(dirty_rate_at, "integral"):
        return dirty_rate_at.integral
    if rate_breakpoints is None:
        cuts = np.empty(0)
    else:
        cuts = np.asarray(rate_breakpoints, dtype=float)

    def integral(a: float, b: float) -> float:
        if b <= a:
            return 0.0
        inner = cuts[(cuts > a) & (cuts < b)]
        edges = np.concatenate(([a], inner, [b]))
        total = 0.0
        for lo, hi in zip(edges[:-1], edges[1:]):
            total += dirty_rate_at((lo + hi) / 2.0) * (hi - lo)
        return total

    return integral


class PrecopyState:
    """Incremental pre-copy migration; bandwidth may vary between steps.

    Call :meth:`advance` repeatedly with the bandwidth currently available;
    the state is ``done`` once stop-and-copy finishes. The dirty rate is
    treated as piecewise constant between ``rate_breakpoints`` (pass the
    trace sample times for trace-driven rates; a constant rate needs none).
    """

    def __init__(
        self,
        params: MigrationParams,
        dirty_rate_at,
        rate_breakpoints=None,
        start_time: float = 0.0,
    ):
        self.params = params
        self.start_time = float(start_time)
        self.t = float(start_time)
        self._integral = _wrap_rate(dirty_rate_at, rate_breakpoints)

        self.phase = "round"
        self.rounds_completed = 0
        self.round_remaining = params.v_mem
        self.round_dirtied_pages = 0.0
        self.transferred = 0.0
        self.final_remaining = 0.0
        self.final_duration = 0.0
        self.stop_reason: str | None = None
        self.transfer_end: float | None = None

    @property
    def done(self) -> bool:
        return self.phase == "done"

    def advance(self, bandwidth: float, until: float = math.inf) -> None:
        """Run the model at ``bandwidth`` until ``until`` or completion."""
        if bandwidth <= 0:
            raise MigrationModelError("bandwidth must be > 0")
        while not self.done and self.t < until:
            remaining = (
                self.round_remaining if self.phase == "round" else self.final_remaining
            )
            t_need = remaining / bandwidth
            if self.t + t_need <= until:
                dt, completes = t_need, True
                moved = remaining
            else:
                dt, completes = until - self.t, False
                moved = bandwidth * dt

            if self.phase == "round":
                self.round_dirtied_pages += self._integral(self.t, self.t + dt)
                self.round_remaining -= moved
            else:
                self.final_remaining -= moved
                self.final_duration += dt
            self.transferred += moved
            # land exactly on the pause point; a+(b-a) may miss b by one ulp
            self.t = self.t + dt if completes else until

            if completes:
                if self.phase == "round":
                    self._finish_round()
                else:
                    self.phase = "done"
                    self.transfer_end = self.t

    def _finish_round(self):
        p = self.params
        self.rounds_completed += 1
        pending_pages = self.round_dirtied_pages
        pending_mb = min(p.v_mem, pending_pages * p.page_mb)

        # stop checks in order: dirty threshold, transfer cap, round cap
        if pending_pages < p.dirty_page_threshold:
            self._begin_final(pending_mb, STOP_DIRTY_THRESHOLD)
        elif self.transferred > p.transfer_cap_factor * p.v_mem:
            self._begin_final(pending_mb, STOP_TRANSFER_CAP)
        elif self.rounds_completed >= p.max_rounds:
            self._begin_final(pending_mb, STOP_MAX_ROUNDS)
        else:
            self.round_remaining = pending_mb
            self.round_dirtied_pages = 0.0

    def _begin_final(self, pending_mb: float, reason: str):
        self.stop_reason = reason
        self.final_remaining = pending_mb
        if pending_mb == 0.0:
            self.phase = "done"
            self.transfer_end = self.t
        else:
            self.phase = "final"

    def projected_finish(self, bandwidth: float) -> float:
        """Transfer-completion time if ``bandwidth`` stays constant."""
        if self.done:
            return self.transfer_end
        clone = PrecopyState.__new__(PrecopyState)
        clone.__dict__.update(self.__dict__)
        clone.advance(bandwidth)
        return clone.transfer_end

    def outcome(self, reference_bandwidth: float | None = None) -> MigrationOutcome:
        if not self.done:
            raise MigrationModelError("migration still in progress")
        p = self.params
        ref = reference_bandwidth if reference_bandwidth is not None else p.bandwidth
        lo = p.v_mem / ref
        up = (p.max_rounds + 1) * p.v_mem / ref
        return MigrationOutcome(
            t_mig=(self.transfer_end - self.start_time) + p.activation_overhead,
            t_down=self.final_duration + p.activation_overhead,
            transferred=self.transferred,
            rounds=self.rounds_completed,
            stop_reason=self.stop_reason,
            bounds=(lo, up, up),
        )


def simulate_precopy(
    params: MigrationParams,
    dirty_rate_at,
    rate_breakpoints=None,
    start_time: float = 0.0,
) -> MigrationOutcome:
    """Run a pre-copy migration to completion at constant bandwidth.

    ``dirty_rate_at`` maps absolute time (s) to a dirty rate in pages/s;
    pass either a plain callable (with optional ``rate_breakpoints`` where
    the rate steps) or an object exposing ``integral(a, b)`` such as
    :class:`cyclemig.trace.StepRate`.
    """
    state = PrecopyState(params, dirty_rate_at, rate_breakpoints, start_time)
    state.advance(params.bandwidth)
    return state.outcome()
