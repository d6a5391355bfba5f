"""Workload cycle extraction from LM/NLM classification series.

The detector maps the classification to a +/-1 signal, takes the magnitude
spectrum, and reads the cycle size off the dominant non-DC frequency bin.
A detected cycle is decomposed into the index sets of migration-suitable
(array_lm) and unsuitable (array_nlm) positions, from which the remaining
wait until the next suitable moment follows by modular arithmetic.

Indices are 0-based throughout.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .classifier import LM, ClassificationSeries

MIN_SAMPLES = 8
DEFAULT_STRENGTH_THRESHOLD = 4.0

BASIS_ALREADY_LM = "already-LM"
BASIS_WAIT = "wait-for-LM"
BASIS_NO_LM = "no-LM-in-cycle"


class CycleError(ValueError):
    """Cycle analysis failure."""


class InsufficientDataError(CycleError):
    """Series too short for spectral analysis."""


class AcyclicWorkloadError(CycleError):
    """Requested a decomposition but no dominant cycle exists."""


@dataclass(frozen=True)
class CycleEstimate:
    """Outcome of cycle-size detection; ``cycle_size is None`` means acyclic."""

    cycle_size: int | None
    strength: float

    @property
    def acyclic(self) -> bool:
        return self.cycle_size is None


@dataclass(frozen=True)
class CycleProfile:
    """One cycle split into LM and NLM sample positions.

    ``array_lm`` and ``array_nlm`` partition ``range(cycle_size)``; both are
    sorted ascending.
    """

    cycle_size: int
    array_lm: np.ndarray
    array_nlm: np.ndarray
    dominant_period_strength: float = 0.0

    def __post_init__(self):
        object.__setattr__(
            self, "array_lm", np.asarray(self.array_lm, dtype=np.int64)
        )
        object.__setattr__(
            self, "array_nlm", np.asarray(self.array_nlm, dtype=np.int64)
        )
        if self.cycle_size < 1:
            raise CycleError(f"cycle_size must be >= 1, got {self.cycle_size}")
        merged = np.concatenate([self.array_lm, self.array_nlm])
        if sorted(merged.tolist()) != list(range(self.cycle_size)):
            raise CycleError("array_lm and array_nlm must partition the cycle")
        if np.any(np.diff(self.array_lm) <= 0) or np.any(np.diff(self.array_nlm) <= 0):
            raise CycleError("index arrays must be sorted ascending")

    def to_dict(self) -> dict:
        return {
            "cycle_size": int(self.cycle_size),
            "array_lm": self.array_lm.tolist(),
            "array_nlm": self.array_nlm.tolist(),
            "dominant_period_strength": float(self.dominant_period_strength),
        }


@dataclass(frozen=True)
class PostponeResult:
    """Wait (in samples) until the next migration-suitable moment."""

    m_relative: int
    remain_time: int | None
    basis: str

    def __post_init__(self):
        if self.basis not in (BASIS_ALREADY_LM, BASIS_WAIT, BASIS_NO_LM):
            raise CycleError(f"unknown basis {self.basis!r}")
        if (self.remain_time == 0) != (self.basis == BASIS_ALREADY_LM):
            raise CycleError("remain_time must be 0 exactly for already-LM")


def _signal(classes, allow_raw: bool = False) -> np.ndarray:
    """+/-1 signal from labels; optionally a raw numeric series.

    Accepts a ClassificationSeries, an array of LM/NLM labels, or a boolean
    LM mask. With ``allow_raw`` a float series (e.g. a cpu column) passes
    through mean-removed, for spectral detection only: decomposition needs
    actual suitability labels.
    """
    if isinstance(classes, ClassificationSeries):
        mask = classes.lm_mask()
    else:
        arr = np.asarray(classes)
        if arr.dtype.kind in ("U", "S"):
            mask = arr == LM
        elif arr.dtype.kind == "b":
            mask = arr
        elif allow_raw:
            x = arr.astype(float)
            return x - x.mean()
        else:
            raise CycleError("expected LM/NLM labels, got a numeric series")
    return np.where(mask, 1.0, -1.0)


def spectrum(classes) -> tuple[np.ndarray, np.ndarray]:
    """Magnitude spectrum of the +/-1 classification signal.

    Returns ``(bins, magnitudes)`` for the non-negative frequency bins;
    bin ``k`` corresponds to a period of ``n / k`` samples. Raw numeric
    series (e.g. a cpu column) are accepted and analyzed mean-removed.
    """
    x = _signal(classes, allow_raw=True)
    mags = np.abs(np.fft.rfft(x))
    return np.arange(len(mags)), mags


def detect_cycle_size(
    classes,
    threshold: float = DEFAULT_STRENGTH_THRESHOLD,
    min_length: int = MIN_SAMPLES,
) -> CycleEstimate:
    """Estimate the workload cycle size in samples.

    The dominant non-DC bin ``k`` gives ``cycle_size = round(n / k)``; the
    bin position is refined with Jacobsen's complex-coefficient estimator
    so that windows holding a non-integer number of cycles do not skew the
    estimate (exact-multiple windows are unaffected because their leakage
    is zero). ``strength`` is the ratio of the peak magnitude to the mean
    non-DC magnitude; below ``threshold`` the series is reported acyclic.

    Besides LM/NLM labels, a raw load-index series can be analyzed
    directly (it is mean-removed first); decomposition still requires the
    labeled series.
    """
    x = _signal(classes, allow_raw=True)
    n = len(x)
    if n < min_length:
        raise InsufficientDataError(
            f"need at least {min_length} samples, got {n}"
        )
    coeffs = np.fft.rfft(x)
    mags = np.abs(coeffs)
    if len(mags) < 2:
        return CycleEstimate(None, 0.0)
    nondc = mags[1:]
    k = int(np.argmax(nondc)) + 1
    peak = float(mags[k])
    if peak <= n * 1e-12:  # flat spectrum: constant series
        return CycleEstimate(None, 0.0)
    strength = peak / float(nondc.mean())
    if strength < threshold:
        return CycleEstimate(None, strength)

    k_hat = float(k)
    if 1 < k < len(mags) - 1:
        denom = 2.0 * coeffs[k] - coeffs[k - 1] - coeffs[k + 1]
        if denom != 0:
            delta = np.real((coeffs[k - 1] - coeffs[k + 1]) / denom)
            k_hat = k + float(np.clip(delta, -0.5, 0.5))

    cycle_size = int(round(n / k_hat))
    cycle_size = max(2, min(cycle_size, n))
    return CycleEstimate(cycle_size, strength)


def decompose(
    classes,
    cycle_size: int | None = None,
    threshold: float = DEFAULT_STRENGTH_THRESHOLD,
    mode: str = "first",
) -> CycleProfile:
    """Split one cycle of the classification into LM/NLM index arrays.

    With ``mode="first"`` the first ``cycle_size`` entries are read
    directly; ``mode="majority"`` votes per position across all complete
    cycles in the series, which tolerates label noise. Raises
    :class:`AcyclicWorkloadError` when detection finds no cycle.
    """
    if mode not in ("first", "majority"):
        raise CycleError(f"unknown decomposition mode {mode!r}")
    strength = 0.0
    if cycle_size is None:
        est = detect_cycle_size(classes, threshold=threshold)
        if est.acyclic:
            raise AcyclicWorkloadError(
                f"no dominant cycle (strength {est.strength:.2f} < {threshold})"
            )
        cycle_size = est.cycle_size
        strength = est.strength

    x = _signal(classes)
    n = len(x)
    if cycle_size < 1 or cycle_size > n:
        raise CycleError(f"cycle_size {cycle_size} outside [1, {n}]")

    if mode == "first":
        lm = x[:cycle_size] > 0
    else:
        full = n // cycle_size
        window = x[: full * cycle_size].reshape(full, cycle_size)
        lm = window.mean(axis=0) > 0  # ties -> NLM

    idx = np.arange(cycle_size)
    return CycleProfile(
        cycle_size=int(cycle_size),
        array_lm=idx[lm],
        array_nlm=idx[~lm],
        dominant_period_strength=strength,
    )


def remaining_time(profile: CycleProfile, m_current: int) -> PostponeResult:
    """Samples to wait from ``m_current`` until the next LM position.

    The current position inside the cycle is ``m_current mod cycle_size``.
    Inside an LM position the wait is zero. Inside an NLM position the wait
    runs to the smallest larger LM index, wrapping to the next cycle's first
    LM index when none is larger. With no LM positions at all the caller
    must fall back to its own bounded-wait policy.
    """
    if m_current < 0:
        raise CycleError(f"m_current must be >= 0, got {m_current}")
    m_rel = int(m_current) % profile.cycle_size

    if len(profile.array_lm) == 0:
        return PostponeResult(m_relative=m_rel, remain_time=None, basis=BASIS_NO_LM)

    pos = int(np.searchsorted(profile.array_lm, m_rel))
    if pos < len(profile.array_lm) and profile.array_lm[pos] == m_rel:
        return PostponeResult(m_relative=m_rel, remain_time=0, basis=BASIS_ALREADY_LM)

    if pos < len(profile.array_lm):
        remain = int(profile.array_lm[pos]) - m_rel
    else:
        # wrap into the next cycle
        remain = (profile.cycle_size - m_rel) + int(profile.array_lm[0])
    return PostponeResult(m_relative=m_rel, remain_time=remain, basis=BASIS_WAIT)


def oracle_cycle_size(classes) -> int | None:
    """Brute-force period estimate used to cross-check the spectral path.

    Scans every lag ``p`` in ``[2, n // 2]`` and returns the smallest one
    maximizing the self-agreement ``mean(classes[i] == classes[i + p])``.
    Constant series have no period and return ``None``.
    """
    x = _signal(classes)
    n = len(x)
    if n < 4 or np.all(x == x[0]):
        return None
    best_p, best_score = None, -1.0
    for p in range(2, n // 2 + 1):
        score = float(np.mean(x[:-p] == x[p:]))
        if score > best_score + 1e-12:
            best_score = score
            best_p = p
    return best_p
