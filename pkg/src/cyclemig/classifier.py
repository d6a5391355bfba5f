"""Naive Bayes workload characterization.

Every load sample is classified as LM (suitable for live migration) or NLM
(not suitable). Features are the four load indexes discretized into
equal-width bins; likelihoods are Laplace-smoothed and accumulated in log
space. A four-class mode (CPU / MEM / IO / IDLE) is supported and collapsed
to LM/NLM through a static suitability map.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .trace import PHASE_LEVELS, LoadSample, LoadSeries

LM = "LM"
NLM = "NLM"
BINARY_CLASSES = (LM, NLM)

FEATURES = ("cpu", "mem", "dirty_rate", "io_rate")

# Suitability of the four workload kinds for pre-copy migration: memory- and
# I/O-bound phases keep dirtying pages, processor-bound and idle ones do not.
KIND_TO_BINARY = {"IDLE": LM, "CPU": LM, "MEM": NLM, "IO": NLM}

MODEL_FORMAT_VERSION = 1


class ClassifierError(ValueError):
    """Invalid classifier configuration or input."""


class TrainingError(ClassifierError):
    """Training data cannot produce a valid model."""


@dataclass(frozen=True)
class FeatureVector:
    """Per-feature bin indices for one sample."""

    cpu_bin: int
    mem_bin: int
    dirty_bin: int
    io_bin: int

    def as_tuple(self):
        return (self.cpu_bin, self.mem_bin, self.dirty_bin, self.io_bin)


@dataclass(frozen=True)
class LabelRule:
    """Ground-truth LM/NLM labeling for synthetic training corpora.

    A sample is LM when all enabled thresholds hold; ``None`` disables a
    threshold. Dirty-page rate dominates migration cost, and sustained I/O
    keeps the page cache hot, so both gate suitability by default.
    """

    dirty_rate_max: float | None = 500.0
    io_rate_max: float | None = 100.0
    cpu_max: float | None = None

    def label(self, sample: LoadSample) -> str:
        checks = (
            (self.dirty_rate_max, sample.dirty_rate),
            (self.io_rate_max, sample.io_rate),
            (self.cpu_max, sample.cpu),
        )
        for limit, value in checks:
            if limit is not None and value > limit:
                return NLM
        return LM

    def label_arrays(self, cpu, dirty_rate, io_rate) -> np.ndarray:
        lm = np.ones(len(cpu), dtype=bool)
        if self.dirty_rate_max is not None:
            lm &= np.asarray(dirty_rate) <= self.dirty_rate_max
        if self.io_rate_max is not None:
            lm &= np.asarray(io_rate) <= self.io_rate_max
        if self.cpu_max is not None:
            lm &= np.asarray(cpu) <= self.cpu_max
        return np.where(lm, LM, NLM)


@dataclass(frozen=True)
class ClassificationSeries:
    """Per-sample workload class and winning posterior for one VM."""

    vm_id: str
    interval: float
    classes: np.ndarray  # of {LM, NLM} strings
    posteriors: np.ndarray  # probability of the reported class

    def __post_init__(self):
        object.__setattr__(self, "classes", np.asarray(self.classes, dtype="<U3"))
        object.__setattr__(
            self, "posteriors", np.asarray(self.posteriors, dtype=float)
        )
        if len(self.classes) != len(self.posteriors):
            raise ClassifierError("classes and posteriors length mismatch")

    def __len__(self) -> int:
        return len(self.classes)

    def lm_mask(self) -> np.ndarray:
        return self.classes == LM

    def slice(self, n: int) -> "ClassificationSeries":
        return ClassificationSeries(
            self.vm_id, self.interval, self.classes[:n], self.posteriors[:n]
        )


class NBModel:
    """Trained Naive Bayes model over discretized load indexes.

    ``classes`` may be the binary (LM, NLM) pair or the four workload kinds;
    ``lm_classes`` lists the classes that map to LM. Priors sum to one and
    every per-class, per-feature likelihood row sums to one with no zero
    entries (Laplace smoothing guarantees it).
    """

    def __init__(self, classes, priors, likelihoods, edges, lm_classes=None):
        self.classes = tuple(classes)
        self.priors = np.asarray(priors, dtype=float)
        self.likelihoods = np.asarray(likelihoods, dtype=float)
        self.edges = [np.asarray(e, dtype=float) for e in edges]
        if lm_classes is None:
            lm_classes = (LM,) if LM in self.classes else tuple(
                c for c in self.classes if KIND_TO_BINARY.get(c) == LM
            )
        self.lm_classes = tuple(lm_classes)
        self._validate()
        self._log_priors = np.log(self.priors)
        self._log_likelihoods = np.log(self.likelihoods)
        self._lm_idx = np.array([c in self.lm_classes for c in self.classes])

    def _validate(self):
        k = len(self.classes)
        if k < 2:
            raise ClassifierError("model needs at least two classes")
        if self.priors.shape != (k,):
            raise ClassifierError("priors shape mismatch")
        if abs(self.priors.sum() - 1.0) > 1e-9:
            raise ClassifierError("priors must sum to 1")
        if self.likelihoods.shape[:2] != (k, len(FEATURES)):
            raise ClassifierError("likelihood table shape mismatch")
        if np.any(self.likelihoods <= 0):
            raise ClassifierError("zero likelihood after smoothing")
        row_sums = self.likelihoods.sum(axis=2)
        if np.any(np.abs(row_sums - 1.0) > 1e-9):
            raise ClassifierError("likelihood rows must sum to 1")
        for e in self.edges:
            if len(e) != self.likelihoods.shape[2] - 1 or np.any(np.diff(e) <= 0):
                raise ClassifierError("bin edges must be strictly increasing")
        for c in self.lm_classes:
            if c not in self.classes:
                raise ClassifierError(f"lm_class {c!r} not among classes")

    @property
    def bins(self) -> int:
        return self.likelihoods.shape[2]

    def to_json(self) -> str:
        doc = {
            "format_version": MODEL_FORMAT_VERSION,
            "classes": list(self.classes),
            "lm_classes": list(self.lm_classes),
            "priors": self.priors.tolist(),
            "likelihoods": self.likelihoods.tolist(),
            "edges": [e.tolist() for e in self.edges],
        }
        return json.dumps(doc, sort_keys=True, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "NBModel":
        doc = json.loads(text)
        version = doc.get("format_version")
        if version != MODEL_FORMAT_VERSION:
            raise ClassifierError(f"unsupported model format version {version!r}")
        return cls(
            classes=doc["classes"],
            priors=doc["priors"],
            likelihoods=doc["likelihoods"],
            edges=doc["edges"],
            lm_classes=doc["lm_classes"],
        )


def discretize_value(value: float, edges: np.ndarray) -> int:
    """Bin index: the count of edges strictly below the value."""
    return int(np.searchsorted(edges, value, side="left"))


def discretize(sample: LoadSample, edges) -> FeatureVector:
    """Map a sample to per-feature bin indices using interior bin edges."""
    values = (sample.cpu, sample.mem, sample.dirty_rate, sample.io_rate)
    bins = [discretize_value(v, np.asarray(e)) for v, e in zip(values, edges)]
    return FeatureVector(*bins)


def _feature_columns(samples):
    cols = np.empty((len(samples), len(FEATURES)))
    for i, s in enumerate(samples):
        cols[i] = (s.cpu, s.mem, s.dirty_rate, s.io_rate)
    return cols


def _equal_width_edges(col: np.ndarray, bins: int) -> np.ndarray:
    lo, hi = float(col.min()), float(col.max())
    if lo == hi:
        # degenerate feature: widen so edges stay strictly increasing
        lo, hi = lo - 0.5, hi + 0.5
    return np.linspace(lo, hi, bins + 1)[1:-1]


def train(labeled, bins: int = 10, smoothing: float = 1.0, classes=None) -> NBModel:
    """Train a model from ``(LoadSample, class)`` pairs.

    Priors use the Laplace form ``(n_c + a) / (n + a * k)``; likelihoods are
    per-class bin frequencies with the same smoothing. Bin edges are equal
    width over the observed range of each feature. Raises
    :class:`TrainingError` if any expected class has no samples.
    """
    if bins < 2:
        raise ClassifierError(f"bins must be >= 2, got {bins}")
    if smoothing <= 0:
        raise ClassifierError(f"smoothing must be > 0, got {smoothing}")

    labeled = list(labeled)
    if not labeled:
        raise TrainingError("empty training set")
    samples = [s for s, _ in labeled]
    labels = np.array([c for _, c in labeled])

    if classes is None:
        classes = BINARY_CLASSES if set(labels) <= set(BINARY_CLASSES) else tuple(
            sorted(set(labels))
        )
    classes = tuple(classes)
    missing = [c for c in classes if not np.any(labels == c)]
    if missing:
        raise TrainingError(f"no training samples for class(es): {missing}")
    unknown = set(labels) - set(classes)
    if unknown:
        raise TrainingError(f"labels outside the class set: {sorted(unknown)}")

    cols = _feature_columns(samples)
    return _train_columns(cols, labels, classes, bins, smoothing)


def _train_columns(cols, labels, classes, bins, smoothing) -> NBModel:
    n, k = len(labels), len(classes)
    edges = [_equal_width_edges(cols[:, f], bins) for f in range(len(FEATURES))]

    priors = np.empty(k)
    likelihoods = np.empty((k, len(FEATURES), bins))
    for ci, c in enumerate(classes):
        mask = labels == c
        n_c = int(mask.sum())
        priors[ci] = (n_c + smoothing) / (n + smoothing * k)
        for f in range(len(FEATURES)):
            idx = np.searchsorted(edges[f], cols[mask, f], side="left")
            counts = np.bincount(idx, minlength=bins).astype(float)
            likelihoods[ci, f] = (counts + smoothing) / (n_c + smoothing * bins)

    return NBModel(classes, priors, likelihoods, edges)


def _log_scores(model: NBModel, cols: np.ndarray) -> np.ndarray:
    """Joint log scores, shape (n_samples, n_classes)."""
    n = cols.shape[0]
    scores = np.broadcast_to(model._log_priors, (n, len(model.classes))).copy()
    for f in range(len(FEATURES)):
        idx = np.searchsorted(model.edges[f], cols[:, f], side="left")
        scores += model._log_likelihoods[:, f, idx].T
    return scores


def _posteriors(scores: np.ndarray) -> np.ndarray:
    m = scores.max(axis=1, keepdims=True)
    p = np.exp(scores - m)
    return p / p.sum(axis=1, keepdims=True)


def posterior_distribution(model: NBModel, sample: LoadSample) -> dict[str, float]:
    """Normalized posterior over all model classes for one sample."""
    scores = _log_scores(model, _feature_columns([sample]))
    post = _posteriors(scores)[0]
    return {c: float(p) for c, p in zip(model.classes, post)}


def classify(model: NBModel, sample: LoadSample) -> tuple[str, float]:
    """Most probable binary class and its posterior; ties go to NLM."""
    post = _posteriors(_log_scores(model, _feature_columns([sample])))[0]
    p_lm = float(post[model._lm_idx].sum())
    if p_lm > 0.5:
        return LM, p_lm
    return NLM, 1.0 - p_lm


def classify_series(model: NBModel, series: LoadSeries) -> ClassificationSeries:
    """Classify every sample of a series as LM or NLM.

    For multi-class models the posterior mass of LM-mapped classes is
    summed, so the reported posterior is always >= 0.5 for the winner.
    A tie (exactly 0.5) is conservatively reported as NLM.
    """
    n = len(series)
    if n == 0:
        return ClassificationSeries(series.vm_id, series.interval, [], [])
    cols = np.column_stack(
        [series.cpu, series.mem, series.dirty_rate, series.io_rate]
    )
    post = _posteriors(_log_scores(model, cols))
    p_lm = post[:, model._lm_idx].sum(axis=1)
    is_lm = p_lm > 0.5
    return ClassificationSeries(
        vm_id=series.vm_id,
        interval=series.interval,
        classes=np.where(is_lm, LM, NLM),
        posteriors=np.where(is_lm, p_lm, 1.0 - p_lm),
    )


def synthetic_corpus(
    kinds=("CPU", "MEM", "IO", "IDLE"),
    n_per_kind: int = 2500,
    noise: float = 0.25,
    seed: int = 1234,
    rule: LabelRule | None = None,
):
    """Labeled samples drawn around the canonical phase profiles.

    Returns ``(samples, labels)`` where labels come from ``rule`` (binary
    mode, the default) or are the phase kinds themselves (``rule=None`` is
    the binary default; pass ``rule="kinds"`` for the four-class corpus).
    """
    rng = np.random.default_rng(seed)
    four_class = rule == "kinds"
    if rule is None or four_class:
        binary_rule = LabelRule()
    else:
        binary_rule = rule

    samples, labels = [], []
    for kind in kinds:
        levels = np.array(PHASE_LEVELS[kind])
        factors = 1.0 + noise * rng.standard_normal((n_per_kind, 4))
        values = levels * factors
        values[:, 0] = np.clip(values[:, 0], 0.0, 100.0)
        values[:, 1] = np.clip(values[:, 1], 0.0, 100.0)
        values[:, 2:] = np.clip(values[:, 2:], 0.0, None)
        for i in range(n_per_kind):
            s = LoadSample(float(i), *values[i])
            samples.append(s)
            labels.append(kind if four_class else binary_rule.label(s))
    return samples, labels


@lru_cache(maxsize=8)
def default_model(seed: int = 1234, bins: int = 10, smoothing: float = 1.0) -> NBModel:
    """Binary model trained on the synthetic four-phase corpus."""
    samples, labels = synthetic_corpus(seed=seed)
    return train(list(zip(samples, labels)), bins=bins, smoothing=smoothing)
