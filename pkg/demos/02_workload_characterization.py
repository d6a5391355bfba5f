"""Classifying load samples as LM (migration-suitable) or NLM.

A Naive Bayes model over discretized load indexes decides, sample by
sample, whether a moment is suitable for pre-copy live migration. The
dominant signals are the dirty-page rate and sustained I/O; processor-bound
and idle samples migrate cheaply.
"""

import numpy as np

from cyclemig import (
    LoadSample,
    NBModel,
    PhaseSpec,
    classify,
    classify_series,
    default_model,
    posterior_distribution,
    synthesize,
    synthetic_corpus,
    train,
)

# ---------------------------------------------------------------------------
# Train from scratch on a labeled corpus drawn around the four canonical
# phase profiles (CPU / MEM / IO / IDLE).

samples, labels = synthetic_corpus(n_per_kind=2000, noise=0.25, seed=99)
model = train(list(zip(samples, labels)), bins=10, smoothing=1.0)
print(f"classes: {model.classes}, priors: {np.round(model.priors, 3)}")

probes = {
    "idle":       LoadSample(0, cpu=3, mem=6, dirty_rate=12, io_rate=1),
    "cpu-bound":  LoadSample(0, cpu=97, mem=28, dirty_rate=45, io_rate=4),
    "memory-hot": LoadSample(0, cpu=55, mem=88, dirty_rate=4800, io_rate=12),
    "io-heavy":   LoadSample(0, cpu=35, mem=42, dirty_rate=180, io_rate=520),
}
for name, sample in probes.items():
    cls, post = classify(model, sample)
    print(f"{name:11s} -> {cls:3s} (posterior {post:.3f})")

# the full posterior always normalizes to 1
dist = posterior_distribution(model, probes["memory-hot"])
assert abs(sum(dist.values()) - 1.0) < 1e-9

# ---------------------------------------------------------------------------
# Series classification is vectorized; a MEM/IDLE alternation comes out as
# alternating NLM/LM blocks.

series = synthesize(
    [PhaseSpec("MEM", 300), PhaseSpec("IDLE", 300)], repetitions=3, noise=0.1, seed=3
)
result = classify_series(default_model(), series)
blocks = ["".join("L" if c == "LM" else "N" for c in result.classes[i : i + 20]) for i in range(0, 120, 20)]
print("\nper-phase classification blocks:")
for b in blocks:
    print(" ", b)

# ---------------------------------------------------------------------------
# Models serialize to versioned JSON so runs are reproducible.

restored = NBModel.from_json(default_model().to_json())
assert classify(restored, probes["idle"]) == classify(default_model(), probes["idle"])
print("\nmodel JSON round-trip preserves classifications")
