"""Synthetic classification datasets with controlled label corruption.

Training labels can be independently replaced by a uniform random class
with a configurable probability; validation labels always stay clean.
"""

from dataclasses import dataclass, replace

import numpy as np

from .netcore import substream

GENERATOR_KINDS = ("gaussian-blobs", "concentric-rings")


@dataclass(frozen=True)
class DatasetSpec:
    """Shape of a synthetic dataset. `n` counts all samples; the trailing
    val_fraction of each class is tagged as validation."""

    n: int = 2500
    m: int = 4
    d: int = 10
    kind: str = "gaussian-blobs"
    separation: float = 3.0
    seed: int = 0
    val_fraction: float = 0.2

    def __post_init__(self):
        if not self.n >= self.m >= 2:
            raise ValueError("need n >= m >= 2")
        if self.d < 2:
            raise ValueError("need d >= 2")
        if self.separation <= 0:
            raise ValueError("separation must be positive")
        if self.kind not in GENERATOR_KINDS:
            raise ValueError(f"unknown generator kind {self.kind!r}")
        if not 0.0 <= self.val_fraction < 1.0:
            raise ValueError("val_fraction must lie in [0, 1)")


@dataclass(frozen=True)
class CorruptionSpec:
    """Uniform label noise: each train label is replaced, independently
    with probability noise_fraction, by a uniform draw over all classes
    (the draw may restore the true class). exclude_true switches to a
    uniform draw over the m-1 wrong classes instead."""

    noise_fraction: float = 0.0
    seed: int = 0
    exclude_true: bool = False

    def __post_init__(self):
        if not 0.0 <= self.noise_fraction <= 1.0:
            raise ValueError("noise_fraction must lie in [0, 1]")


@dataclass
class LabeledDataset:
    features: np.ndarray   # (n, d)
    observed: np.ndarray   # (n,) labels used for training
    true: np.ndarray       # (n,) ground-truth labels, never mutated
    is_clean: np.ndarray   # (n,) bool, observed == true
    split: np.ndarray      # (n,) 'train' or 'val'
    m: int

    def train_indices(self):
        return np.flatnonzero(self.split == "train")

    def val_indices(self):
        return np.flatnonzero(self.split == "val")


def _class_directions(m, d, rng):
    dirs = np.zeros((m, d))
    for c in range(m):
        if c < d:
            dirs[c, c] = 1.0
        else:
            v = rng.normal(size=d)
            dirs[c] = v / np.linalg.norm(v)
    return dirs


def make_synthetic(spec: DatasetSpec) -> LabeledDataset:
    """Generate an uncorrupted dataset: balanced classes (within one
    sample), deterministic under the spec seed."""
    rng = substream(spec.seed, "data.synthetic")
    labels = np.arange(spec.n) % spec.m
    if spec.kind == "gaussian-blobs":
        dirs = _class_directions(spec.m, spec.d, rng)
        features = spec.separation * dirs[labels] + rng.normal(size=(spec.n, spec.d))
    else:  # concentric-rings
        radii = spec.separation * (1.0 + labels)
        angles = rng.uniform(0.0, 2.0 * np.pi, size=spec.n)
        features = rng.normal(size=(spec.n, spec.d))
        features[:, 0] = radii * np.cos(angles) + features[:, 0] * 0.25
        features[:, 1] = radii * np.sin(angles) + features[:, 1] * 0.25

    # trailing val_fraction of each class goes to validation
    split = np.full(spec.n, "train", dtype="<U5")
    for c in range(spec.m):
        members = np.flatnonzero(labels == c)
        n_val = int(round(members.size * spec.val_fraction))
        if n_val:
            split[members[members.size - n_val :]] = "val"

    return LabeledDataset(
        features=features,
        observed=labels.copy(),
        true=labels.copy(),
        is_clean=np.ones(spec.n, dtype=bool),
        split=split,
        m=spec.m,
    )


def corrupt_labels(dataset: LabeledDataset, spec: CorruptionSpec) -> LabeledDataset:
    """Return a copy with train labels corrupted; validation untouched."""
    rng = substream(spec.seed, "data.corrupt")
    observed = dataset.true.copy()
    train = dataset.train_indices()
    hit = rng.random(train.size) < spec.noise_fraction
    hit_idx = train[hit]
    if spec.exclude_true:
        offsets = rng.integers(1, dataset.m, size=hit_idx.size)
        observed[hit_idx] = (dataset.true[hit_idx] + offsets) % dataset.m
    else:
        observed[hit_idx] = rng.integers(0, dataset.m, size=hit_idx.size)
    return LabeledDataset(
        features=dataset.features.copy(),
        observed=observed,
        true=dataset.true.copy(),
        is_clean=observed == dataset.true,
        split=dataset.split.copy(),
        m=dataset.m,
    )


def save_csv(dataset: LabeledDataset, path):
    """Write `f0,...,f{d-1},observed,true,is_clean,split` rows; reals carry
    17 significant digits so the round-trip is exact."""
    d = dataset.features.shape[1]
    header = ",".join([f"f{j}" for j in range(d)] + ["observed", "true", "is_clean", "split"])
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(header + "\n")
        for i in range(dataset.features.shape[0]):
            feats = ",".join(f"{x:.17g}" for x in dataset.features[i])
            fh.write(
                f"{feats},{dataset.observed[i]},{dataset.true[i]},"
                f"{int(dataset.is_clean[i])},{dataset.split[i]}\n"
            )


def load_csv(path) -> LabeledDataset:
    with open(path, encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip() and not ln.startswith("#")]
    header = lines[0].split(",")
    d = sum(1 for name in header if name.startswith("f") and name[1:].isdigit())
    expected = [f"f{j}" for j in range(d)] + ["observed", "true", "is_clean", "split"]
    if header != expected:
        raise ValueError(f"unexpected dataset CSV header: {header}")
    rows = [ln.split(",") for ln in lines[1:]]
    features = np.array([[float(x) for x in r[:d]] for r in rows])
    observed = np.array([int(r[d]) for r in rows])
    true = np.array([int(r[d + 1]) for r in rows])
    is_clean = np.array([bool(int(r[d + 2])) for r in rows])
    split = np.array([r[d + 3] for r in rows], dtype="<U5")
    if not np.array_equal(is_clean, observed == true):
        raise ValueError("is_clean column inconsistent with labels")
    return LabeledDataset(
        features=features,
        observed=observed,
        true=true,
        is_clean=is_clean,
        split=split,
        m=int(max(observed.max(), true.max())) + 1,
    )


def resplit(dataset: LabeledDataset, spec: CorruptionSpec) -> LabeledDataset:
    """Convenience: corrupt a fresh copy (alias used by runners)."""
    return corrupt_labels(dataset, replace(spec))
