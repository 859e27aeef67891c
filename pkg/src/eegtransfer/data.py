"""Core value types: trial sets, feature matrices, splits and weight matrices.

All types are immutable after construction (arrays are marked read-only) and
safe to share across concurrent workers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from eegtransfer.errors import DataError

CLASS_LABELS = (1, 2)


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.float64, copy=True)
    a.setflags(write=False)
    return a


def _check_labels(labels) -> np.ndarray:
    labels = np.asarray(labels, dtype=np.int64)
    if labels.ndim != 1:
        raise DataError("labels must be a flat sequence")
    unknown = set(np.unique(labels)) - set(CLASS_LABELS)
    if unknown:
        raise DataError(f"unknown class labels: {sorted(unknown)}")
    for c in CLASS_LABELS:
        if not np.any(labels == c):
            raise DataError(f"class {c} has no instances")
    labels.setflags(write=False)
    return labels


@dataclass(frozen=True)
class TrialSet:
    """Raw multichannel epochs with class labels and channel names.

    Every trial is a (samples x channels) matrix in microvolts; all trials
    share one geometry.  The reference geometry after preprocessing is
    350 samples x 7 channels (3.5 s at 100 Hz).
    """

    trials: np.ndarray          # (n_trials, samples, channels)
    labels: np.ndarray          # (n_trials,), values in {1, 2}
    channel_names: tuple[str, ...]
    sample_rate_hz: float

    def __post_init__(self):
        trials = np.asarray(self.trials, dtype=np.float64)
        if trials.ndim != 3:
            raise DataError("trials must stack to (n_trials, samples, channels)")
        if not np.isfinite(trials).all():
            raise DataError("trial data contains non-finite samples")
        labels = _check_labels(self.labels)
        if trials.shape[0] != labels.shape[0]:
            raise DataError(
                f"{trials.shape[0]} trials but {labels.shape[0]} labels"
            )
        if trials.shape[2] != len(self.channel_names):
            raise DataError(
                f"trials have {trials.shape[2]} channels but "
                f"{len(self.channel_names)} channel names were declared"
            )
        if self.sample_rate_hz <= 0:
            raise DataError("sample_rate_hz must be positive")
        object.__setattr__(self, "trials", _readonly(trials))
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "channel_names", tuple(self.channel_names))

    @property
    def n_trials(self) -> int:
        return self.trials.shape[0]

    @property
    def n_samples(self) -> int:
        return self.trials.shape[1]

    @property
    def n_channels(self) -> int:
        return self.trials.shape[2]


@dataclass(frozen=True)
class FeatureMatrix:
    """N instances of D-dimensional feature vectors plus class labels."""

    data: np.ndarray            # (N, D)
    labels: np.ndarray          # (N,)

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim != 2 or data.shape[0] == 0 or data.shape[1] == 0:
            raise DataError("feature matrix must be a nonempty 2-d array")
        if not np.isfinite(data).all():
            raise DataError("feature matrix contains non-finite entries")
        labels = _check_labels(self.labels)
        if labels.shape[0] != data.shape[0]:
            raise DataError("label count does not match instance count")
        object.__setattr__(self, "data", _readonly(data))
        object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def dim(self) -> int:
        return self.data.shape[1]

    def take(self, indices: np.ndarray) -> "FeatureMatrix":
        return FeatureMatrix(self.data[indices], self.labels[indices])


@dataclass(frozen=True)
class SplitSpec:
    """Hold-out split proportions and seeds.

    The source set keeps `validation_source_fraction` of its instances for
    the validation-source set; the target set keeps the complementary
    fraction for the validation-target set.  Reference counts with 280
    instances and fraction 0.75: 210/70 on the source side, 70/210 on the
    target side.
    """

    validation_source_fraction: float = 0.75
    source_seed: int = 0
    target_seed: int = 1

    def __post_init__(self):
        f = self.validation_source_fraction
        if not (0.0 < f < 1.0):
            raise DataError(f"validation fraction {f} outside (0, 1)")

    @property
    def validation_target_fraction(self) -> float:
        return 1.0 - self.validation_source_fraction


@dataclass(frozen=True)
class WeightMatrix:
    """d x D projection matrix, round-trippable to a flat row-major vector."""

    entries: np.ndarray         # (d, D)

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=np.float64)
        if entries.ndim != 2:
            raise DataError("weight matrix must be 2-d")
        if not np.isfinite(entries).all():
            raise DataError("weight matrix contains non-finite entries")
        object.__setattr__(self, "entries", _readonly(entries))

    @property
    def d(self) -> int:
        return self.entries.shape[0]

    @property
    def dim(self) -> int:
        return self.entries.shape[1]

    def flatten(self) -> np.ndarray:
        """Inverse of reshape_row_major."""
        return self.entries.reshape(-1).copy()


def reshape_row_major(x: np.ndarray, d: int, D: int) -> WeightMatrix:
    """Rebuild a d x D weight matrix from a flat decision vector.

    Entry (i, j) comes from x[i * D + j]; flatten() recovers x exactly.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != d * D:
        raise DataError(f"decision vector of length {x.size} cannot fill {d}x{D}")
    return WeightMatrix(x.reshape(d, D))


def _stratified_indices(labels: np.ndarray, fraction: float,
                        rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Per-class split: first part gets round(fraction * n_class) of each class."""
    first, second = [], []
    for c in CLASS_LABELS:
        idx = rng.permutation(np.flatnonzero(labels == c))
        k = int(round(fraction * idx.size))
        first.extend(idx[:k])
        second.extend(idx[k:])
    return np.sort(np.asarray(first, dtype=np.int64)), np.sort(np.asarray(second, dtype=np.int64))


def split_source(features: FeatureMatrix, spec: SplitSpec,
                 ) -> tuple[FeatureMatrix, FeatureMatrix]:
    """Source-side split: (validation_source, train)."""
    a, b = _stratified_indices(features.labels, spec.validation_source_fraction,
                               np.random.default_rng(spec.source_seed))
    return features.take(a), features.take(b)


def split_target(features: FeatureMatrix, spec: SplitSpec,
                 ) -> tuple[FeatureMatrix, FeatureMatrix]:
    """Target-side split: (validation_target, test)."""
    a, b = _stratified_indices(features.labels, spec.validation_target_fraction,
                               np.random.default_rng(spec.target_seed))
    return features.take(a), features.take(b)


def holdout_split(source: FeatureMatrix, target: FeatureMatrix, spec: SplitSpec,
                  ) -> tuple[FeatureMatrix, FeatureMatrix, FeatureMatrix, FeatureMatrix]:
    """Partition source and target feature sets per the hold-out protocol.

    Returns (validation_source, train, validation_target, test).  Splits are
    stratified per class and driven only by the spec seeds, so the same spec
    always yields the same index sets.  Raises DataError when a class ends up
    with fewer than 2 instances in either training set.
    """
    validation_source, train = split_source(source, spec)
    validation_target, test = split_target(target, spec)

    for name, part in (("validation-source", validation_source), ("train", train)):
        for c in CLASS_LABELS:
            if np.count_nonzero(part.labels == c) < 2:
                raise DataError(
                    f"{name} set has fewer than 2 instances of class {c}")

    return validation_source, train, validation_target, test


def same_subject_split(target: FeatureMatrix, spec: SplitSpec,
                       ) -> tuple[FeatureMatrix, FeatureMatrix, FeatureMatrix, FeatureMatrix]:
    """Split protocol when source and target are the same subject.

    The small validation-target subset doubles as validation-source and
    train set; the remainder is the test set.
    """
    validation_target, test = split_target(target, spec)
    for c in CLASS_LABELS:
        if np.count_nonzero(validation_target.labels == c) < 2:
            raise DataError(
                f"shared validation/train set has fewer than 2 instances of class {c}")
    return validation_target, validation_target, validation_target, test
