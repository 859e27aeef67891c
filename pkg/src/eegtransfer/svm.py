"""Linear soft-margin SVM and the six-metric performance vector.

The solver is a deterministic dual coordinate ascent over the hinge-loss
dual, stopping on a relative duality gap of 1e-3 or a cap of 10*N passes.
The bias is folded into the weights through an augmented constant feature
(so it is lightly regularized, liblinear-style).  Fitness evaluation calls
this thousands of times, so the inner loop is JIT-compiled.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from eegtransfer.errors import DataError

POSITIVE_CLASS = 1      # Class 1 (right hand) is treated as positive
NEGATIVE_CLASS = 2

METRIC_NAMES = ("recall", "precision", "accuracy", "f1", "specificity", "kappa")


@dataclass(frozen=True)
class LinearSvmModel:
    """Trained hyperplane: predict Class 1 iff w.x + b >= 0."""

    w: np.ndarray
    b: float
    C: float
    passes: int = 0
    duality_gap: float = 0.0

    def __post_init__(self):
        w = np.asarray(self.w, dtype=np.float64)
        if not (np.isfinite(w).all() and np.isfinite(self.b)):
            raise DataError("model weights must be finite")
        w.setflags(write=False)
        object.__setattr__(self, "w", w)

    def decision_function(self, features: np.ndarray) -> np.ndarray:
        features = np.asarray(features, dtype=np.float64)
        if features.ndim != 2 or features.shape[1] != self.w.shape[0]:
            raise DataError(
                f"features have {features.shape[-1]} dims, model expects {self.w.shape[0]}")
        return features @ self.w + self.b


@dataclass(frozen=True)
class ConfusionMatrix:
    """Binary counts with Class 1 as the positive class."""

    tp: int
    fn: int
    fp: int
    tn: int

    def __post_init__(self):
        if min(self.tp, self.fn, self.fp, self.tn) < 0:
            raise DataError("confusion counts must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.fn + self.fp + self.tn


@dataclass(frozen=True)
class MetricsVector:
    """Six classification criteria; all equal 1 for perfect classification."""

    recall: float
    precision: float
    accuracy: float
    f1: float
    specificity: float
    kappa: float

    def as_array(self) -> np.ndarray:
        return np.array([self.recall, self.precision, self.accuracy,
                         self.f1, self.specificity, self.kappa])

    @classmethod
    def from_array(cls, values: np.ndarray) -> "MetricsVector":
        return cls(*(float(v) for v in values))


@njit(cache=True)
def _xorshift_next(state):
    state ^= state << np.uint64(13)
    state ^= state >> np.uint64(7)
    state ^= state << np.uint64(17)
    return state


@njit(cache=True)
def _dual_cd(Xa, y, C, q, max_passes, tol, seed):
    """Dual coordinate ascent on the hinge-loss dual with box [0, C].

    Visits coordinates in a seeded random permutation each pass and stops
    when the duality gap of the augmented objective falls below
    tol * max(1, primal).
    """
    n, m = Xa.shape
    alpha = np.zeros(n)
    w = np.zeros(m)
    order = np.arange(n)
    state = np.uint64(seed * np.uint64(2654435769) + np.uint64(0x9E3779B97F4A7C15))
    passes = 0
    gap = np.inf
    for p in range(max_passes):
        for i in range(n - 1, 0, -1):
            state = _xorshift_next(state)
            j = int(state % np.uint64(i + 1))
            tmp = order[i]
            order[i] = order[j]
            order[j] = tmp
        for k in range(n):
            i = order[k]
            g = 0.0
            for t in range(m):
                g += Xa[i, t] * w[t]
            g = y[i] * g - 1.0
            a_old = alpha[i]
            a_new = a_old - g / q[i]
            if a_new < 0.0:
                a_new = 0.0
            elif a_new > C:
                a_new = C
            if a_new != a_old:
                step = (a_new - a_old) * y[i]
                for t in range(m):
                    w[t] += step * Xa[i, t]
                alpha[i] = a_new
        wsq = 0.0
        for t in range(m):
            wsq += w[t] * w[t]
        hinge = 0.0
        alpha_sum = 0.0
        for i in range(n):
            margin = 0.0
            for t in range(m):
                margin += Xa[i, t] * w[t]
            slack = 1.0 - y[i] * margin
            if slack > 0.0:
                hinge += slack
            alpha_sum += alpha[i]
        primal = 0.5 * wsq + C * hinge
        gap = primal - (alpha_sum - 0.5 * wsq)
        passes = p + 1
        if gap <= tol * max(1.0, abs(primal)):
            break
    return w, passes, gap


def train_svm(features: np.ndarray, labels: np.ndarray, C: float = 1.0,
              seed: int = 0, tol: float = 1e-3,
              max_passes: int | None = None) -> LinearSvmModel:
    """Fit the linear SVM on features with labels in {1, 2}.

    Deterministic for a fixed seed.  Raises DataError for single-class or
    non-finite input.
    """
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if features.ndim != 2 or features.shape[1] < 1:
        raise DataError("features must be (N x d) with d >= 1")
    if not np.isfinite(features).all():
        raise DataError("features contain non-finite values")
    if labels.shape != (features.shape[0],):
        raise DataError("labels must match feature rows")
    if C <= 0:
        raise DataError("C must be positive")
    present = set(np.unique(labels))
    if present - {POSITIVE_CLASS, NEGATIVE_CLASS}:
        raise DataError(f"unknown labels {sorted(present)}")
    if len(present) < 2:
        raise DataError("training needs both classes present")

    n = features.shape[0]
    y = np.where(labels == POSITIVE_CLASS, 1.0, -1.0)
    Xa = np.ascontiguousarray(np.hstack([features, np.ones((n, 1))]))
    q = (Xa * Xa).sum(axis=1)
    if max_passes is None:
        max_passes = 10 * n
    w, passes, gap = _dual_cd(Xa, y, float(C), q, int(max_passes), float(tol),
                              np.uint64(seed))
    return LinearSvmModel(w=w[:-1], b=float(w[-1]), C=float(C),
                          passes=int(passes), duality_gap=float(gap))


def predict(model: LinearSvmModel, features: np.ndarray) -> np.ndarray:
    """Class labels for each feature row; ties (margin == 0) go to Class 1."""
    margin = model.decision_function(features)
    return np.where(margin >= 0.0, POSITIVE_CLASS, NEGATIVE_CLASS).astype(np.int64)


def confusion(true_labels: np.ndarray, predicted_labels: np.ndarray) -> ConfusionMatrix:
    """Count agreements and disagreements with Class 1 positive."""
    t = np.asarray(true_labels, dtype=np.int64)
    p = np.asarray(predicted_labels, dtype=np.int64)
    if t.shape != p.shape or t.ndim != 1 or t.size == 0:
        raise DataError("label sequences must be nonempty and equally long")
    for arr in (t, p):
        bad = set(np.unique(arr)) - {POSITIVE_CLASS, NEGATIVE_CLASS}
        if bad:
            raise DataError(f"unknown labels {sorted(bad)}")
    return ConfusionMatrix(
        tp=int(np.count_nonzero((t == POSITIVE_CLASS) & (p == POSITIVE_CLASS))),
        fn=int(np.count_nonzero((t == POSITIVE_CLASS) & (p == NEGATIVE_CLASS))),
        fp=int(np.count_nonzero((t == NEGATIVE_CLASS) & (p == POSITIVE_CLASS))),
        tn=int(np.count_nonzero((t == NEGATIVE_CLASS) & (p == NEGATIVE_CLASS))),
    )


def _ratio(num: float, den: float) -> float:
    """0/0 maps to 0 so degenerate candidates are penalized, not rewarded."""
    return num / den if den != 0 else 0.0


def metrics(cm: ConfusionMatrix) -> MetricsVector:
    """Recall, precision, accuracy, F1, specificity and Cohen's kappa."""
    total = cm.total
    if total == 0:
        raise DataError("empty confusion matrix")
    recall = _ratio(cm.tp, cm.tp + cm.fn)
    precision = _ratio(cm.tp, cm.tp + cm.fp)
    accuracy = (cm.tp + cm.tn) / total
    f1 = _ratio(2.0 * precision * recall, precision + recall)
    specificity = _ratio(cm.tn, cm.tn + cm.fp)
    p_chance = ((cm.tp + cm.fn) * (cm.tp + cm.fp)
                + (cm.fp + cm.tn) * (cm.fn + cm.tn)) / (total * total)
    kappa = _ratio(accuracy - p_chance, 1.0 - p_chance)
    return MetricsVector(recall, precision, accuracy, f1, specificity, kappa)


def evaluate(model: LinearSvmModel, features: np.ndarray,
             labels: np.ndarray) -> MetricsVector:
    """Predict and score in one step."""
    return metrics(confusion(labels, predict(model, features)))
