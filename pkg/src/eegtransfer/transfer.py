"""Feature projection, the six-objective fitness, and the optimal-W flow.

The fitness of a decision vector is the metric vector of a classifier
trained on the projected validation-source set and tested on the projected
validation-target set.  A fixed solver seed is shared across evaluations so
the optimization landscape is stationary within a run.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from eegtransfer.data import FeatureMatrix, WeightMatrix
from eegtransfer.errors import ConfigError, DataError
from eegtransfer.maoo import (Candidate, MaooConfig, MaooResult, TraceRow,
                              decide, non_dominated, run)
from eegtransfer.svm import (MetricsVector, confusion, metrics, predict,
                             train_svm)

DEFAULT_SVM_SEED = 0x5EED


@dataclass(frozen=True)
class TransferProblem:
    """Validation sets and dimensions defining one projection search."""

    validation_source: FeatureMatrix
    validation_target: FeatureMatrix
    d: int = 2
    svm_C: float = 1.0
    svm_seed: int = DEFAULT_SVM_SEED

    def __post_init__(self):
        if self.validation_source.dim != self.validation_target.dim:
            raise DataError("validation sets disagree on feature dimension")
        if self.d < 1:
            raise ConfigError("projected dimension d must be >= 1")
        if self.svm_C <= 0:
            raise ConfigError("svm_C must be positive")

    @property
    def dim(self) -> int:
        return self.validation_source.dim

    @property
    def n(self) -> int:
        return self.dim * self.d

    def maoo_config(self, **overrides) -> MaooConfig:
        overrides.setdefault("n", self.n)
        if overrides["n"] != self.n:
            raise ConfigError(f"decision dimension must be {self.n}")
        return MaooConfig(**overrides)


def project(features: FeatureMatrix, weights: WeightMatrix) -> FeatureMatrix:
    """J -> J W^T with labels unchanged."""
    if features.dim != weights.dim:
        raise DataError(
            f"features are {features.dim}-dimensional, weights expect {weights.dim}")
    return FeatureMatrix(features.data @ weights.entries.T, features.labels)


def fitness(x: np.ndarray, problem: TransferProblem) -> np.ndarray:
    """Objective vector of one decision vector (deterministic given x)."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (problem.n,):
        raise DataError(f"decision vector of length {x.size}, expected {problem.n}")
    W = x.reshape(problem.d, problem.dim)
    model = train_svm(problem.validation_source.data @ W.T,
                      problem.validation_source.labels,
                      C=problem.svm_C, seed=problem.svm_seed)
    predicted = predict(model, problem.validation_target.data @ W.T)
    return metrics(confusion(problem.validation_target.labels, predicted)).as_array()


@dataclass
class LearnedProjection:
    """Outcome of one optimizer run over a transfer problem."""

    weights: WeightMatrix
    decided: Candidate
    pareto_front: list[Candidate]
    trace: list[TraceRow]
    result: MaooResult


def learn_projection(problem: TransferProblem,
                     maoo_cfg: MaooConfig | None = None) -> LearnedProjection:
    """Evolve the projection and pick the equi-best compromise solution.

    The exported Pareto front is the favour-non-dominated subset of the
    final population plus the archive; the decided solution is its member
    closest to the ideal objective vector.
    """
    cfg = maoo_cfg if maoo_cfg is not None else problem.maoo_config()
    if cfg.n != problem.n:
        raise ConfigError(f"optimizer dimension {cfg.n} != problem dimension {problem.n}")
    result = run(cfg, lambda x: fitness(x, problem))
    decided, weights = decide(result.population, result.archive, problem.d)
    front = non_dominated(list(result.population) + list(result.archive.members))
    if not front:
        front = [decided]
    return LearnedProjection(weights, decided, front, result.trace, result)


@dataclass(frozen=True)
class TransferEvaluation:
    """Test metrics plus the mean per-instance test latency in seconds."""

    metrics: MetricsVector
    mean_test_latency_s: float


def train_and_test(weights: WeightMatrix | None, train_set: FeatureMatrix,
                   test_set: FeatureMatrix, C: float = 1.0,
                   svm_seed: int = DEFAULT_SVM_SEED) -> TransferEvaluation:
    """Train on the (projected) train set, score the (projected) test set.

    With weights=None the raw features are used (the no-transfer baseline).
    The reported latency covers projection plus prediction per test
    instance.
    """
    if train_set.dim != test_set.dim:
        raise DataError("train and test sets disagree on feature dimension")
    if weights is None:
        model = train_svm(train_set.data, train_set.labels, C=C, seed=svm_seed)
        t0 = time.perf_counter()
        predicted = predict(model, test_set.data)
        elapsed = time.perf_counter() - t0
    else:
        if weights.dim != train_set.dim:
            raise DataError("weight matrix does not match feature dimension")
        model = train_svm(train_set.data @ weights.entries.T, train_set.labels,
                          C=C, seed=svm_seed)
        t0 = time.perf_counter()
        predicted = predict(model, test_set.data @ weights.entries.T)
        elapsed = time.perf_counter() - t0
    result = metrics(confusion(test_set.labels, predicted))
    return TransferEvaluation(result, elapsed / test_set.n)
