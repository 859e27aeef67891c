"""Modified differential evolution for many-objective maximization.

The loop follows the classic DE steps (initialize, mutate, recombine,
select) with three modifications: survivor selection uses the favour
relation instead of Pareto dominance, candidates whose distance to the
ideal objective vector stagnates are re-initialized (at most one per
generation), and the run stops early once the population's best ideal
distance stays flat for a window of generations.

An archive of favour-non-dominated solutions preserves candidates that the
restart rule or selection churn would otherwise destroy.  It feeds only the
final decision step, never the evolution loop.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from eegtransfer.data import WeightMatrix, reshape_row_major
from eegtransfer.errors import ConfigError, DataError, EegTransferError


@dataclass(frozen=True)
class MaooConfig:
    """Optimizer parameters; defaults follow the reference setup."""

    n: int                       # decision dimension (D * d)
    M: int = 6                   # objective count
    NP: int = 100
    G_max: int = 2000
    CR: float = 0.8
    F_range: tuple[float, float] = (0.0, 2.0)
    bounds: tuple[float, float] = (0.0, 1.0)
    restart_delta: float = 0.1
    restart_window: int = 10
    stop_delta: float = 0.01
    stop_window: int = 50
    archive_size: int = 200
    rng_seed: int = 0

    def __post_init__(self):
        if self.n < 1 or self.M < 1:
            raise ConfigError("decision and objective dimensions must be >= 1")
        if self.NP < 4:
            raise ConfigError("NP must be >= 4 (mutation draws 4 distinct indices)")
        if self.G_max < 1:
            raise ConfigError("G_max must be >= 1")
        if not (0.0 <= self.CR <= 1.0):
            raise ConfigError("CR must lie in [0, 1]")
        lo, hi = self.F_range
        if not (0.0 <= lo < hi <= 2.0):
            raise ConfigError("F_range must be a sub-interval of (0, 2)")
        if self.bounds[0] > self.bounds[1]:
            raise ConfigError("lower bound above upper bound")
        if self.restart_window < 1 or self.stop_window < 1:
            raise ConfigError("stagnation windows must be >= 1")
        if self.archive_size < 1:
            raise ConfigError("archive_size must be >= 1")


@dataclass(frozen=True)
class Candidate:
    """Evaluated solution: decision vector, objectives, ideal distance."""

    x: np.ndarray
    f: np.ndarray
    idist: float

    def __post_init__(self):
        x = np.asarray(self.x, dtype=np.float64)
        f = np.asarray(self.f, dtype=np.float64)
        x.setflags(write=False)
        f.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "f", f)


@dataclass(frozen=True)
class TraceRow:
    """Per-generation progress: best ideal distance and objective maxima."""

    generation: int
    min_idist: float
    objective_max: tuple[float, ...]


def ideal_distance(f: np.ndarray, M: int | None = None) -> float:
    """Euclidean distance from an objective vector to the ideal (all ones)."""
    f = np.asarray(f, dtype=np.float64)
    if M is not None and f.shape != (M,):
        raise DataError(f"objective vector of length {f.size}, expected {M}")
    return float(np.sqrt(np.sum((f - 1.0) ** 2)))


def _check_pair(f1, f2):
    f1 = np.asarray(f1, dtype=np.float64)
    f2 = np.asarray(f2, dtype=np.float64)
    if f1.shape != f2.shape or f1.ndim != 1:
        raise DataError("objective vectors must share one length")
    return f1, f2


def pareto_dominates(f1, f2) -> bool:
    """True iff f1 >= f2 everywhere and f1 > f2 somewhere (maximization)."""
    f1, f2 = _check_pair(f1, f2)
    return bool(np.all(f1 >= f2) and np.any(f1 > f2))


def favour_dominates(f1, f2) -> bool:
    """True iff f1 beats f2 in strictly more objectives than vice versa.

    Ties in the counts mean the two vectors are mutually non-dominated.
    """
    f1, f2 = _check_pair(f1, f2)
    return int(np.count_nonzero(f1 > f2)) > int(np.count_nonzero(f2 > f1))


def initialize(cfg: MaooConfig, rng: np.random.Generator) -> np.ndarray:
    """Uniform population in the box bounds, shape (NP, n)."""
    lo, hi = cfg.bounds
    return lo + rng.random((cfg.NP, cfg.n)) * (hi - lo)


def initialize_one(cfg: MaooConfig, rng: np.random.Generator) -> np.ndarray:
    """Single decision vector drawn by the initialization formula."""
    lo, hi = cfg.bounds
    return lo + rng.random(cfg.n) * (hi - lo)


def donor_vector(x1: np.ndarray, x2: np.ndarray, x3: np.ndarray, F: float,
                 bounds: tuple[float, float]) -> np.ndarray:
    """X_r1 + F * (X_r2 - X_r3), clamped to the box bounds."""
    return np.clip(x1 + F * (np.asarray(x2) - x3), bounds[0], bounds[1])


def mutate(population_x: np.ndarray, i: int, F: float,
           rng: np.random.Generator, bounds: tuple[float, float]) -> np.ndarray:
    """Donor built from three uniformly drawn indices, all distinct from i
    and from each other."""
    NP = population_x.shape[0]
    if NP < 4:
        raise DataError("population too small for three distinct donor indices")
    pool = np.delete(np.arange(NP), i)
    r1, r2, r3 = rng.choice(pool, size=3, replace=False)
    return donor_vector(population_x[r1], population_x[r2], population_x[r3],
                        F, bounds)


def recombine(x: np.ndarray, v: np.ndarray, CR: float,
              rng: np.random.Generator) -> np.ndarray:
    """Binomial crossover; one coordinate always inherits from the donor."""
    x = np.asarray(x, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if x.shape != v.shape or x.ndim != 1:
        raise DataError("candidate and donor lengths differ")
    mask = rng.random(x.shape[0]) <= CR
    mask[rng.integers(x.shape[0])] = True
    return np.where(mask, v, x)


def select_keeps_candidate(candidate_f: np.ndarray, trial_f: np.ndarray) -> bool:
    """Survivor rule: the candidate survives only by favour-dominating the
    trial; in every other case (including mutual non-dominance) the trial
    replaces it."""
    return favour_dominates(candidate_f, trial_f)


class Archive:
    """Bounded set of mutually favour-non-dominated candidates.

    Newcomers dominated by a member are rejected; members dominated by a
    newcomer are evicted.  Over capacity, the member farthest from the
    ideal vector is dropped.
    """

    def __init__(self, capacity: int = 200):
        if capacity < 1:
            raise ConfigError("archive capacity must be >= 1")
        self.capacity = capacity
        self._members: list[Candidate] = []

    def __len__(self) -> int:
        return len(self._members)

    @property
    def members(self) -> tuple[Candidate, ...]:
        return tuple(self._members)

    def consider(self, candidate: Candidate) -> bool:
        """Offer a candidate; returns True when it was admitted."""
        if self._members:
            F = np.stack([m.f for m in self._members])
            wins = np.count_nonzero(F > candidate.f, axis=1)
            losses = np.count_nonzero(candidate.f > F, axis=1)
            if np.any(wins > losses):
                return False
            keep = wins >= losses       # evict members the newcomer favour-dominates
            self._members = [m for m, k in zip(self._members, keep) if k]
        self._members.append(candidate)
        if len(self._members) > self.capacity:
            worst = max(range(len(self._members)),
                        key=lambda j: self._members[j].idist)
            self._members.pop(worst)
        return True


def stagnant_slot(histories: list[deque], idists: np.ndarray,
                  delta: float, window: int) -> int | None:
    """Slot to re-initialize: among candidates whose ideal distance moved
    less than delta across the last `window` generations, the one closest
    to the ideal vector.  None when no candidate qualifies."""
    eligible = [i for i, h in enumerate(histories)
                if len(h) == window + 1 and (max(h) - min(h)) < delta]
    if not eligible:
        return None
    return min(eligible, key=lambda i: (idists[i], i))


@dataclass
class MaooResult:
    population: list[Candidate]
    archive: Archive
    trace: list[TraceRow]
    stopped_early: bool

    @property
    def generations(self) -> int:
        return self.trace[-1].generation


class DemoOptimizer:
    """Evolution loop binding the operators together.

    Mutation and selection run against the generation-start snapshot, so
    fitness evaluations within a generation are independent.  Randomness is
    split into per-purpose streams (initialization, index draws, scale
    factors, crossover) derived from the config seed.
    """

    def __init__(self, cfg: MaooConfig, fitness):
        self.cfg = cfg
        self.fitness = fitness
        streams = np.random.SeedSequence(cfg.rng_seed).spawn(4)
        self._rng_init = np.random.default_rng(streams[0])
        self._rng_index = np.random.default_rng(streams[1])
        self._rng_scale = np.random.default_rng(streams[2])
        self._rng_cross = np.random.default_rng(streams[3])

    def _evaluate(self, x: np.ndarray) -> np.ndarray:
        f = np.asarray(self.fitness(x), dtype=np.float64)
        if f.shape != (self.cfg.M,):
            raise EegTransferError(
                f"fitness returned {f.shape}, expected ({self.cfg.M},)")
        if not np.isfinite(f).all():
            raise EegTransferError("fitness returned non-finite objectives")
        return f

    def run(self) -> MaooResult:
        cfg = self.cfg
        X = initialize(cfg, self._rng_init)
        F = np.stack([self._evaluate(x) for x in X])
        idists = np.array([ideal_distance(f) for f in F])
        histories = [deque([idists[i]], maxlen=cfg.restart_window + 1)
                     for i in range(cfg.NP)]
        archive = Archive(cfg.archive_size)
        trace = [self._trace_row(0, F, idists)]
        stop_hist = deque([idists.min()], maxlen=cfg.stop_window + 1)
        stopped_early = False

        for G in range(1, cfg.G_max + 1):
            snapshot_x = X.copy()
            snapshot_f = F.copy()
            lo, hi = cfg.F_range
            for i in range(cfg.NP):
                Fi = lo + self._rng_scale.random() * (hi - lo)
                donor = mutate(snapshot_x, i, Fi, self._rng_index, cfg.bounds)
                trial = recombine(snapshot_x[i], donor, cfg.CR, self._rng_cross)
                trial_f = self._evaluate(trial)
                if not select_keeps_candidate(snapshot_f[i], trial_f):
                    archive.consider(Candidate(snapshot_x[i], snapshot_f[i],
                                               float(idists[i])))
                    X[i] = trial
                    F[i] = trial_f
                    idists[i] = ideal_distance(trial_f)
            for i in range(cfg.NP):
                histories[i].append(idists[i])

            slot = stagnant_slot(histories, idists, cfg.restart_delta,
                                 cfg.restart_window)
            if slot is not None:
                archive.consider(Candidate(X[slot], F[slot], float(idists[slot])))
                X[slot] = initialize_one(cfg, self._rng_init)
                F[slot] = self._evaluate(X[slot])
                idists[slot] = ideal_distance(F[slot])
                histories[slot] = deque([idists[slot]],
                                        maxlen=cfg.restart_window + 1)

            trace.append(self._trace_row(G, F, idists))
            stop_hist.append(idists.min())
            if (len(stop_hist) == cfg.stop_window + 1
                    and max(stop_hist) - min(stop_hist) < cfg.stop_delta):
                stopped_early = True
                break

        population = [Candidate(X[i], F[i], float(idists[i]))
                      for i in range(cfg.NP)]
        return MaooResult(population, archive, trace, stopped_early)

    @staticmethod
    def _trace_row(G: int, F: np.ndarray, idists: np.ndarray) -> TraceRow:
        return TraceRow(G, float(idists.min()),
                        tuple(float(v) for v in F.max(axis=0)))


def run(cfg: MaooConfig, fitness) -> MaooResult:
    """Convenience wrapper around DemoOptimizer."""
    return DemoOptimizer(cfg, fitness).run()


def non_dominated(candidates: list[Candidate]) -> list[Candidate]:
    """Members not favour-dominated by any other member of the pool."""
    if not candidates:
        return []
    F = np.stack([c.f for c in candidates])
    keep = []
    for i, c in enumerate(candidates):
        wins = np.count_nonzero(F > c.f, axis=1)
        losses = np.count_nonzero(c.f > F, axis=1)
        if not np.any(wins > losses):
            keep.append(c)
    return keep


def decide(population: list[Candidate], archive: Archive, d: int,
           ) -> tuple[Candidate, WeightMatrix]:
    """Pick the solution closest to the ideal vector among the
    favour-non-dominated members of population plus archive, and reshape
    its decision vector into the d x D weight matrix."""
    pool = list(population) + list(archive.members)
    if not pool:
        raise DataError("no candidates to decide from")
    front = non_dominated(pool)
    if not front:
        # Favour relations can be cyclic; fall back to the whole pool.
        front = pool
    best = min(front, key=lambda c: c.idist)
    n = best.x.shape[0]
    if n % d != 0:
        raise DataError(f"decision length {n} not divisible by d={d}")
    return best, reshape_row_major(best.x, d, n // d)
