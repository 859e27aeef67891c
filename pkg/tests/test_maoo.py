import numpy as np
import pytest

from eegtransfer.errors import ConfigError, DataError, EegTransferError
from eegtransfer.maoo import (Archive, Candidate, DemoOptimizer, MaooConfig,
                              decide, donor_vector, favour_dominates,
                              ideal_distance, initialize, mutate,
                              non_dominated, pareto_dominates, recombine, run,
                              select_keeps_candidate, stagnant_slot)
from collections import deque


def surrogate(x):
    """Separable benchmark: every objective is maximized at x_j = 0.5."""
    return 1.0 - np.abs(x - 0.5)


def random_candidate(rng, n=4, M=6):
    f = rng.random(M)
    return Candidate(rng.random(n), f, ideal_distance(f))


def test_config_validation():
    with pytest.raises(ConfigError):
        MaooConfig(n=6, NP=3)
    with pytest.raises(ConfigError):
        MaooConfig(n=6, CR=1.5)
    with pytest.raises(ConfigError):
        MaooConfig(n=6, F_range=(0.0, 2.5))
    with pytest.raises(ConfigError):
        MaooConfig(n=0)


def test_initialize_bounds_and_determinism():
    cfg = MaooConfig(n=8, NP=20, rng_seed=5)
    a = initialize(cfg, np.random.default_rng(5))
    b = initialize(cfg, np.random.default_rng(5))
    assert np.array_equal(a, b)
    assert a.shape == (20, 8)
    assert np.all((a >= 0.0) & (a < 1.0))
    degenerate = MaooConfig(n=3, NP=5, bounds=(0.4, 0.4))
    c = initialize(degenerate, np.random.default_rng(0))
    assert np.all(c == 0.4)


def test_donor_vector_examples():
    bounds = (0.0, 1.0)
    x = np.array([0.3, 0.6])
    assert np.array_equal(donor_vector(x, x, x, 1.7, bounds), x)   # r2 == r3
    other = np.array([0.9, 0.1])
    assert np.array_equal(donor_vector(x, other, np.array([0.2, 0.8]), 0.0,
                                       bounds), x)                 # F -> 0
    clamped = donor_vector(np.array([0.2]), np.array([0.9]), np.array([0.1]),
                           1.5, bounds)
    assert clamped[0] == 1.0          # raw 1.4 clamps to the upper bound


def test_mutate_draws_valid_indices(rng):
    X = rng.random((10, 3))
    for i in range(10):
        seed_rng = np.random.default_rng(77 + i)
        donor = mutate(X, i, 0.9, seed_rng, (0.0, 1.0))
        # replay the index draw to verify the arithmetic
        replay = np.random.default_rng(77 + i)
        pool = np.delete(np.arange(10), i)
        r1, r2, r3 = replay.choice(pool, size=3, replace=False)
        assert len({r1, r2, r3, i}) == 4
        assert np.array_equal(
            donor, np.clip(X[r1] + 0.9 * (X[r2] - X[r3]), 0.0, 1.0))
        assert np.all((donor >= 0.0) & (donor <= 1.0))
    with pytest.raises(DataError):
        mutate(X[:3], 0, 0.5, rng, (0.0, 1.0))


def test_recombine_extremes(rng):
    x = rng.random(20)
    v = rng.random(20)
    assert np.array_equal(recombine(x, v, 1.0, rng), v)
    u = recombine(x, v, 0.0, np.random.default_rng(3))
    diff = np.flatnonzero(u != x)
    assert diff.size == 1
    assert u[diff[0]] == v[diff[0]]
    with pytest.raises(DataError):
        recombine(x, v[:-1], 0.5, rng)


def test_recombine_inheritance_rate():
    rng = np.random.default_rng(0)
    n, CR = 100, 0.8
    x = np.zeros(n)
    v = np.ones(n)
    draws = 1000                       # 1e5 coordinates
    inherited = sum(recombine(x, v, CR, rng).sum() for _ in range(draws))
    fraction = inherited / (draws * n)
    assert abs(fraction - CR) <= 0.03


def test_dominance_examples():
    ones = np.ones(6)
    worse = np.full(6, 0.9)
    assert pareto_dominates(ones, worse)
    assert not pareto_dominates(ones, ones)
    a = np.array([1.0, 0, 0, 0, 0, 0])
    b = np.array([0.0, 1, 0, 0, 0, 0])
    assert not pareto_dominates(a, b) and not pareto_dominates(b, a)
    f1 = np.array([1.0, 1, 1, 0, 0, 0.5])
    f2 = np.array([0.0, 0, 0, 1, 1, 0.5])
    assert favour_dominates(f1, f2)           # 3 wins vs 2
    assert not favour_dominates(f2, f1)
    assert not favour_dominates(a, b) and not favour_dominates(b, a)  # tie
    with pytest.raises(DataError):
        favour_dominates(np.ones(5), np.ones(6))


def test_pareto_implies_favour(rng):
    for _ in range(10_000):
        f1 = rng.random(6)
        f2 = rng.random(6)
        if pareto_dominates(f1, f2):
            assert favour_dominates(f1, f2)


def test_ideal_distance_examples():
    assert ideal_distance(np.ones(6)) == 0.0
    assert ideal_distance(np.zeros(6)) == pytest.approx(np.sqrt(6))
    assert ideal_distance(np.full(6, 0.5)) == pytest.approx(np.sqrt(1.5))
    with pytest.raises(DataError):
        ideal_distance(np.ones(5), M=6)


def test_selection_branches():
    better = np.array([1.0, 1, 1, 1, 1, 1])
    worse = np.array([0.0, 0, 0, 0, 0, 0])
    assert select_keeps_candidate(better, worse)
    assert not select_keeps_candidate(worse, better)
    a = np.array([1.0, 0, 1, 0, 1, 0])
    b = np.array([0.0, 1, 0, 1, 0, 1])
    assert not select_keeps_candidate(a, b)   # mutual non-dominance -> trial


def test_archive_invariant_and_cap(rng):
    archive = Archive(capacity=25)
    for _ in range(300):
        archive.consider(random_candidate(rng))
    members = archive.members
    assert len(members) <= 25
    for i, a in enumerate(members):
        for j, b in enumerate(members):
            if i != j:
                assert not favour_dominates(a.f, b.f)


def test_archive_prunes_largest_idist():
    archive = Archive(capacity=2)
    # pairwise favour-balanced trio: win counts tie in every direction
    f1 = np.array([0.0, 0, 0, 1, 1, 1.0])          # idist sqrt(3)
    f2 = np.array([1.0, 1, 0, 1, 0, 0.0])          # idist sqrt(3)
    f3 = np.array([1.0, 1, 0.9, 0, 0, 0.0])        # idist sqrt(3.01), largest
    for f in (f1, f2, f3):
        assert archive.consider(Candidate(np.zeros(2), f, ideal_distance(f)))
    kept = {tuple(m.f) for m in archive.members}
    assert tuple(f3) not in kept and len(kept) == 2


def test_stagnant_slot_selection():
    window = 10
    flat = deque([0.7] * 11, maxlen=window + 1)
    flat_low = deque([0.3] * 11, maxlen=window + 1)
    moving = deque(np.linspace(1.0, 0.2, 11), maxlen=window + 1)
    short = deque([0.1] * 5, maxlen=window + 1)
    idists = np.array([0.7, 0.3, 0.2, 0.1])
    assert stagnant_slot([flat, flat_low, moving, short], idists, 0.1, window) == 1
    assert stagnant_slot([moving, short], np.array([0.2, 0.1]), 0.1, window) is None


def test_run_constant_fitness_stalls_quickly():
    cfg = MaooConfig(n=4, M=6, NP=10, G_max=500, stop_window=50, rng_seed=1)
    result = run(cfg, lambda x: np.full(6, 0.5))
    assert result.stopped_early
    assert result.generations < 200


def test_run_is_deterministic_and_in_bounds():
    cfg = MaooConfig(n=5, M=6, NP=12, G_max=40, stop_window=50, rng_seed=9)
    seen = []

    def fitness(x):
        assert np.all((x >= 0.0) & (x <= 1.0))
        seen.append(True)
        return surrogate(x)[:6] if x.size >= 6 else np.resize(surrogate(x), 6)

    a = run(cfg, fitness)
    b = run(cfg, fitness)
    assert [(r.generation, r.min_idist, r.objective_max) for r in a.trace] == \
           [(r.generation, r.min_idist, r.objective_max) for r in b.trace]
    for cand in a.population:
        assert np.all((cand.x >= 0.0) & (cand.x <= 1.0))


def test_run_rejects_bad_fitness():
    cfg = MaooConfig(n=3, M=6, NP=6, G_max=5, rng_seed=0)
    with pytest.raises(EegTransferError):
        run(cfg, lambda x: np.full(5, 0.5))
    with pytest.raises(EegTransferError):
        run(cfg, lambda x: np.full(6, np.nan))


def test_surrogate_quick_convergence():
    cfg = MaooConfig(n=6, M=6, NP=40, G_max=150, rng_seed=2)
    result = run(cfg, surrogate)
    best = min(row.min_idist for row in result.trace)
    assert best <= 0.15


def test_decide_examples_and_oracle(rng):
    lone = Candidate(np.array([0.25, 0.5]), np.full(6, 0.5),
                     ideal_distance(np.full(6, 0.5)))
    chosen, W = decide([lone], Archive(10), d=1)
    assert chosen is lone
    assert np.array_equal(W.entries, [[0.25, 0.5]])

    # mutually non-dominated trio: smallest idist wins
    f_a = np.array([1.0, 0, 1, 0, 1, 0.4])     # idist ~ sqrt(2.36)
    f_b = np.array([0.8, 0.8, 0.8, 0.8, 0.8, 0.8])
    f_c = np.array([0.0, 1, 0, 1, 0, 0.9])
    pool = [Candidate(rng.random(4), f, ideal_distance(f))
            for f in (f_a, f_b, f_c)]
    chosen, _ = decide(pool, Archive(10), d=2)
    assert np.array_equal(chosen.f, f_b)

    # brute-force non-dominance filtering oracle on a random pool
    candidates = [random_candidate(rng) for _ in range(50)]
    fast = non_dominated(candidates)
    slow = [c for c in candidates
            if not any(favour_dominates(o.f, c.f) for o in candidates)]
    assert [tuple(c.f) for c in fast] == [tuple(c.f) for c in slow]
    chosen, _ = decide(candidates, Archive(10), d=2)
    expected = min(slow, key=lambda c: c.idist)
    assert chosen.idist == expected.idist


def test_decide_empty_pool_rejected():
    with pytest.raises(DataError):
        decide([], Archive(10), d=2)
