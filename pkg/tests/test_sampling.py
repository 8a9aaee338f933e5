import math
import warnings
from collections import Counter
from itertools import permutations

import numpy as np
import pytest
from scipy import stats

from gitgraphs.counting import build_count_table, build_stirling_table
from gitgraphs.graph import canonical_encode, validate
from gitgraphs.oracle import chi_square_uniformity, enumerate_git_graphs
from gitgraphs.sampling import (
    RandomSource,
    free_positions_from_extractions,
    geometric,
    log_series,
    poisson,
    sample_boltzmann,
    sample_boltzmann_windowed,
    sample_composition,
    sample_exact,
    sample_exact_size_only,
    sample_permutation_with_cycles,
    sample_rejection,
)
from gitgraphs.tuning import BoltzmannParams, log_gf


@pytest.fixture(scope="module")
def stirling():
    return build_stirling_table(12)


def pmf_chi2_pvalue(observed: Counter, pmf, support):
    """Pearson test against an explicit pmf; the tail is lumped into one bin."""
    total = sum(observed.values())
    obs = [observed.get(x, 0) for x in support]
    exp = [total * pmf(x) for x in support]
    obs.append(total - sum(obs))
    exp.append(total - sum(exp))
    return stats.chisquare(obs, exp).pvalue


def perm_key(cycles):
    k = sum(len(c) for c in cycles)
    image = [0] * (k + 1)
    for c in cycles:
        for a, b in zip(c, c[1:] + c[:1]):
            image[a] = b
    return tuple(image[1:])


def count_cycles(perm):
    seen, cycles = set(), 0
    for i in range(1, len(perm) + 1):
        if i not in seen:
            cycles += 1
            j = i
            while j not in seen:
                seen.add(j)
                j = perm[j - 1]
    return cycles


# -- RandomSource -------------------------------------------------------------


def test_random_source_determinism():
    a, b = RandomSource(42), RandomSource(42)
    assert [a.random() for _ in range(5)] == [b.random() for _ in range(5)]
    assert a.np.integers(0, 10**9, 5).tolist() == b.np.integers(0, 10**9, 5).tolist()
    assert RandomSource(42, stream=1).random() != RandomSource(42).random()


def test_random_source_big_randbelow():
    rng = RandomSource(1)
    big = 10**200
    draws = [rng.randbelow(big) for _ in range(100)]
    assert all(0 <= d < big for d in draws)
    assert max(draws) > big // 2


def test_random_source_seed_range():
    with pytest.raises(ValueError):
        RandomSource(-1)
    with pytest.raises(ValueError):
        RandomSource(2**64)


# -- discrete laws ------------------------------------------------------------


def test_poisson_zero_rate():
    rng = RandomSource(0)
    assert all(poisson(0, rng) == 0 for _ in range(100))


def test_poisson_law():
    rng = RandomSource(1)
    lam = 1.5 * math.log(15 / 7)
    obs = Counter(poisson(lam, rng) for _ in range(20000))
    p = pmf_chi2_pvalue(obs, lambda j: math.exp(-lam) * lam**j / math.factorial(j), range(6))
    assert p > 1e-3


def test_log_series_law():
    rng = RandomSource(2)
    p = 8 / 15
    assert p / -math.log1p(-p) == pytest.approx(0.6998, abs=1e-4)
    draws = log_series(p, rng, size=50000)
    obs = Counter(draws.tolist())
    pmf = lambda x: p**x / (x * -math.log1p(-p))
    assert pmf_chi2_pvalue(obs, pmf, range(1, 8)) > 1e-3


def test_log_series_near_one_mean():
    rng = RandomSource(3)
    p = 1 - 1e-4
    draws = log_series(p, rng, size=200000)
    mean = p / ((1 - p) * -math.log1p(-p))
    sd = math.sqrt(p * (-math.log1p(-p) - p) / ((1 - p) ** 2 * math.log1p(-p) ** 2))
    assert abs(draws.mean() - mean) < 4 * sd / math.sqrt(draws.size)


def test_geometric_law():
    rng = RandomSource(4)
    z = 0.4
    obs = Counter(geometric(z, rng, size=50000).tolist())
    assert obs[0] / 50000 == pytest.approx(0.6, abs=0.015)
    assert pmf_chi2_pvalue(obs, lambda m: (1 - z) * z**m, range(8)) > 1e-3
    assert isinstance(geometric(z, rng), int)


@pytest.mark.parametrize(
    "fn, bad", [(poisson, -1.0), (log_series, 0.0), (log_series, 1.0), (geometric, 1.0)]
)
def test_discrete_parameter_errors(fn, bad):
    with pytest.raises(ValueError):
        fn(bad, RandomSource(0))


# -- compositions -------------------------------------------------------------


def test_composition_unique():
    rng = RandomSource(5)
    assert all(sample_composition(2, 2, rng) == [1, 1] for _ in range(50))


def test_composition_positive_uniform():
    rng = RandomSource(6)
    obs = Counter(tuple(sample_composition(3, 2, rng)) for _ in range(20000))
    assert set(obs) == {(1, 2), (2, 1)}
    assert stats.chisquare(list(obs.values())).pvalue > 1e-3


def test_composition_weak_uniform():
    rng = RandomSource(7)
    obs = Counter(tuple(sample_composition(2, 2, rng, positive=False)) for _ in range(30000))
    assert set(obs) == {(0, 2), (1, 1), (2, 0)}
    assert stats.chisquare(list(obs.values())).pvalue > 1e-3


def test_composition_weak_larger_uniform():
    rng = RandomSource(8)
    obs = Counter(tuple(sample_composition(4, 3, rng, positive=False)) for _ in range(30000))
    assert len(obs) == math.comb(6, 2)
    assert all(sum(c) == 4 and min(c) >= 0 for c in obs)
    assert stats.chisquare(list(obs.values())).pvalue > 1e-3


def test_composition_edge_cases():
    rng = RandomSource(9)
    assert sample_composition(0, 0, rng, positive=False) == []
    assert sample_composition(0, 3, rng, positive=False) == [0, 0, 0]
    assert sample_composition(5, 1, rng) == [5]
    for args in [(1, 2, True), (3, 0, True), (3, 0, False), (-1, 2, False)]:
        with pytest.raises(ValueError):
            sample_composition(args[0], args[1], rng, positive=args[2])


# -- permutations with f cycles -----------------------------------------------


@pytest.mark.parametrize("use_table", [True, False])
def test_permutation_identity(stirling, use_table):
    rng = RandomSource(10)
    table = stirling if use_table else None
    for _ in range(20):
        cycles = sample_permutation_with_cycles(6, 6, rng, table)
        assert perm_key(cycles) == tuple(range(1, 7))


@pytest.mark.parametrize("use_table", [True, False])
@pytest.mark.parametrize("k, f, count", [(3, 2, 3), (4, 2, 11), (5, 3, 35), (5, 1, 24)])
def test_permutation_uniform(stirling, use_table, k, f, count):
    rng = RandomSource(11)
    table = stirling if use_table else None
    obs = Counter(perm_key(sample_permutation_with_cycles(k, f, rng, table)) for _ in range(60 * count))
    expected = {p for p in permutations(range(1, k + 1)) if count_cycles(p) == f}
    assert len(expected) == count
    assert set(obs) == expected
    assert stats.chisquare(list(obs.values())).pvalue > 1e-3


def test_permutation_errors(stirling):
    rng = RandomSource(12)
    with pytest.raises(ValueError):
        sample_permutation_with_cycles(3, 4, rng)
    with pytest.raises(ValueError):
        sample_permutation_with_cycles(3, 0, rng)
    with pytest.raises(ValueError):
        sample_permutation_with_cycles(13, 2, rng, stirling)


def test_permutation_large_table_free():
    rng = RandomSource(13)
    cycles = sample_permutation_with_cycles(20000, 7, rng)
    assert len(cycles) == 7
    assert sorted(x for c in cycles for x in c) == list(range(1, 20001))


# -- rejection sampler --------------------------------------------------------


def test_rejection_single_vertex():
    rng = RandomSource(14)
    g = sample_rejection(1, 1, rng)
    assert (g.n, g.k, g.num_branches) == (1, 1, 0)


@pytest.mark.parametrize("n, k", [(5, 3), (6, 3), (7, 4), (9, 4)])
def test_rejection_uniform(n, k):
    rng = RandomSource(15)
    universe = enumerate_git_graphs(n, k)
    obs = Counter(canonical_encode(sample_rejection(n, k, rng)) for _ in range(40 * universe.cardinality))
    assert chi_square_uniformity(obs, universe).passed


def test_rejection_acceptance_rate():
    rng = RandomSource(16)
    trials = sum(sample_rejection(5, 3, rng, return_trials=True)[1] for _ in range(20000))
    rate = 20000 / trials
    se = math.sqrt((5 / 6) * (1 / 6) / trials)
    assert abs(rate - 5 / 6) < 4 * se


def test_rejection_errors_and_warning():
    rng = RandomSource(17)
    for n, k in [(3, 4), (3, 1), (3, 0)]:
        with pytest.raises(ValueError):
            sample_rejection(n, k, rng)
    assert sample_rejection(0, 0, rng).n == 0
    # (16, 13) has acceptance ~1e-7, so stop at the warning itself
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        with pytest.raises(RuntimeWarning):
            sample_rejection(16, 13, rng)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        sample_rejection(100, 10, rng)


# -- exact sampler ------------------------------------------------------------


@pytest.mark.parametrize("use_table", [True, False])
def test_exact_chain(stirling, use_table):
    rng = RandomSource(18)
    g = sample_exact(6, 6, rng, stirling=stirling if use_table else None)
    assert (g.n, g.k, g.f) == (6, 6, 6)


@pytest.mark.parametrize("use_table", [True, False])
def test_exact_with_fixed_f(stirling, use_table):
    rng = RandomSource(19)
    universe = enumerate_git_graphs(5, 3, f=2)
    assert universe.cardinality == 3
    obs = Counter(
        canonical_encode(sample_exact(5, 3, rng, f=2, stirling=stirling if use_table else None))
        for _ in range(3000)
    )
    assert chi_square_uniformity(obs, universe).passed


@pytest.mark.parametrize("use_table", [True, False])
@pytest.mark.parametrize("n, k, f", [(8, 4, 1), (8, 4, 3), (9, 5, 2), (10, 4, 2)])
def test_exact_fixed_f_class(stirling, use_table, n, k, f):
    rng = RandomSource(20)
    universe = enumerate_git_graphs(n, k, f=f)
    table = stirling if use_table else None
    obs = Counter(
        canonical_encode(sample_exact(n, k, rng, f=f, stirling=table))
        for _ in range(30 * universe.cardinality)
    )
    assert chi_square_uniformity(obs, universe).passed


@pytest.mark.parametrize("use_table", [True, False])
@pytest.mark.parametrize("n, k", [(5, 3), (6, 3), (8, 5), (9, 4), (9, 8), (10, 6)])
def test_exact_uniform(stirling, use_table, n, k):
    rng = RandomSource(21)
    universe = enumerate_git_graphs(n, k)
    table = stirling if use_table else None
    obs = Counter(
        canonical_encode(sample_exact(n, k, rng, stirling=table))
        for _ in range(30 * universe.cardinality)
    )
    assert chi_square_uniformity(obs, universe).passed


def test_exact_errors(stirling):
    rng = RandomSource(22)
    with pytest.raises(ValueError):
        sample_exact(5, 3, rng, f=3)
    with pytest.raises(ValueError):
        sample_exact(5, 1, rng)
    with pytest.raises(ValueError):
        sample_exact(3, 4, rng)
    with pytest.raises(ValueError):
        sample_exact(20, 15, rng, stirling=stirling)
    assert sample_exact(0, 0, rng).n == 0


def test_exact_always_valid(stirling):
    rng = RandomSource(23)
    for _ in range(300):
        n = int(rng.np.integers(2, 40))
        k = int(rng.np.integers(2, n + 1))
        for table in (stirling if k <= 12 else None, None):
            g = sample_exact(n, k, rng, stirling=table)
            assert validate(g) is None and (g.n, g.k) == (n, k)


def test_exact_large_fast_path_valid():
    rng = RandomSource(24)
    g = sample_exact(50000, 15000, rng)
    assert validate(g) is None and (g.n, g.k) == (50000, 15000)
    g = sample_exact(50000, 24000, rng)
    assert validate(g) is None and (g.n, g.k) == (50000, 24000)


def test_exact_f_law_table_free(stirling):
    # joint (table-free) route: f must follow [k,f] C(n-k-1, k-f-1)
    from gitgraphs.counting import free_vertex_distribution

    rng = RandomSource(25)
    n, k = 12, 6
    w = free_vertex_distribution(n, k, stirling)
    total = sum(w.values())
    obs = Counter(sample_exact(n, k, rng).f for _ in range(20000))
    assert set(obs) <= set(w)
    p = stats.chisquare([obs.get(f, 0) for f in sorted(w)], [20000 * w[f] / total for f in sorted(w)]).pvalue
    assert p > 1e-3


def test_size_only():
    rng = RandomSource(26)
    counts = build_count_table(8)
    stir = build_stirling_table(8)
    assert sample_exact_size_only(1, rng, counts, stir).n == 1
    universe = enumerate_git_graphs(5, 0)
    obs = Counter()
    for _ in range(13 * 40):
        obs[sample_exact_size_only(5, rng, counts, stir).k] += 1
    p = stats.chisquare([obs[k] for k in (2, 3, 4, 5)], [40 * c for c in (1, 5, 6, 1)]).pvalue
    assert p > 1e-3
    with pytest.raises(ValueError):
        sample_exact_size_only(9, rng, counts, stir)
    assert universe.cardinality == 0


def test_determinism(stirling):
    a = [sample_exact(9, 4, RandomSource(99), stirling=stirling) for _ in range(3)]
    b = [sample_exact(9, 4, RandomSource(99), stirling=stirling) for _ in range(3)]
    assert a == b
    pa = BoltzmannParams(0.45, 2)
    assert sample_boltzmann(pa, RandomSource(5)) == sample_boltzmann(pa, RandomSource(5))
    assert sample_rejection(30, 5, RandomSource(5)) == sample_rejection(30, 5, RandomSource(5))


# -- Boltzmann sampler --------------------------------------------------------


def test_extraction_trace():
    assert free_positions_from_extractions([1, 1, 2]) == [3, 2, 0]


def test_boltzmann_trace_marks():
    marks = set(free_positions_from_extractions([1, 1, 2]))
    assert [j for j in range(1, 4) if j not in marks] == [1]


def test_boltzmann_empty_when_no_cycle():
    params = BoltzmannParams(1e-6, 1.0)
    rng = RandomSource(27)
    assert all(sample_boltzmann(params, rng).n == 0 for _ in range(100))


def test_boltzmann_invalid_params():
    with pytest.raises(ValueError):
        sample_boltzmann(BoltzmannParams(0.5, 2), RandomSource(0))


def graph_weight(g, z, u):
    return u**g.k * z**g.n / math.factorial(g.k)


def test_boltzmann_small_graph_law():
    z, u = 0.4, 2.0
    G = math.exp(log_gf(z, u))
    rng = RandomSource(28)
    draws = 40000
    obs = Counter()
    for _ in range(draws):
        g = sample_boltzmann(BoltzmannParams(z, u), rng)
        if g.n <= 4:
            obs[canonical_encode(g)] += 1
    support, exp = [], []
    for n in range(5):
        for k in range(n + 1):
            for g in enumerate_git_graphs(n, k).items:
                support.append(canonical_encode(g))
                exp.append(draws * graph_weight(g, z, u) / G)
    assert set(obs) <= set(support)
    o = [obs.get(s, 0) for s in support]
    o.append(draws - sum(o))
    exp.append(draws - sum(exp))
    assert stats.chisquare(o, exp).pvalue > 1e-3
    # empty graph and single vertex, within 3 standard errors
    for key, prob in [(support[0], 1 / G), (support[1], u * z / G)]:
        se = math.sqrt(prob * (1 - prob) / draws)
        assert abs(obs[key] / draws - prob) < 3 * se


def test_boltzmann_valid_and_free_marks():
    rng = RandomSource(29)
    params = BoltzmannParams(0.49, 2)
    for _ in range(200):
        g = sample_boltzmann(params, rng)
        assert validate(g) is None
        if g.k:
            assert 1 in g.free_positions()


def test_boltzmann_windowed():
    rng = RandomSource(30)
    params = BoltzmannParams(0.45, 2)
    for _ in range(20):
        g = sample_boltzmann_windowed(params, rng, min_size=20, max_size=40)
        assert 20 <= g.n <= 40
    with pytest.raises(RuntimeError):
        sample_boltzmann_windowed(BoltzmannParams(1e-6, 1), rng, min_size=5, max_tries=10)


def test_boltzmann_mean_size():
    from gitgraphs.tuning import expected_size

    rng = RandomSource(31)
    params = BoltzmannParams(0.4, 2)
    sizes = np.array([sample_boltzmann(params, rng).n for _ in range(40000)])
    se = sizes.std(ddof=1) / math.sqrt(sizes.size)
    assert abs(sizes.mean() - expected_size(0.4, 2)) < 3 * se
