"""Brute-force enumeration at small sizes, and the statistics used to check
samplers against it."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

from scipy.stats import chi2

from .graph import Cyclarium, GitGraph, canonical_encode

MAX_GRAPH_N = 12
MAX_CYCLARIUM_N = 10


def _compositions(m: int, p: int) -> Iterator[Tuple[int, ...]]:
    """All compositions of m into p positive parts."""
    if p == 0:
        if m == 0:
            yield ()
        return
    if m < p:
        return
    for cuts in itertools.combinations(range(1, m), p - 1):
        bounds = (0,) + cuts + (m,)
        yield tuple(b - a for a, b in zip(bounds, bounds[1:]))


@dataclass(frozen=True)
class EnumerationResult:
    n: int
    k: int
    f: Optional[int]
    items: tuple
    encodings: Tuple[bytes, ...] = field(repr=False)

    @property
    def cardinality(self) -> int:
        return len(self.items)

    def f_histogram(self) -> Dict[int, int]:
        hist: Dict[int, int] = {}
        for item in self.items:
            hist[item.f] = hist.get(item.f, 0) + 1
        return dict(sorted(hist.items()))


def _iter_git_graphs(n: int, k: int) -> Iterator[GitGraph]:
    if k == 0:
        if n == 0:
            yield GitGraph(0)
        return
    whites = n - k
    for nb in range(0, k):
        if nb > whites or (nb == 0 and whites > 0):
            continue
        for ends in itertools.combinations(range(2, k + 1), nb):
            start_choices = [range(1, e) for e in ends]
            for lengths in _compositions(whites, nb):
                for starts in itertools.product(*start_choices):
                    yield GitGraph(k, zip(starts, ends, lengths))


def enumerate_git_graphs(n: int, k: int, f: Optional[int] = None) -> EnumerationResult:
    if n > MAX_GRAPH_N:
        raise ValueError(f"enumeration limited to n <= {MAX_GRAPH_N}")
    if k < 0 or k > n:
        raise ValueError(f"need 0 <= k <= n, got n={n}, k={k}")
    items = tuple(g for g in _iter_git_graphs(n, k) if f is None or g.f == f)
    encodings = tuple(canonical_encode(g) for g in items)
    assert len(set(encodings)) == len(encodings)
    return EnumerationResult(n, k, f, items, encodings)


def _iter_permutations_cycle_form(k: int, max_non_max: int) -> Iterator[List[List[int]]]:
    """Permutations of 1..k in cycle form having at most *max_non_max*
    vertices that are not the maximum of their cycle."""

    def rec(i: int, cycles: List[List[int]]):
        # non-max count can only grow: each later element either opens a
        # cycle or joins one
        if (i - 1) - len(cycles) > max_non_max:
            return
        if i > k:
            yield [list(c) for c in cycles]
            return
        cycles.append([i])
        yield from rec(i + 1, cycles)
        cycles.pop()
        for c in cycles:
            for pos in range(len(c)):
                c.insert(pos + 1, i)
                yield from rec(i + 1, cycles)
                c.pop(pos + 1)

    yield from rec(1, [])


def enumerate_cyclariums(n: int, k: int, f: Optional[int] = None) -> EnumerationResult:
    if n > MAX_CYCLARIUM_N:
        raise ValueError(f"enumeration limited to n <= {MAX_CYCLARIUM_N}")
    if k < 0 or k > n:
        raise ValueError(f"need 0 <= k <= n, got n={n}, k={k}")
    items = []
    whites = n - k
    for cycles in _iter_permutations_cycle_form(k, whites):
        if f is not None and len(cycles) != f:
            continue
        carriers = sorted(lab for c in cycles for lab in c if lab != max(c))
        for lengths in _compositions(whites, len(carriers)):
            chain = dict(zip(carriers, lengths))
            items.append(
                Cyclarium(tuple(tuple((lab, chain.get(lab, 0)) for lab in c) for c in cycles))
            )
    encodings = tuple(c.encode() for c in items)
    assert len(set(encodings)) == len(encodings)
    return EnumerationResult(n, k, f, tuple(items), encodings)


def enumerate_all_git_graphs(n: int) -> EnumerationResult:
    """Every Git graph of size n, all k."""
    items, encodings = [], []
    for k in range(n + 1):
        res = enumerate_git_graphs(n, k)
        items.extend(res.items)
        encodings.extend(res.encodings)
    return EnumerationResult(n, -1, None, tuple(items), tuple(encodings))


# -- statistics ----------------------------------------------------------------


class ForeignSample(AssertionError):
    """A sampler produced an object outside the enumerated class."""


@dataclass(frozen=True)
class ChiSquareResult:
    statistic: float
    dof: int
    threshold: float
    passed: bool
    significance: float = 0.001


def chi_square_uniformity(
    observed: Mapping[bytes, int], universe: EnumerationResult, significance: float = 0.001
) -> ChiSquareResult:
    """Pearson goodness-of-fit of *observed* counts against the uniform law
    on *universe*; the threshold is the exact chi-square quantile."""
    allowed = set(universe.encodings)
    foreign = [key for key in observed if key not in allowed]
    if foreign:
        raise ForeignSample(f"{len(foreign)} sampled objects are outside the class")
    m = universe.cardinality
    total = sum(observed.values())
    if total < 20 * m:
        raise ValueError(f"need at least {20 * m} samples for {m} classes, got {total}")
    expected = total / m
    stat = sum((observed.get(key, 0) - expected) ** 2 for key in allowed) / expected
    dof = m - 1
    threshold = float(chi2.ppf(1.0 - significance, dof)) if dof else 0.0
    return ChiSquareResult(stat, dof, threshold, stat <= threshold, significance)


@dataclass(frozen=True)
class Moment:
    mean: float
    variance: float
    stderr: float
    count: int


def moment(values: Sequence[float]) -> Moment:
    """Sample mean, unbiased variance, and the standard error of the mean."""
    values = list(values)
    if not values:
        raise ValueError("no samples")
    m = len(values)
    mean = math.fsum(values) / m
    var = math.fsum((x - mean) ** 2 for x in values) / (m - 1) if m > 1 else 0.0
    return Moment(mean, var, math.sqrt(var / m), m)


def empirical_moments(samples: Sequence[Tuple[int, int, int]]) -> Dict[str, Moment]:
    """Moments of n, k and f over a sequence of ``(n, k, f)`` triples."""
    if not samples:
        raise ValueError("no samples")
    cols = list(zip(*samples))
    return {name: moment(col) for name, col in zip(("n", "k", "f"), cols)}
