"""Exact counts of Git graphs, Stirling numbers of the first kind, and the
exact distributions of the main-branch length and free-vertex count.

All quantities are Python integers or :class:`fractions.Fraction`.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial
from typing import Dict, List, Optional, Sequence


def binom(n: int, k: int) -> int:
    """Binomial coefficient, zero outside ``0 <= k <= n``."""
    if n < 0 or k < 0 or k > n:
        return 0
    return comb(n, k)


@dataclass(frozen=True, eq=False)
class CountTable:
    """``g[n][k]`` = number of Git graphs with n vertices, k of them black."""

    n_max: int
    g: List[List[int]]

    def __call__(self, n: int, k: int) -> int:
        if n > self.n_max:
            raise ValueError(f"table built up to n={self.n_max}, asked n={n}")
        if k < 0 or k > n:
            return 0
        return self.g[n][k]

    def row(self, n: int) -> List[int]:
        if n > self.n_max:
            raise ValueError(f"table built up to n={self.n_max}, asked n={n}")
        return list(self.g[n])

    def total(self, n: int) -> int:
        return sum(self.row(n))


def _rows(n_max: int):
    """Yield ``g[n][0..n]`` for n = 0..n_max, keeping O(n_max) integers alive.

    ``g[n][k] = g[n-1][k-1] + (k-1) * sum(g[m][k-1] for m <= n-2)``; the
    column sums over ``m <= n-2`` are maintained incrementally.
    """
    prefix = [0] * (n_max + 2)  # prefix[k] = sum_{m <= n-2} g[m][k]
    prev: List[int] = []
    for n in range(n_max + 1):
        if n == 0:
            row = [1]
        else:
            row = [0] * (n + 1)
            for k in range(1, n + 1):
                below = prev[k - 1] if k - 1 < len(prev) else 0
                row[k] = below + (k - 1) * prefix[k - 1]
        yield row
        # prefix must cover m <= n-1 for the next row
        for k, v in enumerate(prev):
            prefix[k] += v
        prev = row


def build_count_table(n_max: int) -> CountTable:
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    return CountTable(n_max, list(_rows(n_max)))


def count_row(n: int) -> List[int]:
    """Row ``g[n][0..n]`` without storing the whole table."""
    if n < 0:
        raise ValueError("n must be >= 0")
    for row in _rows(n):
        pass
    return row


@dataclass(frozen=True, eq=False)
class StirlingTable:
    """Unsigned Stirling numbers of the first kind ``s[k][f]``, f <= k <= k_max."""

    k_max: int
    s: List[List[int]]

    def __call__(self, k: int, f: int) -> int:
        if k > self.k_max:
            raise ValueError(f"Stirling table built up to k={self.k_max}, asked k={k}")
        if f < 0 or f > k:
            return 0
        return self.s[k][f]


def build_stirling_table(k_max: int) -> StirlingTable:
    if k_max < 0:
        raise ValueError("k_max must be >= 0")
    s = [[1]]
    for k in range(1, k_max + 1):
        prev = s[-1]
        row = [0] * (k + 1)
        for f in range(1, k + 1):
            row[f] = prev[f - 1] + (k - 1) * (prev[f] if f < k else 0)
        s.append(row)
    return StirlingTable(k_max, s)


def _check_nk(n: int, k: int) -> None:
    if k > n:
        raise ValueError(f"k={k} exceeds n={n}")
    if k < 0:
        raise ValueError(f"k={k} is negative")


def free_vertex_distribution(n: int, k: int, stirling: StirlingTable) -> Dict[int, int]:
    """Weights ``[k, f] * C(n-k-1, k-f-1)`` over f; they sum to g(n, k).

    Only nonzero weights are returned.
    """
    _check_nk(n, k)
    if k < 1:
        raise ValueError("k must be >= 1")
    if k == n:
        return {k: 1}
    out = {}
    for f in range(max(1, 2 * k - n), k):
        w = stirling(k, f) * binom(n - k - 1, k - f - 1)
        if w:
            out[f] = w
    return out


def count_closed_form(n: int, k: int, stirling: StirlingTable) -> int:
    _check_nk(n, k)
    if k == n:
        return 1
    if k == 0:
        return 0
    return sum(free_vertex_distribution(n, k, stirling).values())


def superset_count_h(n: int, k: int) -> int:
    """Size of the relaxed class where v2..vk each receive a possibly empty
    chain: ``(k-1)! * C(n-2, k-2)``."""
    _check_nk(n, k)
    if k < 1:
        raise ValueError("k must be >= 1")
    if k == 1:
        return 1 if n == 1 else 0
    return factorial(k - 1) * binom(n - 2, k - 2)


@dataclass(frozen=True)
class KDistribution:
    n: int
    weights: List[int]  # unnormalised integer weights indexed by k
    probabilities: List[Fraction]
    mean: Fraction
    variance: Fraction


def _moments(weights: Sequence[int]):
    total = sum(weights)
    if total == 0:
        raise ValueError("empty class")
    m1 = sum(k * w for k, w in enumerate(weights))
    m2 = sum(k * k * w for k, w in enumerate(weights))
    mean = Fraction(m1, total)
    var = Fraction(m2, total) - mean * mean
    return [Fraction(w, total) for w in weights], mean, var


def k_distribution(
    n: int, u: Optional[Fraction] = None, table: Optional[CountTable] = None
) -> KDistribution:
    """Exact law of the main-branch length at fixed size n.

    ``u=None`` gives the uniform model, ``P(k) = g(n,k) / g_n``. Otherwise the
    labeled-main model, ``P(k)`` proportional to ``g(n,k) u^k / k!``; *u* is
    converted to a Fraction, so pass an int or Fraction for exact results.
    """
    row = table.row(n) if table is not None else count_row(n)
    if u is None:
        weights = row
    else:
        u = Fraction(u)
        # scale by n! * den^n to stay in integers: w_k = g * num^k den^(n-k) n!/k!
        num, den = u.numerator, u.denominator
        ratio = 1  # n!/k!, built from k = n downwards
        scaled = [0] * (n + 1)
        for k in range(n, -1, -1):
            scaled[k] = row[k] * num**k * den ** (n - k) * ratio
            ratio *= k if k > 0 else 1
        weights = scaled
    probs, mean, var = _moments(weights)
    return KDistribution(n, list(weights), probs, mean, var)
