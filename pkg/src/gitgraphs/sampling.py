"""Random generators for Git graphs.

Three samplers are provided:

* :func:`sample_rejection` draws from a relaxed class in which every main
  vertex but the first receives a possibly empty chain and rejects until the
  empty chains all hang off the root. Uniform for fixed (n, k); fast when k is
  at most of order sqrt(n).
* :func:`sample_exact` goes through cyclariums: a permutation of the main
  vertices with f cycles, a composition of the white vertices, then the
  bijection. Uniform for fixed (n, k) or (n, k, f).
* :func:`sample_boltzmann` draws from the labeled-main distribution, where a
  graph has probability proportional to ``u^k z^n / k!``.
"""

from __future__ import annotations

import functools
import math
import random
import secrets
import warnings
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .counting import CountTable, StirlingTable, free_vertex_distribution
from .graph import GitGraph, paths_to_git_graph
from .tuning import BoltzmannParams, log_gf


class RandomSource:
    """Seeded source of randomness shared by all samplers.

    Scalar draws come from a Mersenne Twister (:class:`random.Random`, which
    also gives exact uniform integers below arbitrarily large bounds); bulk
    draws come from a numpy PCG64 generator. Both are seeded from
    ``SeedSequence([seed, stream])``, so ``(seed, stream)`` pins the whole
    output stream. Independent streams for parallel work use distinct
    *stream* values.
    """

    def __init__(self, seed: Optional[int] = None, stream: int = 0):
        if seed is None:
            seed = secrets.randbits(64)
        if not 0 <= seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        self.seed = seed
        self.stream = stream
        ss = np.random.SeedSequence([seed, stream])
        state = ss.generate_state(8, dtype=np.uint32)
        self.py = random.Random(int.from_bytes(state.tobytes(), "little"))
        self.np = np.random.Generator(np.random.PCG64(ss.spawn(1)[0]))

    def random(self) -> float:
        return self.py.random()

    def randbelow(self, n: int) -> int:
        """Uniform integer in ``0..n-1``; exact for any positive int."""
        return self.py.randrange(n)

    def __repr__(self):
        return f"RandomSource(seed={self.seed}, stream={self.stream})"


# -- discrete laws -------------------------------------------------------------


def poisson(lam: float, rng: RandomSource) -> int:
    if not lam >= 0:
        raise ValueError(f"Poisson rate must be >= 0, got {lam}")
    if lam == 0:
        return 0
    return int(rng.np.poisson(lam))


def log_series(p: float, rng: RandomSource, size=None):
    """``P(x) = p^x / (x * -ln(1-p))`` for x >= 1."""
    if not 0 < p < 1:
        raise ValueError(f"log-series parameter must lie in (0, 1), got {p}")
    out = rng.np.logseries(p, size=size)
    return int(out) if size is None else out


def geometric(z: float, rng: RandomSource, size=None):
    """``P(m) = (1-z) z^m`` for m >= 0."""
    if not 0 < z < 1:
        raise ValueError(f"geometric parameter must lie in (0, 1), got {z}")
    out = rng.np.geometric(1.0 - z, size=size) - 1
    return int(out) if size is None else out


# -- compositions --------------------------------------------------------------


def sample_composition(m: int, p: int, rng: RandomSource, positive: bool = True) -> List[int]:
    """Uniform composition of *m* into *p* ordered parts (stars and bars).

    Parts are >= 1 when *positive*, otherwise >= 0.
    """
    if positive:
        if p < 1 or m < p:
            raise ValueError(f"no composition of {m} into {p} positive parts")
        cuts = sorted(rng.py.sample(range(1, m), p - 1))
        bounds = [0] + cuts + [m]
        return [b - a for a, b in zip(bounds, bounds[1:])]
    if p == 0:
        if m == 0:
            return []
        raise ValueError(f"no composition of {m} into 0 parts")
    if m < 0 or p < 0:
        raise ValueError(f"no weak composition of {m} into {p} parts")
    bars = sorted(rng.py.sample(range(m + p - 1), p - 1))
    bounds = [-1] + bars + [m + p - 1]
    return [b - a - 1 for a, b in zip(bounds, bounds[1:])]


# -- rejection sampler --------------------------------------------------------


def sample_rejection(n: int, k: int, rng: RandomSource, *, return_trials: bool = False):
    """Uniform Git graph with n vertices and k black ones, by rejection.

    With ``return_trials=True`` returns ``(graph, trials)``.
    """
    if k > n or k < 0:
        raise ValueError(f"need 0 <= k <= n, got n={n}, k={k}")
    if k == 0 or (k == 1 and n > 1):
        if n == 0:
            g = GitGraph(0)
            return (g, 1) if return_trials else g
        raise ValueError(f"there is no Git graph with n={n}, k={k}")
    if k > 3 * math.sqrt(n):
        warnings.warn(
            f"k={k} > 3*sqrt(n): the rejection sampler may need many trials",
            RuntimeWarning,
            stacklevel=2,
        )
    randrange = rng.py.randrange
    trials = 0
    while True:
        trials += 1
        # lengths[i] is the chain merging into main position i + 2
        lengths = sample_composition(n - k, k - 1, rng, positive=False)
        # starts of empty chains are drawn first; they decide acceptance
        if all(randrange(i + 1) == 0 for i, l in enumerate(lengths) if l == 0):
            break
    ends, starts, kept = [], [], []
    for i, l in enumerate(lengths):
        if l:
            ends.append(i + 2)
            starts.append(randrange(i + 1) + 1)
            kept.append(l)
    g = GitGraph.from_arrays(k, starts, ends, kept)
    return (g, trials) if return_trials else g


# -- permutations with a given number of cycles -------------------------------


def _assemble_cycles(new_cycle: Sequence[bool], rng: RandomSource) -> List[List[int]]:
    """Insert 1..k in order: element i opens a new cycle if ``new_cycle[i-1]``,
    otherwise it is placed right after a uniformly chosen earlier element."""
    k = len(new_cycle)
    succ = [0] * (k + 1)
    randrange = rng.py.randrange
    for i in range(1, k + 1):
        if new_cycle[i - 1]:
            succ[i] = i
        else:
            e = randrange(1, i)
            succ[i] = succ[e]
            succ[e] = i
    seen = bytearray(k + 1)
    cycles = []
    for i in range(1, k + 1):
        if seen[i]:
            continue
        cyc = []
        j = i
        while not seen[j]:
            seen[j] = 1
            cyc.append(j)
            j = succ[j]
        cycles.append(cyc)
    return cycles


@functools.lru_cache(maxsize=256)
def _ewens_theta(k: int, f: float) -> float:
    """theta with expected cycle count ``sum_i theta/(theta+i-1) == f``."""
    idx = np.arange(k, dtype=float)

    def mean(theta):
        return float(np.sum(theta / (theta + idx)))

    if f >= k:
        return math.inf
    lo, hi = 0.0, 1.0
    while mean(hi) < f:
        hi *= 2
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mean(mid) < f:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-12 * hi:
            break
    return 0.5 * (lo + hi)


def _ewens_flags(k: int, theta: float, rng: RandomSource) -> np.ndarray:
    """Independent cycle-opening indicators of an Ewens(theta) permutation."""
    if k == 0:
        return np.zeros(0, dtype=bool)
    flags = rng.np.random(k) * (theta + np.arange(k)) < theta
    flags[0] = True
    return flags


def sample_permutation_with_cycles(
    k: int, f: int, rng: RandomSource, stirling: Optional[StirlingTable] = None
) -> List[List[int]]:
    """Uniform permutation of ``1..k`` with exactly f cycles, in cycle form.

    With a Stirling table, element i (from k down) closes a cycle on its own
    with probability ``[i-1, j-1] / [i, j]`` (j cycles still to place), using
    exact integer draws. Without one, Ewens-distributed cycle indicators are
    drawn with theta tuned so that f cycles is typical and rejected until
    they open exactly f cycles; conditioned on the count, the Ewens law is
    uniform.
    """
    if not 1 <= f <= k:
        raise ValueError(f"no permutation of size {k} with {f} cycles")
    if stirling is not None:
        if k > stirling.k_max:
            raise ValueError(f"Stirling table too small: k_max={stirling.k_max} < {k}")
        s = stirling.s
        flags = [False] * k
        j = f
        for i in range(k, 0, -1):
            if rng.randbelow(s[i][j]) < s[i - 1][j - 1]:
                flags[i - 1] = True
                j -= 1
        return _assemble_cycles(flags, rng)
    if f == 1:
        flags = np.zeros(k, dtype=bool)
        flags[0] = True
    elif f == k:
        flags = np.ones(k, dtype=bool)
    else:
        theta = _ewens_theta(k, f)
        while True:
            flags = _ewens_flags(k, theta, rng)
            if int(flags.sum()) == f:
                break
    return _assemble_cycles(flags.tolist(), rng)


# -- exact sampler via cyclariums ------------------------------------------


def feasible_free_range(n: int, k: int) -> Tuple[int, int]:
    """Inclusive range of f with a nonzero number of Git graphs at (n, k, f)."""
    if k == n:
        return k, k
    return max(1, 2 * k - n), k - 1


@functools.lru_cache(maxsize=64)
def _free_count_weights(n: int, k: int, stirling: StirlingTable):
    weights = sorted(free_vertex_distribution(n, k, stirling).items())
    return weights, sum(w for _, w in weights)


def _sample_free_count(n: int, k: int, rng: RandomSource, stirling: StirlingTable) -> int:
    weights, total = _free_count_weights(n, k, stirling)
    x = rng.randbelow(total)
    for f, w in weights:
        if x < w:
            return f
        x -= w
    raise AssertionError("cumulative scan overran the total weight")


@functools.lru_cache(maxsize=256)
def _joint_proposal(n: int, k: int) -> Tuple[float, int]:
    """theta for the joint draw and the mode of r(f) under it."""
    lo, hi = feasible_free_range(n, k)
    m = n - k - 1

    def theta_at(f):  # theta making r flat at f
        return (k - f - 1) / (m - k + f + 2)

    def excess(f):  # f minus the Ewens mean count at theta_at(f); increasing in f
        t = theta_at(f)
        return f - float(np.sum(t / (t + np.arange(k, dtype=float))))

    a, b = float(lo), float(hi - 1)
    if excess(a) >= 0:
        # the flat-r theta would propose fewer cycles than allowed: centre
        # the proposal on the smallest feasible count instead
        theta = _ewens_theta(k, lo)
    elif excess(b) <= 0:
        theta = _ewens_theta(k, hi)
    else:
        for _ in range(60):
            mid = 0.5 * (a + b)
            if excess(mid) < 0:
                a = mid
            else:
                b = mid
        theta = theta_at(0.5 * (a + b))
    theta = max(theta, 1e-12)
    # r is log-concave in f, so the mode is where the step ratio drops to 1
    mode = lo
    while mode < hi and _r_step(n, k, mode, theta) > 1:
        mode += 1
    return theta, mode


def _r_step(n: int, k: int, f: int, theta: float) -> float:
    """r(f+1) / r(f) with r(f) = C(n-k-1, k-f-1) theta^-f."""
    return (k - f - 1) / ((n - 2 * k + f + 1) * theta)


def _sample_flags_joint(n: int, k: int, rng: RandomSource) -> np.ndarray:
    """Cycle indicators whose count f follows ``[k,f] C(n-k-1, k-f-1)``.

    Ewens(theta) proposals give f weight ``[k,f] theta^f``; a proposal with f
    cycles is accepted with probability ``r(f) / max r`` where
    ``r(f) = C(n-k-1, k-f-1) theta^-f``. theta is chosen so that r is nearly
    flat around the typical f, which keeps acceptance close to one.
    """
    lo, hi = feasible_free_range(n, k)
    if lo >= hi:
        raise ValueError("joint draw needs at least two feasible free counts")
    theta, mode = _joint_proposal(n, k)
    while True:
        flags = _ewens_flags(k, theta, rng)
        f = int(flags.sum())
        if f < lo or f > hi:
            continue
        ratio = 1.0
        if f > mode:
            for g in range(mode, f):
                ratio *= _r_step(n, k, g, theta)
        else:
            for g in range(f, mode):
                ratio /= _r_step(n, k, g, theta)
        if rng.random() < ratio:
            return flags


def _cyclarium_paths(cycles: List[List[int]], chain_lengths: Sequence[int], k: int):
    """Attach chain lengths to non-maximum labels in increasing label order,
    then break and order the cycles; returns (labels, chains) by position."""
    by_label = [0] * (k + 1)
    heads = []
    for cyc in cycles:
        top = max(cyc)
        heads.append((top, cyc))
    carriers = sorted(lab for top, cyc in heads for lab in cyc if lab != top)
    for lab, length in zip(carriers, chain_lengths):
        by_label[lab] = length
    heads.sort()
    labels, chains = [], []
    for top, cyc in heads:
        i = cyc.index(top)
        for lab in cyc[i:] + cyc[:i]:
            labels.append(lab)
            chains.append(by_label[lab])
    return labels, chains


def sample_exact(
    n: int,
    k: int,
    rng: RandomSource,
    f: Optional[int] = None,
    stirling: Optional[StirlingTable] = None,
) -> GitGraph:
    """Uniform Git graph with n vertices, k black, and (optionally) f free.

    With *stirling* (covering k), f and the permutation are drawn from exact
    integer weights. Without it, both come from conditioned Ewens proposals,
    which needs no precomputation and scales to k in the hundreds of
    thousands.
    """
    if k < 0 or k > n:
        raise ValueError(f"need 0 <= k <= n, got n={n}, k={k}")
    if k == 0:
        if n == 0 and f in (None, 0):
            return GitGraph(0)
        raise ValueError(f"there is no Git graph with n={n}, k={k}, f={f}")
    lo, hi = feasible_free_range(n, k)
    if f is not None and not lo <= f <= hi or lo > hi:
        raise ValueError(f"there is no Git graph with n={n}, k={k}, f={f}")
    if k == n:
        return GitGraph(k)
    if lo == hi:
        f = lo
    if stirling is not None and k > stirling.k_max:
        raise ValueError(f"Stirling table too small: k_max={stirling.k_max} < {k}")
    if f is None and stirling is not None:
        f = _sample_free_count(n, k, rng, stirling)
    if f is None:
        flags = _sample_flags_joint(n, k, rng)
        f = int(flags.sum())
        cycles = _assemble_cycles(flags.tolist(), rng)
    else:
        cycles = sample_permutation_with_cycles(k, f, rng, stirling)
    chains = sample_composition(n - k, k - f, rng, positive=True)
    labels, by_position = _cyclarium_paths(cycles, chains, k)
    return paths_to_git_graph(labels, by_position)


def sample_exact_size_only(
    n: int, rng: RandomSource, counts: CountTable, stirling: Optional[StirlingTable] = None
) -> GitGraph:
    """Uniform Git graph of size n: k is drawn with weight g(n, k) first."""
    row = counts.row(n)
    x = rng.randbelow(sum(row))
    for k, w in enumerate(row):
        if x < w:
            return sample_exact(n, k, rng, stirling=stirling)
        x -= w
    raise AssertionError("cumulative scan overran the total weight")


# -- Boltzmann sampler ------------------------------------------------------


def free_positions_from_extractions(extracted: Sequence[int]) -> List[int]:
    """0-indexed main positions marked free, given cycle lengths in the order
    they are extracted: each extraction of x marks ``v[remaining - x]``."""
    remaining = sum(extracted)
    marks = []
    for x in extracted:
        remaining -= x
        marks.append(remaining)
    return marks


def _size_biased_order(lengths: List[int], rng: RandomSource) -> List[int]:
    pool = list(lengths)
    total = sum(pool)
    order = []
    while pool:
        x = rng.randbelow(total)
        for i, length in enumerate(pool):
            if x < length:
                break
            x -= length
        order.append(pool.pop(i))
        total -= order[-1]
    return order


def sample_boltzmann(params: BoltzmannParams, rng: RandomSource) -> GitGraph:
    """Git graph drawn with probability ``u^k z^n / (k! G(z,u))``.

    The number of free vertices is Poisson(ln G(z,u)); the cycle lengths are
    i.i.d. log-series(u z^2 / (1-z)); every non-free main vertex but the
    first gets a branch from a uniform earlier main vertex carrying
    ``1 + Geometric(z)`` white vertices. Cost is O(n + f^2).
    """
    params.check()
    z, u = params.z, params.u
    f = poisson(log_gf(z, u), rng)
    if f == 0:
        return GitGraph(0)
    lengths = [int(x) for x in log_series(u * z * z / (1 - z), rng, size=f)]
    k = sum(lengths)
    free = np.zeros(k, dtype=bool)
    free[free_positions_from_extractions(_size_biased_order(lengths, rng))] = True
    targets = np.flatnonzero(~free)  # 0-indexed; position 0 is always free
    starts = rng.np.integers(0, targets) + 1 if targets.size else targets
    whites = rng.np.geometric(1.0 - z, size=targets.size)
    return GitGraph.from_arrays(k, starts, targets + 1, whites)


def sample_boltzmann_windowed(
    params: BoltzmannParams,
    rng: RandomSource,
    min_size: int = 0,
    max_size: Optional[int] = None,
    max_tries: int = 1_000_000,
) -> GitGraph:
    """Resample :func:`sample_boltzmann` until the size lies in the window."""
    for _ in range(max_tries):
        g = sample_boltzmann(params, rng)
        n = g.n
        if n >= min_size and (max_size is None or n <= max_size):
            return g
    raise RuntimeError(f"no sample in [{min_size}, {max_size}] after {max_tries} tries")
