"""Git feature-branch graphs, cyclariums, and the bijection between them.

Main-branch positions are 1-indexed everywhere: the main branch is
``v1 -> v2 -> ... -> vk`` and a feature branch is a non-empty chain of white
vertices leaving ``v[start]`` and merging into ``v[end]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np


class InvalidGraph(ValueError):
    """Raised when a GitGraph or Cyclarium breaks one of its invariants."""


class Branch(NamedTuple):
    start: int
    end: int
    length: int


class GitGraph:
    """A main branch of ``k`` black vertices plus feature branches.

    Branches are held as three parallel int64 arrays sorted by end position,
    so graphs with millions of vertices stay compact. Construction does not
    validate; use :func:`validate` or :func:`check`.
    """

    __slots__ = ("k", "starts", "ends", "lengths")

    def __init__(self, k: int, branches: Iterable[Tuple[int, int, int]] = ()):
        rows = sorted((int(b[1]), int(b[0]), int(b[2])) for b in branches)
        arr = np.array(rows, dtype=np.int64).reshape(-1, 3)
        self.k = int(k)
        self.ends = arr[:, 0].copy()
        self.starts = arr[:, 1].copy()
        self.lengths = arr[:, 2].copy()

    @classmethod
    def from_arrays(cls, k, starts, ends, lengths) -> "GitGraph":
        g = cls.__new__(cls)
        g.k = int(k)
        starts = np.asarray(starts, dtype=np.int64)
        ends = np.asarray(ends, dtype=np.int64)
        lengths = np.asarray(lengths, dtype=np.int64)
        if ends.size > 1 and np.any(ends[1:] < ends[:-1]):
            order = np.argsort(ends, kind="stable")
            starts, ends, lengths = starts[order], ends[order], lengths[order]
        g.starts, g.ends, g.lengths = starts, ends, lengths
        return g

    @property
    def n(self) -> int:
        return self.k + int(self.lengths.sum())

    @property
    def num_branches(self) -> int:
        return int(self.ends.size)

    @property
    def f(self) -> int:
        """Number of free black vertices (no branch merging into them)."""
        return self.k - self.num_branches

    @property
    def branches(self) -> Tuple[Branch, ...]:
        return tuple(
            Branch(int(s), int(e), int(l))
            for s, e, l in zip(self.starts, self.ends, self.lengths)
        )

    def free_positions(self) -> np.ndarray:
        mask = np.ones(self.k + 1, dtype=bool)
        mask[0] = False
        mask[self.ends[(self.ends >= 1) & (self.ends <= self.k)]] = False
        return np.flatnonzero(mask)

    def _key(self):
        return (self.k, self.ends.tobytes(), self.starts.tobytes(), self.lengths.tobytes())

    def __eq__(self, other):
        if not isinstance(other, GitGraph):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        if self.num_branches > 8:
            return f"GitGraph(k={self.k}, n={self.n}, branches=<{self.num_branches}>)"
        parts = ", ".join(f"{b.start}->{b.end}:{b.length}" for b in self.branches)
        return f"GitGraph(k={self.k}, branches=[{parts}])"


def validate(g: GitGraph) -> Optional[str]:
    """Return ``None`` if *g* is a valid Git graph, else a description of the
    first invariant it violates."""
    if g.k < 0:
        return f"negative main-branch length k={g.k}"
    if g.k == 0 and g.num_branches:
        return "empty main branch cannot carry feature branches"
    if g.num_branches == 0:
        return None
    if g.num_branches <= 64:
        return _first_violation(g.k, g.ends.tolist(), g.starts.tolist(), g.lengths.tolist())
    ends, starts, lengths = g.ends, g.starts, g.lengths
    if np.any(ends[1:] <= ends[:-1]):
        dup = int(ends[1:][ends[1:] <= ends[:-1]][0])
        return f"several feature branches end on main vertex {dup}"
    bad = np.flatnonzero((ends < 2) | (ends > g.k))
    if bad.size:
        return f"branch end {int(ends[bad[0]])} outside 2..{g.k}"
    bad = np.flatnonzero((starts < 1) | (starts >= ends))
    if bad.size:
        i = bad[0]
        return f"branch start {int(starts[i])} not in 1..{int(ends[i]) - 1}"
    bad = np.flatnonzero(lengths < 1)
    if bad.size:
        return f"branch ending at {int(ends[bad[0]])} has no white vertex"
    return None


def _first_violation(k, ends, starts, lengths) -> Optional[str]:
    # same checks and messages as the vectorised path, in the same order
    for a, b in zip(ends, ends[1:]):
        if b <= a:
            return f"several feature branches end on main vertex {b}"
    for e in ends:
        if e < 2 or e > k:
            return f"branch end {e} outside 2..{k}"
    for s, e in zip(starts, ends):
        if s < 1 or s >= e:
            return f"branch start {s} not in 1..{e - 1}"
    for e, l in zip(ends, lengths):
        if l < 1:
            return f"branch ending at {e} has no white vertex"
    return None


def check(g: GitGraph) -> GitGraph:
    problem = validate(g)
    if problem is not None:
        raise InvalidGraph(problem)
    return g


def canonical_encode(g: GitGraph) -> bytes:
    """Injective byte key: k followed by (end, start, length) sorted by end."""
    check(g)
    body = np.empty(1 + 3 * g.num_branches, dtype="<i8")
    body[0] = g.k
    body[1::3] = g.ends
    body[2::3] = g.starts
    body[3::3] = g.lengths
    return body.tobytes()


def decode(key: bytes) -> GitGraph:
    """Inverse of :func:`canonical_encode`."""
    arr = np.frombuffer(key, dtype="<i8")
    return GitGraph.from_arrays(arr[0], arr[2::3], arr[1::3], arr[3::3])


# -- cyclariums --------------------------------------------------------------


@dataclass(frozen=True)
class Cyclarium:
    """A set of cycles over labels ``1..k``.

    Each cycle is a tuple of ``(label, chain_length)`` pairs in cyclic order.
    Every vertex except the cycle maximum carries a chain of at least one
    white vertex; the maximum carries none.
    """

    cycles: Tuple[Tuple[Tuple[int, int], ...], ...]

    @property
    def k(self) -> int:
        return sum(len(c) for c in self.cycles)

    @property
    def n(self) -> int:
        return self.k + sum(ch for c in self.cycles for _, ch in c)

    @property
    def f(self) -> int:
        return len(self.cycles)

    def canonical(self) -> "Cyclarium":
        """Rotate every cycle to start at its maximum; sort cycles by maximum."""
        out = []
        for c in self.cycles:
            i = max(range(len(c)), key=lambda t: c[t][0])
            out.append(tuple(c[i:]) + tuple(c[:i]))
        out.sort(key=lambda c: c[0][0])
        return Cyclarium(tuple(out))

    def encode(self) -> bytes:
        flat = []
        for c in self.canonical().cycles:
            flat.append(len(c))
            for label, ch in c:
                flat.extend((label, ch))
        return np.array(flat, dtype="<i8").tobytes()


def validate_cyclarium(c: Cyclarium) -> Optional[str]:
    labels = [label for cyc in c.cycles for label, _ in cyc]
    if sorted(labels) != list(range(1, len(labels) + 1)):
        return "labels are not a permutation of 1..k"
    for cyc in c.cycles:
        if not cyc:
            return "empty cycle"
        top = max(label for label, _ in cyc)
        for label, ch in cyc:
            if label == top and ch != 0:
                return f"cycle maximum {label} carries a chain"
            if label != top and ch < 1:
                return f"label {label} is not a cycle maximum but has no chain"
    return None


def _ranks_among_prefix(labels: Sequence[int], k: int) -> List[int]:
    """rank[j] = #{p <= j : labels[p] <= labels[j]} via a Fenwick tree."""
    tree = [0] * (k + 1)
    out = [0] * len(labels)
    for j, lab in enumerate(labels):
        i = lab
        while i <= k:
            tree[i] += 1
            i += i & -i
        s, i = 0, lab
        while i > 0:
            s += tree[i]
            i -= i & -i
        out[j] = s
    return out


def paths_to_git_graph(labels: Sequence[int], chains: Sequence[int]) -> GitGraph:
    """Second half of the bijection.

    *labels* is the concatenation of the broken cycles (each starting at its
    maximum, cycles ordered by increasing maximum); ``chains[j]`` is the chain
    length carried by the vertex at position ``j + 1``. A chain at position j
    becomes a branch ending at j whose start is the current label of that
    vertex once every vertex to its right has been deleted and relabelled,
    which equals its rank among the labels at positions ``1..j``.
    """
    k = len(labels)
    ranks = _ranks_among_prefix(labels, k)
    ends, starts, lengths = [], [], []
    for j, ch in enumerate(chains):
        if ch > 0:
            r = ranks[j]
            if r > j:
                raise InvalidGraph("rank exceeds position: input is not a broken cyclarium")
            ends.append(j + 1)
            starts.append(r)
            lengths.append(ch)
    return GitGraph.from_arrays(k, starts, ends, lengths)


def cyclarium_to_git_graph(c: Cyclarium) -> GitGraph:
    """Map a cyclarium with n vertices, k black and f cycles to the Git graph
    with the same n and k and f free vertices."""
    problem = validate_cyclarium(c)
    if problem is not None:
        raise InvalidGraph(problem)
    labels, chains = [], []
    for cyc in c.canonical().cycles:
        for label, ch in cyc:
            labels.append(label)
            chains.append(ch)
    return paths_to_git_graph(labels, chains)
