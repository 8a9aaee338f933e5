"""Text formats for Git graphs: JSON, Graphviz DOT, an edge list, and a
POSIX shell script that replays the graph as real commits."""

from __future__ import annotations

import json
from typing import List

from .graph import GitGraph, InvalidGraph, check


class MalformedInput(ValueError):
    pass


def to_dict(g: GitGraph) -> dict:
    return {
        "n": g.n,
        "k": g.k,
        "branches": [
            {"start": b.start, "end": b.end, "length": b.length} for b in g.branches
        ],
    }


def serialize_json(g: GitGraph) -> str:
    check(g)
    return json.dumps(to_dict(g), separators=(",", ":"))


def parse_json(text: str) -> GitGraph:
    """Inverse of :func:`serialize_json`.

    Raises MalformedInput for text that is not a graph object and
    InvalidGraph for a well-formed object describing an invalid graph.
    """
    try:
        obj = json.loads(text)
        k = obj["k"]
        rows = [(b["start"], b["end"], b["length"]) for b in obj["branches"]]
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise MalformedInput(f"not a Git graph document: {exc}") from None
    values = [k, *(v for row in rows for v in row)]
    if "n" in obj:
        values.append(obj["n"])
    if not all(type(v) is int for v in values):
        raise MalformedInput("all fields must be integers")
    g = check(GitGraph(k, rows))
    if "n" in obj and obj["n"] != g.n:
        raise InvalidGraph(f"declared n={obj['n']} but the graph has {g.n} vertices")
    return g


def _edges(g: GitGraph) -> List[tuple]:
    edges = [(f"m{i}", f"m{i + 1}") for i in range(1, g.k)]
    for b in g.branches:
        chain = [f"m{b.start}"] + [f"w{b.end}_{i}" for i in range(1, b.length + 1)]
        chain.append(f"m{b.end}")
        edges.extend(zip(chain, chain[1:]))
    return edges


def serialize_edges(g: GitGraph) -> str:
    """One ``parent child`` line per edge, names as in :func:`serialize_dot`."""
    check(g)
    return "".join(f"{a} {b}\n" for a, b in _edges(g))


def serialize_dot(g: GitGraph) -> str:
    check(g)
    lines = ["digraph gitgraph {", "  rankdir=LR;"]
    for i in range(1, g.k + 1):
        lines.append(f'  m{i} [style=filled, fillcolor=black, fontcolor=white];')
    for b in g.branches:
        for i in range(1, b.length + 1):
            lines.append(f"  w{b.end}_{i} [style=solid];")
    for a, b in _edges(g):
        lines.append(f"  {a} -> {b};")
    lines.append("}")
    return "\n".join(lines) + "\n"


_SCRIPT_HEADER = """\
#!/bin/sh
# Rebuilds a feature-branch history: main commits are tagged M<i>,
# feature commits are named F<end>-<i>.
set -e
export GIT_AUTHOR_NAME=gitgraphs GIT_AUTHOR_EMAIL=gitgraphs@localhost
export GIT_COMMITTER_NAME=gitgraphs GIT_COMMITTER_EMAIL=gitgraphs@localhost
export GIT_AUTHOR_DATE='2000-01-01T00:00:00Z' GIT_COMMITTER_DATE='2000-01-01T00:00:00Z'
git init -q
git symbolic-ref HEAD refs/heads/main
"""


def emit_git_script(g: GitGraph) -> str:
    check(g)
    if g.k == 0:
        raise ValueError("the empty graph has no commits to emit")
    by_end = {b.end: b for b in g.branches}
    out = [_SCRIPT_HEADER, "git commit -q --allow-empty -m M1\ngit tag M1\n"]
    for j in range(2, g.k + 1):
        b = by_end.get(j)
        if b is None:
            out.append(f"git commit -q --allow-empty -m M{j}\n")
        else:
            out.append(f"git checkout -q -b F{j} M{b.start}\n")
            for i in range(1, b.length + 1):
                out.append(f"git commit -q --allow-empty -m F{j}-{i}\n")
            out.append("git checkout -q main\n")
            out.append(f"git merge -q --no-ff --no-edit -m M{j} F{j}\n")
        out.append(f"git tag M{j}\n")
    return "".join(out)


FORMATS = {
    "json": lambda g: serialize_json(g) + "\n",
    "dot": serialize_dot,
    "edges": serialize_edges,
    "gitscript": emit_git_script,
}
