"""Influence graphs: construction, normalization and connectivity.

Agents are labelled ``1..n``. An edge ``(j, i, w)`` means agent ``j``
influences agent ``i`` with strength ``w`` in (0, 1]; it is stored under
the key ``(j, i)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

import numpy as np


class GraphError(ValueError):
    """Raised for malformed influence graphs or bad agent indices."""


@dataclass(frozen=True, eq=True)
class InfluenceGraph:
    n: int
    weights: Mapping[tuple[int, int], float]

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise GraphError(f"agent count must be a positive integer, got {self.n!r}")
        clean = {}
        for (src, dst), w in sorted(self.weights.items()):
            _check_agent(self.n, src)
            _check_agent(self.n, dst)
            w = float(w)
            if not 0.0 < w <= 1.0:
                raise GraphError(f"weight of edge {src}->{dst} must lie in (0, 1], got {w}")
            clean[(int(src), int(dst))] = w
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "weights", MappingProxyType(clean))

    @property
    def edges(self) -> list[tuple[int, int, float]]:
        return [(s, d, w) for (s, d), w in self.weights.items()]

    @cached_property
    def _in_lists(self) -> tuple[tuple[int, ...], ...]:
        rows: list[list[int]] = [[] for _ in range(self.n)]
        for src, dst in self.weights:
            rows[dst - 1].append(src)
        return tuple(tuple(sorted(r)) for r in rows)

    @cached_property
    def edge_table(self) -> "EdgeTable":
        """Vectorized view of the non-self-loop edges (0-based indices)."""
        nrm = normalized_influence(self)
        tgt, src, wbar = [], [], []
        for (j, i), v in nrm.entries.items():
            if i != j:
                tgt.append(i - 1)
                src.append(j - 1)
                wbar.append(v)
        return EdgeTable(
            target=np.array(tgt, dtype=np.intp),
            source=np.array(src, dtype=np.intp),
            wbar=np.array(wbar, dtype=float),
        )


@dataclass(frozen=True, eq=False)
class EdgeTable:
    target: np.ndarray
    source: np.ndarray
    wbar: np.ndarray


@dataclass(frozen=True)
class NormalizedInfluence:
    n: int
    entries: Mapping[tuple[int, int], float]

    def row(self, i: int) -> dict[int, float]:
        """Normalized weights of the in-neighbors of agent ``i``."""
        return {j: v for (j, t), v in self.entries.items() if t == i}

    def as_matrix(self) -> np.ndarray:
        """Dense ``n x n`` matrix with ``M[i-1, j-1] = Ibar[j, i]``."""
        m = np.zeros((self.n, self.n))
        for (j, i), v in self.entries.items():
            m[i - 1, j - 1] = v
        return m


def _check_agent(n: int, i) -> None:
    if not isinstance(i, (int, np.integer)) or isinstance(i, bool) or not 1 <= i <= n:
        raise GraphError(f"agent index {i!r} out of range 1..{n}")


def new_influence_graph(n: int, edges: Iterable[Sequence]) -> InfluenceGraph:
    """Build a graph from ``(source, target, weight)`` triples.

    Duplicate ``(source, target)`` pairs are rejected rather than merged.
    """
    weights: dict[tuple[int, int], float] = {}
    for edge in edges:
        src, dst, w = edge
        if (src, dst) in weights:
            raise GraphError(f"duplicate edge {src}->{dst}")
        weights[(src, dst)] = w
    return InfluenceGraph(n, weights)


def in_neighbors(g: InfluenceGraph, i: int) -> frozenset[int]:
    _check_agent(g.n, i)
    return frozenset(g._in_lists[i - 1])


def isolated_agents(g: InfluenceGraph) -> list[int]:
    """Agents nobody else influences; their opinion never changes."""
    return [i for i in range(1, g.n + 1) if not (set(g._in_lists[i - 1]) - {i})]


def normalized_influence(g: InfluenceGraph) -> NormalizedInfluence:
    totals = [0.0] * g.n
    for (_, dst), w in g.weights.items():
        totals[dst - 1] += w
    entries = {(src, dst): w / totals[dst - 1] for (src, dst), w in g.weights.items()}
    return NormalizedInfluence(g.n, MappingProxyType(entries))


def strongly_connected_components(n: int, successors: Sequence[Sequence[int]]) -> list[list[int]]:
    """Tarjan's algorithm on vertices ``0..n-1``, iterative to avoid recursion limits."""
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    components: list[list[int]] = []
    counter = 0

    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            v, k = work[-1]
            succ = successors[v]
            if k < len(succ):
                work[-1] = (v, k + 1)
                w = succ[k]
                if index[w] == -1:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, 0))
                elif on_stack[w]:
                    low[v] = min(low[v], index[w])
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                components.append(comp)
    return components


def is_strongly_connected(g: InfluenceGraph) -> bool:
    succ: list[list[int]] = [[] for _ in range(g.n)]
    for src, dst in g.weights:
        succ[src - 1].append(dst - 1)
    return len(strongly_connected_components(g.n, succ)) == 1
