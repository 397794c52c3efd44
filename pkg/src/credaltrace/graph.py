"""DAGs over categorical variables, random DAG generation and model complexity."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple, Sequence

import numpy as np

from .stats import make_rng

__all__ = [
    "VariableSpec",
    "Dag",
    "random_dag",
    "complexity",
    "parent_configurations",
    "has_cycle",
]


class VariableSpec(NamedTuple):
    id: int
    cardinality: int


@dataclass(frozen=True, eq=True)
class Dag:
    """Directed acyclic graph over variables ``0..n-1``.

    Parameters
    ----------
    cardinalities : tuple of int
        Number of states of each variable (all >= 2).
    edges : tuple of (parent, child)
        Stored sorted; duplicates and self loops are rejected.
    topo_order : tuple of int
        A permutation of the variable ids in which every edge points forward.
    """

    cardinalities: tuple[int, ...]
    edges: tuple[tuple[int, int], ...]
    topo_order: tuple[int, ...]

    def __post_init__(self):
        cards = tuple(int(c) for c in self.cardinalities)
        edges = tuple(sorted((int(a), int(b)) for a, b in self.edges))
        order = tuple(int(v) for v in self.topo_order)
        object.__setattr__(self, "cardinalities", cards)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "topo_order", order)

        n = len(cards)
        if n == 0:
            raise ValueError("a Dag needs at least one variable")
        if any(c < 2 for c in cards):
            raise ValueError(f"cardinalities must be >= 2, got {cards}")
        if sorted(order) != list(range(n)):
            raise ValueError("topo_order must be a permutation of the variable ids")
        if len(set(edges)) != len(edges):
            raise ValueError("duplicate edges")
        position = {v: i for i, v in enumerate(order)}
        for a, b in edges:
            if not (0 <= a < n and 0 <= b < n):
                raise ValueError(f"edge ({a}, {b}) references an unknown variable")
            if a == b:
                raise ValueError(f"self loop on variable {a}")
            if position[a] >= position[b]:
                raise ValueError(f"edge ({a}, {b}) goes against topo_order")

    @classmethod
    def from_edges(cls, cardinalities: Sequence[int], edges) -> "Dag":
        """Build a Dag and derive a topological order (Kahn, smallest id first)."""
        n = len(cardinalities)
        indeg = [0] * n
        children: list[list[int]] = [[] for _ in range(n)]
        for a, b in edges:
            children[a].append(b)
            indeg[b] += 1
        ready = sorted(v for v in range(n) if indeg[v] == 0)
        order = []
        while ready:
            v = ready.pop(0)
            order.append(v)
            for c in children[v]:
                indeg[c] -= 1
                if indeg[c] == 0:
                    ready.append(c)
            ready.sort()
        if len(order) != n:
            raise ValueError("edges contain a directed cycle")
        return cls(tuple(cardinalities), tuple(map(tuple, edges)), tuple(order))

    @property
    def n_vars(self) -> int:
        return len(self.cardinalities)

    @property
    def variables(self) -> list[VariableSpec]:
        return [VariableSpec(i, c) for i, c in enumerate(self.cardinalities)]

    @cached_property
    def _parents(self) -> tuple[tuple[int, ...], ...]:
        par: list[list[int]] = [[] for _ in range(self.n_vars)]
        for a, b in self.edges:
            par[b].append(a)
        return tuple(tuple(sorted(p)) for p in par)

    def parents(self, x: int) -> tuple[int, ...]:
        self._check_var(x)
        return self._parents[x]

    def n_configs(self, x: int) -> int:
        """Number of parent configurations of ``x`` (1 for orphans)."""
        return int(np.prod([self.cardinalities[p] for p in self.parents(x)], dtype=np.int64))

    @cached_property
    def _strides(self) -> tuple[np.ndarray, ...]:
        out = []
        for x in range(self.n_vars):
            cards = [self.cardinalities[p] for p in self._parents[x]]
            strides = np.ones(len(cards), dtype=np.int64)
            for i in range(len(cards) - 2, -1, -1):
                strides[i] = strides[i + 1] * cards[i + 1]
            out.append(strides)
        return tuple(out)

    def config_index(self, x: int, data: np.ndarray) -> np.ndarray:
        """Row index into the CPT of ``x`` for every row of ``data``.

        Indices follow :func:`parent_configurations` (lexicographic, last
        parent varying fastest).
        """
        data = np.asarray(data)
        pars = self.parents(x)
        if not pars:
            return np.zeros(data.shape[0], dtype=np.int64)
        return data[:, pars] @ self._strides[x]

    def _check_var(self, x: int) -> None:
        if not 0 <= x < self.n_vars:
            raise ValueError(f"unknown variable id {x}")


def has_cycle(n: int, edges) -> bool:
    """DFS back-edge check, independent of any stored topological order."""
    children: list[list[int]] = [[] for _ in range(n)]
    for a, b in edges:
        children[a].append(b)
    state = [0] * n  # 0 new, 1 on stack, 2 done
    for root in range(n):
        if state[root]:
            continue
        stack = [(root, iter(children[root]))]
        state[root] = 1
        while stack:
            v, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                state[v] = 2
                stack.pop()
            elif state[nxt] == 1:
                return True
            elif state[nxt] == 0:
                state[nxt] = 1
                stack.append((nxt, iter(children[nxt])))
    return False


def random_dag(m: int, e: float, card: int | Sequence[int] = 2, seed: int = 0) -> Dag:
    """Random DAG with ``m`` nodes and exactly ``m * e`` edges.

    A node ordering is drawn uniformly at random and the edges are a uniform
    sample without replacement of the forward pairs of that ordering.
    """
    if m < 2:
        raise ValueError(f"need at least 2 nodes, got {m}")
    if e < 1:
        raise ValueError(f"edge density must be >= 1, got {e}")
    n_edges = m * e
    if abs(n_edges - round(n_edges)) > 1e-9:
        raise ValueError(f"m * e must be an integer, got {n_edges}")
    n_edges = int(round(n_edges))
    n_pairs = m * (m - 1) // 2
    if n_edges > n_pairs:
        raise ValueError(
            f"{n_edges} edges requested but only {n_pairs} forward pairs exist for {m} nodes"
        )
    cards = (card,) * m if np.isscalar(card) else tuple(card)
    if len(cards) != m:
        raise ValueError(f"expected {m} cardinalities, got {len(cards)}")

    rng = make_rng(seed)
    order = rng.permutation(m)
    a_idx, b_idx = np.triu_indices(m, k=1)
    chosen = np.sort(rng.choice(n_pairs, size=n_edges, replace=False))
    edges = tuple((int(order[a_idx[c]]), int(order[b_idx[c]])) for c in chosen)
    return Dag(cards, edges, tuple(int(v) for v in order))


def complexity(g: Dag) -> int:
    """Number of free parameters: sum of n_configs(X) * (|X| - 1)."""
    return sum(g.n_configs(x) * (g.cardinalities[x] - 1) for x in range(g.n_vars))


def parent_configurations(g: Dag, x: int) -> list[tuple[int, ...]]:
    """Lexicographic list of parent state tuples, parents sorted by id."""
    pars = g.parents(x)
    return list(itertools.product(*(range(g.cardinalities[p]) for p in pars)))
