"""Combinatorial constraints and exact constrained minimization of modular functions.

A modular (affine) function is trivially minimized under each supported
constraint family: pick negatives, pick k smallest, per-block selection,
minimum spanning tree (Kruskal), or a pseudo-polynomial knapsack dynamic
program over integer costs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .core import AffineModular

CONSTRAINT_KINDS = ("none", "cardinality_le", "cardinality_eq",
                    "partition_matroid", "spanning_tree", "knapsack")


@dataclass(frozen=True)
class Constraint:
    """Feasible-set description for constrained solvers.

    ``spanning_tree`` identifies ground element ``i`` with ``edges[i-1]``
    of a connected graph on ``n_vertices`` vertices; feasible sets are
    exactly the spanning trees.  ``partition_matroid`` uses independence
    semantics: at most ``quotas[b]`` elements from ``blocks[b]``.
    """

    kind: str = "none"
    k: int | None = None
    blocks: tuple[frozenset, ...] | None = None
    quotas: tuple[int, ...] | None = None
    n_vertices: int | None = None
    edges: tuple[tuple[int, int], ...] | None = None
    costs: tuple[int, ...] | None = None
    budget: int | None = None

    # -- constructors ---------------------------------------------------------

    @staticmethod
    def none() -> "Constraint":
        return Constraint("none")

    @staticmethod
    def cardinality_le(k: int) -> "Constraint":
        return Constraint("cardinality_le", k=int(k))

    @staticmethod
    def cardinality_eq(k: int) -> "Constraint":
        return Constraint("cardinality_eq", k=int(k))

    @staticmethod
    def partition_matroid(blocks, quotas) -> "Constraint":
        return Constraint("partition_matroid",
                          blocks=tuple(frozenset(b) for b in blocks),
                          quotas=tuple(int(q) for q in quotas))

    @staticmethod
    def spanning_tree(n_vertices: int, edges) -> "Constraint":
        return Constraint("spanning_tree", n_vertices=int(n_vertices),
                          edges=tuple((int(u), int(v)) for u, v in edges))

    @staticmethod
    def knapsack(costs, budget) -> "Constraint":
        c = []
        for x in costs:
            if float(x) != int(x):
                raise ValueError(f"knapsack costs must be integers, got {x!r}")
            c.append(int(x))
        if any(x < 0 for x in c):
            raise ValueError("knapsack costs must be non-negative")
        if float(budget) != int(budget) or int(budget) < 0:
            raise ValueError(f"knapsack budget must be a non-negative integer, got {budget!r}")
        return Constraint("knapsack", costs=tuple(c), budget=int(budget))

    @staticmethod
    def from_dict(d: dict) -> "Constraint":
        kind = d.get("kind", "none")
        if kind == "none":
            return Constraint.none()
        if kind == "cardinality_le":
            return Constraint.cardinality_le(d["k"])
        if kind == "cardinality_eq":
            return Constraint.cardinality_eq(d["k"])
        if kind == "partition_matroid":
            return Constraint.partition_matroid(d["blocks"], d["quotas"])
        if kind == "spanning_tree":
            return Constraint.spanning_tree(d["n_vertices"], d["edges"])
        if kind == "knapsack":
            return Constraint.knapsack(d["costs"], d["budget"])
        raise ValueError(f"unknown constraint kind {kind!r}")

    # -- validation and feasibility --------------------------------------------

    def validate(self, n: int) -> None:
        if self.kind not in CONSTRAINT_KINDS:
            raise ValueError(f"unknown constraint kind {self.kind!r}")
        if self.kind in ("cardinality_le", "cardinality_eq"):
            if self.k is None or not 0 <= self.k <= n:
                raise ValueError(f"cardinality bound must lie in 0..{n}, got {self.k!r}")
        elif self.kind == "partition_matroid":
            if not self.blocks or self.quotas is None or len(self.blocks) != len(self.quotas):
                raise ValueError("partition matroid needs matching blocks and quotas")
            seen: set[int] = set()
            for b in self.blocks:
                if seen & b:
                    raise ValueError("partition blocks must be disjoint")
                seen |= b
            if seen != set(range(1, n + 1)):
                raise ValueError("partition blocks must cover 1..n")
            if any(q < 0 for q in self.quotas):
                raise ValueError("quotas must be non-negative")
        elif self.kind == "spanning_tree":
            if self.edges is None or len(self.edges) != n:
                raise ValueError("spanning tree needs one graph edge per ground element")
            comp = _UnionFind(self.n_vertices)
            for u, v in self.edges:
                if not (1 <= u <= self.n_vertices and 1 <= v <= self.n_vertices) or u == v:
                    raise ValueError(f"bad graph edge ({u}, {v})")
                comp.union(u - 1, v - 1)
            if comp.n_components != 1:
                raise ValueError("spanning tree constraint requires a connected graph")
        elif self.kind == "knapsack":
            if self.costs is None or len(self.costs) != n:
                raise ValueError("knapsack needs one cost per ground element")

    def is_feasible(self, X: Iterable[int]) -> bool:
        S = frozenset(X)
        if self.kind == "none":
            return True
        if self.kind == "cardinality_le":
            return len(S) <= self.k
        if self.kind == "cardinality_eq":
            return len(S) == self.k
        if self.kind == "partition_matroid":
            return all(len(S & b) <= q for b, q in zip(self.blocks, self.quotas))
        if self.kind == "spanning_tree":
            if len(S) != self.n_vertices - 1:
                return False
            uf = _UnionFind(self.n_vertices)
            for i in S:
                u, v = self.edges[i - 1]
                if not uf.union(u - 1, v - 1):
                    return False  # cycle
            return uf.n_components == 1
        if self.kind == "knapsack":
            return sum(self.costs[i - 1] for i in S) <= self.budget
        raise ValueError(f"unknown constraint kind {self.kind!r}")

    def empty_is_feasible(self) -> bool:
        return self.is_feasible(frozenset())

    def to_dict(self) -> dict:
        d = {"kind": self.kind}
        if self.k is not None:
            d["k"] = self.k
        if self.blocks is not None:
            d["blocks"] = [sorted(b) for b in self.blocks]
            d["quotas"] = list(self.quotas)
        if self.edges is not None:
            d["n_vertices"] = self.n_vertices
            d["edges"] = [list(e) for e in self.edges]
        if self.costs is not None:
            d["costs"] = list(self.costs)
            d["budget"] = self.budget
        return d


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))
        self.n_components = n

    def find(self, a: int) -> int:
        while self.parent[a] != a:
            self.parent[a] = self.parent[self.parent[a]]
            a = self.parent[a]
        return a

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[rb] = ra
        self.n_components -= 1
        return True


def _kruskal(constraint: Constraint, weights: np.ndarray) -> frozenset:
    order = sorted(range(1, len(weights) + 1), key=lambda i: (weights[i - 1], i))
    uf = _UnionFind(constraint.n_vertices)
    chosen = []
    for i in order:
        u, v = constraint.edges[i - 1]
        if uf.union(u - 1, v - 1):
            chosen.append(i)
            if len(chosen) == constraint.n_vertices - 1:
                break
    if len(chosen) != constraint.n_vertices - 1:
        raise ValueError("graph is not connected; no spanning tree exists")
    return frozenset(chosen)


def _knapsack_min(weights: np.ndarray, costs, budget: int) -> frozenset:
    """Exact min-weight selection under a cost budget (0/1 DP over budget)."""
    items = [i for i in range(1, len(weights) + 1)
             if weights[i - 1] < 0.0 and costs[i - 1] <= budget]
    if not items:
        return frozenset()
    m = len(items)
    dp = np.zeros((m + 1, budget + 1))
    for r, i in enumerate(items, start=1):
        c, w = costs[i - 1], weights[i - 1]
        dp[r] = dp[r - 1]
        feas = np.arange(c, budget + 1)
        cand = dp[r - 1][feas - c] + w
        better = cand < dp[r][feas]
        dp[r][feas[better]] = cand[better]
    chosen = []
    b = budget
    for r in range(m, 0, -1):
        if dp[r][b] != dp[r - 1][b]:
            i = items[r - 1]
            chosen.append(i)
            b -= costs[i - 1]
    return frozenset(chosen)


def modular_minimize_constrained(m: AffineModular, constraint: Constraint) -> frozenset:
    """Exactly minimize an affine-modular function over a constraint family.

    Deterministic tie-breaking throughout: by index for equal weights.
    """
    w = m.weights
    n = len(w)
    constraint.validate(n)
    kind = constraint.kind
    if kind == "none":
        return frozenset(int(j) + 1 for j in np.where(w < 0.0)[0])
    if kind == "cardinality_le":
        neg = sorted((int(j) + 1 for j in np.where(w < 0.0)[0]), key=lambda i: (w[i - 1], i))
        return frozenset(neg[:constraint.k])
    if kind == "cardinality_eq":
        order = sorted(range(1, n + 1), key=lambda i: (w[i - 1], i))
        return frozenset(order[:constraint.k])
    if kind == "partition_matroid":
        chosen: list[int] = []
        for b, q in zip(constraint.blocks, constraint.quotas):
            neg = sorted((i for i in b if w[i - 1] < 0.0), key=lambda i: (w[i - 1], i))
            chosen.extend(neg[:q])
        return frozenset(chosen)
    if kind == "spanning_tree":
        return _kruskal(constraint, w)
    if kind == "knapsack":
        return _knapsack_min(w, constraint.costs, constraint.budget)
    raise ValueError(f"unknown constraint kind {kind!r}")


def modular_maximal_minimizer(m: AffineModular, constraint: Constraint) -> frozenset | None:
    """Largest minimizer of the modular surrogate, where cheaply available.

    For the unconstrained case this adds the zero-weight elements; under a
    cardinality cap it pads the negative selection with zero-weight
    elements up to the cap.  Other constraint kinds return ``None``.
    """
    w = m.weights
    n = len(w)
    if constraint.kind == "none":
        return frozenset(int(j) + 1 for j in np.where(w <= 0.0)[0])
    if constraint.kind == "cardinality_le":
        nonpos = sorted((int(j) + 1 for j in np.where(w <= 0.0)[0]),
                        key=lambda i: (w[i - 1], i))
        return frozenset(nonpos[:constraint.k])
    return None
