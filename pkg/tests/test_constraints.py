import itertools

import networkx as nx
import numpy as np
import pytest

from dsmin import AffineModular, Constraint, modular_minimize_constrained

import helpers


def weights(*w):
    return AffineModular.from_weights(list(w))


class TestUnconstrained:
    def test_selects_strict_negatives(self):
        assert modular_minimize_constrained(weights(-2.0, 1.0, -0.5), Constraint.none()) \
            == frozenset({1, 3})

    def test_zero_weights_excluded(self):
        assert modular_minimize_constrained(weights(0.0, -1.0), Constraint.none()) \
            == frozenset({2})


class TestCardinality:
    def test_le_takes_most_negative(self):
        m = weights(-2.0, 1.0, -0.5)
        assert modular_minimize_constrained(m, Constraint.cardinality_le(1)) == frozenset({1})

    def test_le_never_takes_positives(self):
        m = weights(-1.0, 2.0, 3.0)
        assert modular_minimize_constrained(m, Constraint.cardinality_le(3)) == frozenset({1})

    def test_eq_takes_k_smallest(self):
        m = weights(5.0, 1.0, 3.0)
        assert modular_minimize_constrained(m, Constraint.cardinality_eq(2)) == frozenset({2, 3})

    def test_bad_k(self):
        with pytest.raises(ValueError):
            modular_minimize_constrained(weights(1.0), Constraint.cardinality_le(5))


class TestPartitionMatroid:
    def test_example(self):
        m = weights(-2.0, 1.0, -0.5)
        c = Constraint.partition_matroid([[1, 2], [3]], [1, 1])
        assert modular_minimize_constrained(m, c) == frozenset({1, 3})

    def test_quota_limits_block(self):
        m = weights(-3.0, -2.0, -1.0)
        c = Constraint.partition_matroid([[1, 2, 3]], [2])
        assert modular_minimize_constrained(m, c) == frozenset({1, 2})

    def test_blocks_must_cover(self):
        with pytest.raises(ValueError):
            modular_minimize_constrained(weights(1.0, 2.0),
                                         Constraint.partition_matroid([[1]], [1]))

    def test_blocks_must_be_disjoint(self):
        with pytest.raises(ValueError):
            Constraint.partition_matroid([[1, 2], [2]], [1, 1]).validate(2)


class TestSpanningTree:
    def test_triangle(self):
        c = Constraint.spanning_tree(3, [(1, 2), (2, 3), (1, 3)])
        m = weights(1.0, 2.0, 3.0)
        assert modular_minimize_constrained(m, c) == frozenset({1, 2})

    def test_matches_networkx_on_random_graphs(self):
        rng = np.random.default_rng(41)
        for _ in range(20):
            n_v = int(rng.integers(3, 7))
            edges = [(u, v) for u, v in itertools.combinations(range(1, n_v + 1), 2)]
            w = rng.uniform(-3.0, 3.0, len(edges))
            c = Constraint.spanning_tree(n_v, edges)
            got = modular_minimize_constrained(AffineModular.from_weights(w), c)
            G = nx.Graph()
            for i, (u, v) in enumerate(edges, start=1):
                G.add_edge(u, v, weight=float(w[i - 1]), index=i)
            T = nx.minimum_spanning_tree(G, algorithm="kruskal")
            want = sum(d["weight"] for _, _, d in T.edges(data=True))
            total = sum(w[i - 1] for i in got)
            assert total == pytest.approx(want, abs=1e-9)
            assert c.is_feasible(got)

    def test_disconnected_rejected(self):
        with pytest.raises(ValueError):
            Constraint.spanning_tree(4, [(1, 2), (3, 4), (1, 2)]).validate(3)

    def test_feasibility(self):
        c = Constraint.spanning_tree(3, [(1, 2), (2, 3), (1, 3)])
        assert c.is_feasible({1, 2})
        assert not c.is_feasible({1})
        assert not c.is_feasible({1, 2, 3})


class TestKnapsack:
    def test_budget_binds(self):
        c = Constraint.knapsack([2, 2, 3], 4)
        m = weights(-1.0, -1.5, -0.4)
        assert modular_minimize_constrained(m, c) == frozenset({1, 2})

    def test_matches_enumeration(self):
        rng = np.random.default_rng(43)
        for _ in range(25):
            n = int(rng.integers(2, 8))
            costs = [int(c) for c in rng.integers(0, 5, n)]
            budget = int(rng.integers(0, 9))
            w = rng.uniform(-2.0, 2.0, n)
            c = Constraint.knapsack(costs, budget)
            got = modular_minimize_constrained(AffineModular.from_weights(w), c)
            best = min(
                (sum(w[j - 1] for j in S)
                 for S in helpers.all_subsets(n)
                 if sum(costs[j - 1] for j in S) <= budget),
                default=0.0)
            assert sum(w[j - 1] for j in got) == pytest.approx(best, abs=1e-9)
            assert c.is_feasible(got)

    def test_non_integer_costs_rejected(self):
        with pytest.raises(ValueError):
            Constraint.knapsack([1.5, 2], 3)

    def test_negative_budget_rejected(self):
        with pytest.raises(ValueError):
            Constraint.knapsack([1, 2], -1)


def test_constraint_dict_roundtrip():
    cases = [Constraint.none(), Constraint.cardinality_le(2),
             Constraint.cardinality_eq(1),
             Constraint.partition_matroid([[1, 2], [3]], [1, 1]),
             Constraint.spanning_tree(3, [(1, 2), (2, 3), (1, 3)]),
             Constraint.knapsack([1, 2, 3], 4)]
    for c in cases:
        assert Constraint.from_dict(c.to_dict()) == c
