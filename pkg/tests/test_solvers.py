import math

import numpy as np
import pytest

from dsmin import (Constraint, DSInstance, GroundSet, SetFunctionOracle,
                   SolverError, SolverOptions, accept_step, brute_force_minimize,
                   choose_permutation, epsilon_iteration_cap,
                   local_optimality_check, minima_lower_bounds, mod_mod,
                   modular_lower_bound, modular_upper_bound, sub_sup, sup_sub)
from dsmin.functions import build_function, modular_spec
from dsmin.sfm import sfm_brute_force

import helpers

SQ3 = math.sqrt(3)
GLOBAL_TRI = -2 * SQ3


class TestAcceptStep:
    def test_negative_value_multiplicative(self):
        assert accept_step(-1.0, -1.05, 0.01)
        assert not accept_step(-1.0, -1.005, 0.01)

    def test_zero_start_requires_strict_descent(self):
        assert accept_step(0.0, -0.2, 0.5)
        assert not accept_step(0.0, 0.0, 0.0)
        assert not accept_step(0.0, 0.1, 0.0)

    def test_positive_value_branch(self):
        assert accept_step(2.0, 1.7, 0.1)      # needs 0.2 decrease
        assert not accept_step(2.0, 1.9, 0.1)
        assert accept_step(2.0, 2.0, 0.0)

    def test_epsilon_zero_accepts_equality_when_negative(self):
        assert accept_step(-1.0, -1.0, 0.0)

    def test_rejects_negative_epsilon(self):
        with pytest.raises(ValueError):
            accept_step(-1.0, -2.0, -0.1)


class TestLocalOptimalityCheck:
    def test_modular_negative_set(self):
        f = build_function(modular_spec([-1.0, 2.0, -3.0]))
        assert local_optimality_check(f, {1, 3})
        assert not local_optimality_check(f, frozenset())

    def test_agrees_with_exhaustive_scan(self):
        rng = np.random.default_rng(51)
        for _ in range(100):
            n = int(rng.integers(2, 7))
            inst = helpers.random_ds_instance(rng, n)
            v = inst.v_oracle()
            X = frozenset(int(j) for j in range(1, n + 1) if rng.random() < 0.5)
            base = v(X)
            expected = all(
                v(X - {j} if j in X else X | {j}) >= base - 1e-9
                for j in range(1, n + 1))
            assert local_optimality_check(v, X) == expected


class TestChoosePermutation:
    def test_gain_ordering_example(self):
        g = GroundSet(3)
        scorer = SetFunctionOracle(g, lambda S: sum([3.0, 1.0, 2.0][j - 1] for j in S))
        sigma = choose_permutation("g_gain", {2, 3}, scorer, 0)
        assert sigma.order == (3, 2, 1)

    def test_random_is_reproducible(self):
        scorer = helpers.sqrt_card(5)
        a = choose_permutation("random", frozenset(), scorer, 7)
        b = choose_permutation("random", frozenset(), scorer, 7)
        assert a.order == b.order

    def test_full_set_orders_by_within_gain(self):
        g = GroundSet(3)
        scorer = SetFunctionOracle(g, lambda S: sum([1.0, 5.0, 3.0][j - 1] for j in S))
        sigma = choose_permutation("g_gain", {1, 2, 3}, scorer, 0)
        assert sigma.order == (2, 3, 1)
        assert sigma.chain_contains({1, 2, 3})

    def test_chain_contains_base(self):
        rng = np.random.default_rng(53)
        scorer = helpers.random_submodular(rng, 6)
        for heur in ("random", "g_gain", "v_gain"):
            X = frozenset({2, 5})
            sigma = choose_permutation(heur, X, scorer, rng)
            assert sigma.chain_contains(X)


class TestSubSup:
    def test_reaches_global_on_showcase(self):
        tr = sub_sup(helpers.tri_instance(), SolverOptions(seed=0))
        assert tr.final_set == frozenset({1, 2, 3})
        assert tr.final_value == pytest.approx(GLOBAL_TRI)
        assert tr.termination == "converged"
        assert tr.locally_optimal

    def test_modular_g_gives_exact_surrogate(self):
        # with modular g the lower bound is exact, so the first inner
        # minimization already lands on the global minimizer
        rng = np.random.default_rng(55)
        for _ in range(5):
            f = helpers.random_submodular(rng, 5)
            g = helpers.random_modular(rng, 5)
            inst = DSInstance(f, g)
            tr = sub_sup(inst, SolverOptions(seed=1))
            _, best = brute_force_minimize(inst.v_oracle())
            assert tr.final_value == pytest.approx(best, abs=1e-6)
            # the very first accepted surrogate minimization is already global
            first = tr.iterates[1].value if len(tr.iterates) > 1 else tr.iterates[0].value
            assert first == pytest.approx(best, abs=1e-6)

    def test_trace_monotone_and_certified(self):
        rng = np.random.default_rng(57)
        for _ in range(10):
            inst = helpers.random_ds_instance(rng, 6)
            tr = sub_sup(inst, SolverOptions(seed=3))
            vals = tr.values()
            assert all(b <= a + 1e-9 for a, b in zip(vals, vals[1:]))
            if tr.termination == "converged":
                assert tr.locally_optimal


class TestSupSub:
    def test_modular_f_single_maximization(self):
        rng = np.random.default_rng(59)
        f = helpers.random_modular(rng, 5)
        g = helpers.random_submodular(rng, 5)
        inst = DSInstance(f, g)
        tr = sup_sub(inst, SolverOptions(seed=1, max_method="brute"))
        _, best = brute_force_minimize(inst.v_oracle())
        assert tr.final_value == pytest.approx(best, abs=1e-9)

    def test_reaches_global_on_showcase(self):
        tr = sup_sub(helpers.tri_instance(), SolverOptions(seed=0))
        assert tr.final_set == frozenset({1, 2, 3})
        assert tr.final_value == pytest.approx(GLOBAL_TRI)

    def test_cardinality_capped_run(self):
        tr = sup_sub(helpers.tri_instance(), SolverOptions(seed=0),
                     Constraint.cardinality_le(1))
        assert tr.final_set == frozenset()
        assert tr.final_value == 0.0
        assert all(len(p.set) <= 1 for p in tr.iterates)

    def test_rejects_unsupported_constraints(self):
        with pytest.raises(ValueError):
            sup_sub(helpers.tri_instance(), SolverOptions(),
                    Constraint.cardinality_eq(2))

    def test_alternate_strategy_still_descends(self):
        rng = np.random.default_rng(61)
        for _ in range(5):
            inst = helpers.random_ds_instance(rng, 6)
            tr = sup_sub(inst, SolverOptions(seed=2, ub_strategy="alternate"))
            vals = tr.values()
            assert all(b <= a + 1e-9 for a, b in zip(vals, vals[1:]))


class TestModMod:
    def test_reaches_global_on_showcase(self):
        tr = mod_mod(helpers.tri_instance(), SolverOptions(seed=0))
        assert tr.final_set == frozenset({1, 2, 3})
        assert tr.final_value == pytest.approx(GLOBAL_TRI)
        assert tr.locally_optimal

    def test_spanning_tree_is_kruskal(self):
        g3 = GroundSet(3)
        f = build_function(modular_spec([1.0, 2.0, 3.0]))
        zero = SetFunctionOracle(g3, lambda S: 0.0)
        tr = mod_mod(DSInstance(f, zero), SolverOptions(seed=0),
                     Constraint.spanning_tree(3, [(1, 2), (2, 3), (1, 3)]))
        assert tr.final_set == frozenset({1, 2})
        assert tr.final_value == pytest.approx(3.0)
        assert tr.n_accepted == 0  # bootstrap lands on the tree immediately
        assert all(len(p.set) == 2 for p in tr.iterates)

    def test_every_constrained_iterate_feasible(self):
        rng = np.random.default_rng(63)
        for _ in range(8):
            inst = helpers.random_ds_instance(rng, 6)
            for c in (Constraint.cardinality_le(3), Constraint.cardinality_eq(2),
                      Constraint.partition_matroid([[1, 2, 3], [4, 5, 6]], [1, 2]),
                      Constraint.knapsack([1, 2, 1, 3, 2, 1], 4)):
                tr = mod_mod(inst, SolverOptions(seed=4), c)
                assert all(c.is_feasible(p.set) for p in tr.iterates)
                vals = tr.values()
                assert all(b <= a + 1e-9 for a, b in zip(vals, vals[1:]))

    def test_monotone_and_certified_unconstrained(self):
        rng = np.random.default_rng(65)
        for _ in range(10):
            inst = helpers.random_ds_instance(rng, 6)
            tr = mod_mod(inst, SolverOptions(seed=5))
            vals = tr.values()
            assert all(b <= a + 1e-9 for a, b in zip(vals, vals[1:]))
            if tr.termination == "converged":
                assert tr.locally_optimal


class TestSurrogateSandwich:
    def test_bounds_sandwich_objective(self):
        rng = np.random.default_rng(67)
        for _ in range(10):
            n = int(rng.integers(2, 6))
            inst = helpers.random_ds_instance(rng, n)
            X = frozenset(int(j) for j in range(1, n + 1) if rng.random() < 0.5)
            order = sorted(X) + sorted(set(range(1, n + 1)) - X)
            from dsmin import Permutation
            sigma = Permutation(tuple(order))
            h = modular_lower_bound(inst.g, X, sigma)
            for variant in (1, 2):
                m = modular_upper_bound(inst.f, X, variant)
                vX = inst.value(X)
                assert m.value(X) - h.value(X) == pytest.approx(vX, abs=1e-9)
                for S in helpers.all_subsets(n):
                    sur = m.value(S) - h.value(S)
                    assert sur >= inst.value(S) - 1e-9
                    sub_sur = inst.f(S) - h.value(S)
                    assert sub_sur >= inst.value(S) - 1e-9


class TestEpsilonRule:
    def test_large_epsilon_stops_early(self):
        rng = np.random.default_rng(69)
        stopped_early = 0
        for _ in range(20):
            inst = helpers.random_ds_instance(rng, 6)
            tr0 = mod_mod(inst, SolverOptions(seed=6, epsilon=0.0))
            tr9 = mod_mod(inst, SolverOptions(seed=6, epsilon=5.0))
            assert tr9.n_accepted <= tr0.n_accepted + 1
            if tr9.termination == "epsilon_stop":
                stopped_early += 1
        assert stopped_early > 0

    def test_iteration_cap_formula(self):
        assert epsilon_iteration_cap(-10.0, -1.0, 0.1) == math.ceil(math.log(10) / math.log(1.1)) + 1
        with pytest.raises(ValueError):
            epsilon_iteration_cap(-10.0, -1.0, 0.0)
        with pytest.raises(ValueError):
            epsilon_iteration_cap(10.0, -1.0, 0.1)

    def test_accepted_iterations_within_cap(self):
        rng = np.random.default_rng(71)
        checked = 0
        for _ in range(30):
            inst = helpers.random_ds_instance(rng, 6)
            for solver in (sub_sup, lambda i, o: sup_sub(i, o), lambda i, o: mod_mod(i, o)):
                tr = solver(inst, SolverOptions(seed=7, epsilon=0.1))
                if len(tr.iterates) < 2 or tr.iterates[1].value >= 0:
                    continue
                _, bound2 = minima_lower_bounds(inst.f, inst.g, sfm_brute_force)
                if bound2 >= 0:
                    continue
                cap = epsilon_iteration_cap(bound2, tr.iterates[1].value, 0.1)
                assert tr.n_accepted <= cap
                checked += 1
        assert checked > 10


class TestTraceMachinery:
    def test_determinism_same_seed(self):
        inst1 = helpers.tri_instance()
        inst2 = helpers.tri_instance()
        t1 = sub_sup(inst1, SolverOptions(seed=7, heuristic="random"))
        t2 = sub_sup(inst2, SolverOptions(seed=7, heuristic="random"))
        assert [p.set for p in t1.iterates] == [p.set for p in t2.iterates]
        assert t1.to_json_dict() == t2.to_json_dict()

    def test_json_dict_shape(self):
        tr = mod_mod(helpers.tri_instance(), SolverOptions(seed=1))
        doc = tr.to_json_dict()
        assert doc["algorithm"] == "modmod"
        assert doc["final"]["set"] == [1, 2, 3]
        assert len(doc["iterates"]) == len(tr.iterates)
        assert "elapsed" not in doc["iterates"][0]

    def test_csv_schema(self, tmp_path):
        tr = mod_mod(helpers.tri_instance(), SolverOptions(seed=1))
        path = tmp_path / "trace.csv"
        tr.write_csv(str(path))
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "iteration,value,oracle_calls,millis"
        assert len(lines) == len(tr.iterates) + 1

    def test_inner_failure_carries_partial_trace(self):
        g3 = GroundSet(3)

        def exploding(S):
            if len(S) == 3:
                raise RuntimeError("boom")
            return -float(len(S))

        f = SetFunctionOracle(g3, exploding)
        g = SetFunctionOracle(g3, lambda S: 0.0)
        with pytest.raises(SolverError) as ei:
            sub_sup(DSInstance(f, g), SolverOptions(seed=0))
        assert ei.value.trace is not None
        assert len(ei.value.trace.iterates) >= 1

    def test_instance_requires_normalization(self):
        g3 = GroundSet(3)
        f = SetFunctionOracle(g3, lambda S: 1.0 + len(S))
        g = SetFunctionOracle(g3, lambda S: 0.0)
        with pytest.raises(ValueError):
            DSInstance(f, g)
