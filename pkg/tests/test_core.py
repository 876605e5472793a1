import math

import numpy as np
import pytest

from dsmin import (AffineModular, GroundSet, SetFunctionOracle,
                   brute_force_minimize, check_submodular, gain, memoized)
from dsmin.core import check_monotone, evaluate_table, mask_of, set_of, subset_key

import helpers


class TestGroundSet:
    def test_bounds(self):
        g = GroundSet(3)
        assert list(g.elements()) == [1, 2, 3]
        assert g.full == frozenset({1, 2, 3})
        assert g.complement({1}) == frozenset({2, 3})

    def test_invalid(self):
        with pytest.raises(ValueError):
            GroundSet(0)
        with pytest.raises(ValueError):
            GroundSet(3).check_element(4)
        with pytest.raises(ValueError):
            GroundSet(3).check_subset({0, 1})


def test_subset_key_orders_by_cardinality_then_lex():
    sets = [frozenset({2}), frozenset({1, 2}), frozenset({1}), frozenset()]
    assert sorted(sets, key=subset_key) == [
        frozenset(), frozenset({1}), frozenset({2}), frozenset({1, 2})]


def test_mask_roundtrip():
    for m in range(16):
        assert mask_of(set_of(m, 4)) == m


class TestGain:
    def test_sqrt(self):
        f = helpers.sqrt_card(3)
        assert gain(f, 2, {1}) == pytest.approx(math.sqrt(2) - 1)

    def test_modular(self):
        g = GroundSet(3)
        w = [3.0, 1.0, 2.0]
        f = SetFunctionOracle(g, lambda S: sum(w[j - 1] for j in S))
        assert gain(f, 3, {1}) == pytest.approx(2.0)

    def test_triangle_cut(self):
        f = helpers.triangle_cut()
        assert gain(f, 2, {1}) == pytest.approx(0.0)

    def test_call_counts(self):
        f = helpers.sqrt_card(3)
        f.reset_count()
        gain(f, 2, {1})
        assert f.call_count == 2
        f.reset_count()
        assert gain(f, 1, {1, 2}) == 0.0
        assert f.call_count == 1

    def test_out_of_range(self):
        f = helpers.sqrt_card(3)
        with pytest.raises(ValueError):
            gain(f, 4, {1})


class TestBruteForceMinimize:
    def test_modular_selects_negatives(self):
        g = GroundSet(3)
        w = [-1.0, 2.0, -3.0]
        v = SetFunctionOracle(g, lambda S: sum(w[j - 1] for j in S))
        assert brute_force_minimize(v) == (frozenset({1, 3}), -4.0)

    def test_tie_breaks_toward_smaller_set(self):
        v = helpers.triangle_cut()  # empty set and full set both cut 0
        assert brute_force_minimize(v) == (frozenset(), 0.0)

    def test_sqrt_minus_linear(self):
        g = GroundSet(3)
        v = SetFunctionOracle(g, lambda S: math.sqrt(len(S)) - 0.8 * len(S))
        best, val = brute_force_minimize(v)
        assert best == frozenset({1, 2, 3})
        assert val == pytest.approx(math.sqrt(3) - 2.4)

    def test_refuses_large_ground_set(self):
        v = SetFunctionOracle(GroundSet(26), lambda S: 0.0)
        with pytest.raises(ValueError):
            brute_force_minimize(v)


class TestCheckSubmodular:
    def test_sqrt_cardinality(self):
        assert check_submodular(helpers.sqrt_card(3))

    def test_pair_indicator_is_not(self):
        g = GroundSet(3)
        f = SetFunctionOracle(g, lambda S: 1.0 if {1, 2} <= S else 0.0)
        assert not check_submodular(f)

    def test_modular(self):
        rng = np.random.default_rng(0)
        assert check_submodular(helpers.random_modular(rng, 5))

    def test_refuses_large(self):
        with pytest.raises(ValueError):
            check_submodular(SetFunctionOracle(GroundSet(17), lambda S: 0.0))


def test_gain_telescopes_to_full_range():
    rng = np.random.default_rng(4)
    f = helpers.random_submodular(rng, 6)
    order = list(rng.permutation(range(1, 7)))
    total = 0.0
    S = set()
    for j in order:
        total += gain(f, int(j), frozenset(S))
        S.add(int(j))
    assert total == pytest.approx(f(f.ground.full) - f(frozenset()), abs=1e-9)


def test_call_count_tracks_every_evaluation():
    f = helpers.sqrt_card(4)
    f.reset_count()
    for S in ({1}, {1, 2}, {1}, set()):
        f(S)
    assert f.call_count == 4
    m = memoized(f)
    for S in (frozenset({1}), frozenset({1, 2}), frozenset({1}), frozenset()):
        m(S)
    assert m.call_count == 3  # distinct evaluations only


def test_memoized_matches_inner():
    rng = np.random.default_rng(7)
    f = helpers.random_submodular(rng, 5)
    m = memoized(f)
    for S in helpers.all_subsets(5):
        assert m(S) == pytest.approx(f(S))


class TestAffineModular:
    def test_value_and_weight(self):
        m = AffineModular.from_weights([1.0, -2.0, 0.5], offset=3.0)
        assert m.value(frozenset()) == 3.0
        assert m.value({1, 3}) == pytest.approx(4.5)
        assert m.weight(2) == -2.0

    def test_difference(self):
        a = AffineModular.from_weights([1.0, 2.0], offset=1.0)
        b = AffineModular.from_weights([0.5, 0.5])
        d = a - b
        assert d.offset == 1.0
        assert d.value({1, 2}) == pytest.approx(3.0)


def test_evaluate_table_matches_pointwise():
    rng = np.random.default_rng(11)
    f = helpers.random_submodular(rng, 5)
    table = evaluate_table(f)
    for S in helpers.all_subsets(5):
        assert table[mask_of(S)] == pytest.approx(f(S))


def test_check_monotone():
    assert check_monotone(helpers.sqrt_card(4))
    g = GroundSet(3)
    down = SetFunctionOracle(g, lambda S: -float(len(S)))
    assert not check_monotone(down)
