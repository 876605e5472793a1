"""Shared random-instance generators and exhaustive reference helpers."""

import itertools
import math

import numpy as np

from dsmin import (DSInstance, GroundSet, SetFunctionOracle, build_function,
                   FunctionSpec)
from dsmin.functions import graph_cut_spec, modular_spec


def sqrt_card(n, coeff=1.0):
    g = GroundSet(n)
    return SetFunctionOracle(g, lambda S: coeff * math.sqrt(len(S)), name=f"{coeff}sqrt")


def triangle_cut():
    return build_function(graph_cut_spec(3, [[1, 2], [1, 3], [2, 3]]))


def tri_instance(coeff=2.0):
    """The showcase pair: triangle cut minus a scaled sqrt of the cardinality."""
    return DSInstance(triangle_cut(), sqrt_card(3, coeff))


def random_modular(rng, n, lo=-2.0, hi=2.0):
    return build_function(modular_spec(rng.uniform(lo, hi, n)))


def random_concave(rng, n):
    shape = rng.choice(["sqrt", "log1p", "power"])
    params = {"shape": shape, "weights": rng.uniform(0.0, 2.0, n).tolist()}
    if shape == "power":
        params["exponent"] = float(rng.uniform(0.3, 0.9))
    return build_function(FunctionSpec("concave_of_modular", params))


def random_cut(rng, n):
    edges = []
    for u, v in itertools.combinations(range(1, n + 1), 2):
        if rng.random() < 0.5:
            edges.append([u, v, float(rng.uniform(0.1, 2.0))])
    if not edges:
        edges = [[1, 2, 1.0]] if n >= 2 else []
    return build_function(graph_cut_spec(n, edges))


def random_facility(rng, n):
    rows = int(rng.integers(2, 5))
    B = rng.uniform(0.0, 2.0, (rows, n))
    return build_function(FunctionSpec("facility_location", {"benefits": B.tolist()}))


def random_scaled_sum(rng, n):
    kids = [random_concave(rng, n), random_cut(rng, n)]
    coeffs = [float(rng.uniform(0.2, 1.5)) for _ in kids]
    g = GroundSet(n)
    return SetFunctionOracle(
        g, lambda S, ks=kids, cs=coeffs: float(sum(c * k._fn(S) for c, k in zip(cs, ks))),
        name="scaled_sum")


FAMILY_BUILDERS = {
    "modular": random_modular,
    "concave": random_concave,
    "cut": random_cut,
    "facility": random_facility,
    "scaled_sum": random_scaled_sum,
}

NONNEG_FAMILIES = ("concave", "cut", "facility", "scaled_sum")


def random_submodular(rng, n, families=None):
    families = families or tuple(FAMILY_BUILDERS)
    fam = rng.choice(list(families))
    return FAMILY_BUILDERS[fam](rng, n)


def random_nonneg_submodular(rng, n):
    return random_submodular(rng, n, NONNEG_FAMILIES)


def random_ds_instance(rng, n, families=None):
    f = random_submodular(rng, n, families)
    g = random_submodular(rng, n, families)
    return DSInstance(f, g)


def all_subsets(n):
    elems = range(1, n + 1)
    for k in range(n + 1):
        for combo in itertools.combinations(elems, k):
            yield frozenset(combo)


def exhaustive_min(fn, n):
    """Independent brute-force oracle over a plain callable."""
    best_set, best_val = frozenset(), fn(frozenset())
    for S in all_subsets(n):
        val = fn(S)
        if val < best_val - 0.0:
            best_set, best_val = S, val
    return best_set, best_val


def exhaustive_max(fn, n):
    best_set, best_val = frozenset(), fn(frozenset())
    for S in all_subsets(n):
        val = fn(S)
        if val > best_val:
            best_set, best_val = S, val
    return best_set, best_val
