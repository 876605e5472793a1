"""Built-in set-function families and their JSON instance format.

Every family except ``explicit_table`` constructs a submodular oracle by
construction (validated parameter ranges); explicit tables can encode any
set function and are only checkable exhaustively.  All built oracles are
normalized so the empty set evaluates to 0.

JSON shape of a function spec::

    {"kind": "modular", "weights": [...]}
    {"kind": "concave_of_modular", "shape": "sqrt"|"log1p"|"power"|"cap",
     "weights": [...], "exponent": p, "cap": c}
    {"kind": "graph_cut", "n": n, "edges": [[u, v, w], ...]}
    {"kind": "facility_location", "benefits": [[...], ...]}
    {"kind": "explicit_table", "n": n, "values": [...2^n floats...]}
    {"kind": "scaled_sum", "terms": [{"coeff": c, "spec": {...}}, ...]}

A problem instance file is ``{"n": n, "f": spec, "g": spec}``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Any

import numpy as np

from .core import GroundSet, SetFunctionOracle, mask_of

KINDS = ("modular", "concave_of_modular", "graph_cut", "facility_location",
         "explicit_table", "scaled_sum")

CONCAVE_SHAPES = ("sqrt", "log1p", "power", "cap")


@dataclass(frozen=True)
class FunctionSpec:
    """Declarative description of one set function."""

    kind: str
    params: dict

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown function kind {self.kind!r}")

    def to_dict(self) -> dict:
        return {"kind": self.kind, **_params_to_jsonable(self.kind, self.params)}

    @staticmethod
    def from_dict(d: dict) -> "FunctionSpec":
        if not isinstance(d, dict) or "kind" not in d:
            raise ValueError("function spec must be an object with a 'kind' field")
        kind = d["kind"]
        params = {k: v for k, v in d.items() if k != "kind"}
        return FunctionSpec(kind, params)


def _params_to_jsonable(kind: str, params: dict) -> dict:
    out = {}
    for k, v in params.items():
        if isinstance(v, np.ndarray):
            out[k] = v.tolist()
        elif kind == "scaled_sum" and k == "terms":
            out[k] = [{"coeff": t["coeff"], "spec": (t["spec"].to_dict()
                       if isinstance(t["spec"], FunctionSpec) else t["spec"])}
                      for t in v]
        else:
            out[k] = v
    return out


# -- convenience constructors -------------------------------------------------

def modular_spec(weights) -> FunctionSpec:
    return FunctionSpec("modular", {"weights": list(map(float, weights))})


def sqrt_cardinality_spec(n: int, coeff: float = 1.0) -> FunctionSpec:
    base = FunctionSpec("concave_of_modular", {"shape": "sqrt", "weights": [1.0] * n})
    if coeff == 1.0:
        return base
    return FunctionSpec("scaled_sum", {"terms": [{"coeff": float(coeff), "spec": base}]})


def graph_cut_spec(n: int, edges) -> FunctionSpec:
    return FunctionSpec("graph_cut", {"n": int(n), "edges": [list(e) for e in edges]})


def table_spec(n: int, values) -> FunctionSpec:
    return FunctionSpec("explicit_table", {"n": int(n), "values": list(map(float, values))})


def scaled_sum_spec(terms) -> FunctionSpec:
    return FunctionSpec("scaled_sum",
                        {"terms": [{"coeff": float(c), "spec": s} for c, s in terms]})


# -- builders ------------------------------------------------------------------

def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ValueError(msg)


def _weights_array(params: dict, key: str = "weights") -> np.ndarray:
    _require(key in params, f"missing '{key}'")
    w = np.asarray(params[key], dtype=float)
    _require(w.ndim == 1 and len(w) >= 1, f"'{key}' must be a non-empty vector")
    return w


def _build_modular(params, ground):
    w = _weights_array(params)
    ground = ground or GroundSet(len(w))
    _require(ground.n == len(w), "weight vector length must equal ground set size")
    return SetFunctionOracle(ground, lambda S: float(sum(w[j - 1] for j in S)), name="modular")


def _concave_fn(shape: str, params: dict):
    if shape == "sqrt":
        return math.sqrt
    if shape == "log1p":
        return math.log1p
    if shape == "power":
        p = float(params.get("exponent", 0.5))
        _require(0.0 < p <= 1.0, "power shape needs exponent in (0, 1]")
        return lambda t: t ** p
    if shape == "cap":
        c = float(params.get("cap", 1.0))
        _require(c >= 0.0, "cap must be non-negative")
        return lambda t: min(t, c)
    raise ValueError(f"unknown concave shape {shape!r}")


def _build_concave_of_modular(params, ground):
    shape = params.get("shape", "sqrt")
    _require(shape in CONCAVE_SHAPES, f"unknown concave shape {shape!r}")
    w = _weights_array(params)
    _require(np.all(w >= 0.0), "concave-of-modular weights must be non-negative")
    phi = _concave_fn(shape, params)
    ground = ground or GroundSet(len(w))
    _require(ground.n == len(w), "weight vector length must equal ground set size")
    return SetFunctionOracle(ground, lambda S: float(phi(sum(w[j - 1] for j in S))),
                             name=f"{shape}_of_modular")


def _build_graph_cut(params, ground):
    _require("n" in params, "graph_cut needs 'n'")
    n = int(params["n"])
    ground = ground or GroundSet(n)
    _require(ground.n == n, "graph_cut 'n' must equal ground set size")
    edges = []
    for e in params.get("edges", []):
        _require(len(e) in (2, 3), "edge must be [u, v] or [u, v, weight]")
        u, v = int(e[0]), int(e[1])
        w = float(e[2]) if len(e) == 3 else 1.0
        _require(1 <= u <= n and 1 <= v <= n and u != v, f"bad edge endpoints ({u}, {v})")
        _require(w >= 0.0, "cut edge weights must be non-negative")
        edges.append((u, v, w))

    def cut(S):
        total = 0.0
        for u, v, w in edges:
            if (u in S) != (v in S):
                total += w
        return total

    return SetFunctionOracle(ground, cut, name="graph_cut")


def _build_facility_location(params, ground):
    _require("benefits" in params, "facility_location needs 'benefits'")
    B = np.asarray(params["benefits"], dtype=float)
    _require(B.ndim == 2 and B.shape[1] >= 1, "'benefits' must be a 2-D matrix")
    _require(np.all(B >= 0.0), "facility benefits must be non-negative")
    n = B.shape[1]
    ground = ground or GroundSet(n)
    _require(ground.n == n, "benefit matrix width must equal ground set size")

    def fl(S):
        if not S:
            return 0.0
        cols = [j - 1 for j in S]
        return float(B[:, cols].max(axis=1).sum())

    return SetFunctionOracle(ground, fl, name="facility_location")


def _build_explicit_table(params, ground):
    _require("n" in params and "values" in params, "explicit_table needs 'n' and 'values'")
    n = int(params["n"])
    _require(1 <= n <= 20, "explicit_table limited to 1 <= n <= 20")
    vals = np.asarray(params["values"], dtype=float)
    _require(vals.shape == (1 << n,), f"table needs exactly 2^{n} values")
    ground = ground or GroundSet(n)
    _require(ground.n == n, "table 'n' must equal ground set size")
    vals = vals - vals[0]  # normalize at construction
    return SetFunctionOracle(ground, lambda S: float(vals[mask_of(S)]), name="table")


def _build_scaled_sum(params, ground):
    terms = params.get("terms")
    _require(isinstance(terms, list) and terms, "scaled_sum needs a non-empty 'terms' list")
    children = []
    for t in terms:
        _require("coeff" in t and "spec" in t, "each term needs 'coeff' and 'spec'")
        c = float(t["coeff"])
        _require(c >= 0.0, "scaled_sum coefficients must be non-negative")
        sub = t["spec"] if isinstance(t["spec"], FunctionSpec) else FunctionSpec.from_dict(t["spec"])
        children.append((c, sub))
    oracles = [(c, build_function(s, ground)) for c, s in children]
    ground = ground or oracles[0][1].ground
    for _, o in oracles:
        _require(o.ground.n == ground.n, "scaled_sum children must share one ground set")

    def total(S):
        return float(sum(c * o._fn(S) for c, o in oracles))

    return SetFunctionOracle(ground, total, name="scaled_sum")


_BUILDERS = {
    "modular": _build_modular,
    "concave_of_modular": _build_concave_of_modular,
    "graph_cut": _build_graph_cut,
    "facility_location": _build_facility_location,
    "explicit_table": _build_explicit_table,
    "scaled_sum": _build_scaled_sum,
}


def build_function(spec: FunctionSpec, ground: GroundSet | None = None) -> SetFunctionOracle:
    """Construct the oracle a spec describes, normalized to 0 at the empty set."""
    try:
        return _BUILDERS[spec.kind](spec.params, ground)
    except KeyError as exc:
        raise ValueError(f"unknown function kind {spec.kind!r}") from exc


def load_instance(path: str) -> tuple[GroundSet, SetFunctionOracle, SetFunctionOracle, dict]:
    """Read an instance file; returns (ground, f, g, raw document)."""
    with open(path) as fh:
        doc = json.load(fh)
    return instance_from_dict(doc) + (doc,)


def instance_from_dict(doc: dict) -> tuple[GroundSet, SetFunctionOracle, SetFunctionOracle]:
    if not isinstance(doc, dict):
        raise ValueError("instance document must be a JSON object")
    for key in ("n", "f", "g"):
        if key not in doc:
            raise ValueError(f"instance document missing '{key}'")
    ground = GroundSet(int(doc["n"]))
    f = build_function(FunctionSpec.from_dict(doc["f"]), ground)
    g = build_function(FunctionSpec.from_dict(doc["g"]), ground)
    return ground, f, g
