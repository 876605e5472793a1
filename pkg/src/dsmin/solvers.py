"""Descent procedures for minimizing a difference of two submodular functions.

Three majorize-and-minimize loops over v = f - g, differing in which side
gets replaced by a tight modular bound at the current iterate:

* ``sub_sup``  keeps f and lower-bounds g; each step is an exact submodular
  minimization of the surrogate (minimum-norm point by default).
* ``sup_sub``  upper-bounds f and keeps g; each step approximately maximizes
  the submodular g - m (double greedy plus local-search polish, or a
  cardinality greedy under a size cap).
* ``mod_mod``  bounds both sides; each step minimizes a plain modular
  function, optionally under a combinatorial constraint.

All three accept a step only if the objective does not increase, which
makes every trace monotone regardless of how rough the inner solver is.
A step must additionally clear the multiplicative improvement gate of the
epsilon-approximate rule (``accept_step``).  Moves to a different set of
exactly equal value are taken at most once each (never revisiting a set
since the last strict decrease), which lets the bound-based procedures
walk off weak plateaus without losing termination.

On a stall each procedure retries a linear-size family of permutations
and/or bound variants before declaring convergence; by construction that
family certifies that no single-element change improves v, so converged
unconstrained runs end at a local minimum.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Sequence

import numpy as np

from .bounds import Permutation, modular_lower_bound, modular_upper_bound
from .constraints import (Constraint, modular_maximal_minimizer,
                          modular_minimize_constrained)
from .core import (FLOAT_TOL, GroundSet, MemoizedOracle, SetFunctionOracle,
                   brute_force_minimize, memoized, subset_key,
                   subsets_canonical)
from .sfm import min_norm_point
from .sfmax import double_greedy, greedy_cardinality_max, local_search_max

_EQ_TOL = 1e-12  # two objective values within this are treated as equal

HEURISTICS = ("random", "g_gain", "v_gain")
UB_STRATEGIES = ("best_of_both", "alternate")


class SolverError(RuntimeError):
    """Inner-solver failure; carries the partial trace accumulated so far."""

    def __init__(self, message: str, trace: "OptimizationTrace | None" = None):
        super().__init__(message)
        self.trace = trace


@dataclass
class DSInstance:
    """A pair (f, g) of normalized submodular oracles over one ground set."""

    f: SetFunctionOracle
    g: SetFunctionOracle

    def __post_init__(self):
        if self.f.ground.n != self.g.ground.n:
            raise ValueError("f and g must share a ground set")
        for name, o in (("f", self.f), ("g", self.g)):
            v0 = o(frozenset())
            if abs(v0) > FLOAT_TOL:
                raise ValueError(f"{name} is not normalized: value at empty set is {v0!r}")

    @property
    def ground(self) -> GroundSet:
        return self.f.ground

    def value(self, X: Iterable[int]) -> float:
        return self.f(X) - self.g(X)

    def v_oracle(self) -> SetFunctionOracle:
        """The difference f - g as a plain oracle (counts land on f and g)."""
        return SetFunctionOracle(self.ground, lambda S: self.f(S) - self.g(S), name="v")


@dataclass
class SolverOptions:
    """Knobs shared by the three procedures."""

    epsilon: float = 0.0
    max_iters: int = 200
    heuristic: str = "g_gain"
    ub_strategy: str = "best_of_both"
    seed: int = 0
    sfm_method: str = "min_norm"      # min_norm | brute
    max_method: str = "double_greedy"  # double_greedy | brute
    dg_mode: str = "deterministic"     # deterministic | randomized
    sfm_tol: float = 1e-10
    memoize: bool = True

    def __post_init__(self):
        if self.epsilon < 0:
            raise ValueError("epsilon must be >= 0")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.heuristic not in HEURISTICS:
            raise ValueError(f"heuristic must be one of {HEURISTICS}")
        if self.ub_strategy not in UB_STRATEGIES:
            raise ValueError(f"ub_strategy must be one of {UB_STRATEGIES}")
        if self.sfm_method not in ("min_norm", "brute"):
            raise ValueError("sfm_method must be min_norm or brute")
        if self.max_method not in ("double_greedy", "brute"):
            raise ValueError("max_method must be double_greedy or brute")
        if self.dg_mode not in ("deterministic", "randomized"):
            raise ValueError("dg_mode must be deterministic or randomized")


@dataclass
class TracePoint:
    set: frozenset
    value: float
    oracle_calls: int
    elapsed: float


@dataclass
class OptimizationTrace:
    """Accepted iterates of one solver run, plus how and why it stopped."""

    algorithm: str
    seed: int
    epsilon: float
    iterates: list[TracePoint] = field(default_factory=list)
    termination: str = "iter_cap"      # converged | epsilon_stop | iter_cap
    locally_optimal: bool | None = None

    @property
    def final_point(self) -> TracePoint:
        # canonical best: the minimum value is reached by the tail of the
        # (non-increasing) trace; ties break by cardinality then lexicographic
        best = min(p.value for p in self.iterates)
        ties = [p for p in self.iterates if p.value <= best + _EQ_TOL]
        return min(ties, key=lambda p: subset_key(p.set))

    @property
    def final_set(self) -> frozenset:
        return self.final_point.set

    @property
    def final_value(self) -> float:
        return self.final_point.value

    @property
    def n_accepted(self) -> int:
        return len(self.iterates) - 1

    def values(self) -> list[float]:
        return [p.value for p in self.iterates]

    def to_json_dict(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "seed": self.seed,
            "epsilon": self.epsilon,
            "termination": self.termination,
            "locally_optimal": self.locally_optimal,
            "final": {
                "set": sorted(self.final_set),
                "value": self.final_value,
                "iterations": self.n_accepted,
                "oracle_calls": self.iterates[-1].oracle_calls,
            },
            "iterates": [
                {"set": sorted(p.set), "value": p.value, "oracle_calls": p.oracle_calls}
                for p in self.iterates
            ],
        }

    def write_json(self, path: str) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh, indent=2)
            fh.write("\n")

    def write_csv(self, path: str) -> None:
        with open(path, "w") as fh:
            fh.write("iteration,value,oracle_calls,millis\n")
            for i, p in enumerate(self.iterates):
                fh.write(f"{i},{p.value!r},{p.oracle_calls},{p.elapsed * 1000.0:.3f}\n")


def accept_step(v_prev: float, v_next: float, epsilon: float) -> bool:
    """Multiplicative sufficient-improvement gate for one step.

    Negative current value: require v_next <= v_prev * (1 + epsilon).
    Zero current value: require a strict decrease below zero.  Positive
    current value (possible under constraints): require a decrease of at
    least epsilon * |v_prev|.
    """
    if epsilon < 0:
        raise ValueError("epsilon must be >= 0")
    if v_prev < 0.0:
        return v_next <= v_prev * (1.0 + epsilon)
    if v_prev == 0.0:
        return v_next < 0.0
    return v_next <= v_prev - epsilon * abs(v_prev)


def local_optimality_check(v: Callable[[frozenset], float], X: Iterable[int],
                           tol: float = FLOAT_TOL, ground: GroundSet | None = None) -> bool:
    """True iff no single-element addition or deletion decreases v at X."""
    if ground is None:
        ground = v.ground  # type: ignore[attr-defined]
    X = frozenset(X)
    base = v(X)
    for j in ground.elements():
        T = X - {j} if j in X else X | {j}
        if v(T) < base - tol:
            return False
    return True


def epsilon_iteration_cap(lower_bound: float, first_value: float, epsilon: float) -> int:
    """Worst-case accepted-iteration count of an epsilon-approximate run.

    Each accepted step past the first shrinks a negative objective by the
    factor (1 + epsilon) while it can never drop below the certified lower
    bound, so at most ceil(ln(|bound| / |v1|) / ln(1 + epsilon)) + 1 steps
    are ever accepted.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be > 0 for a finite cap")
    if first_value >= 0 or lower_bound >= 0:
        raise ValueError("cap defined for negative first value and lower bound")
    ratio = abs(lower_bound) / abs(first_value)
    return max(1, math.ceil(math.log(ratio) / math.log1p(epsilon))) + 1


def choose_permutation(heuristic: str, X_t: Iterable[int], scorer: SetFunctionOracle,
                       seed) -> Permutation:
    """Permutation whose chain contains X_t, ordered per the heuristic.

    Gain heuristics place the members of X_t first, sorted by decreasing
    within-gain scorer(j | X_t - j), followed by the outside elements by
    decreasing add-gain scorer(j | X_t); ties break toward the lower index.
    ``random`` shuffles the two segments uniformly under the given seed.
    """
    if heuristic not in HEURISTICS:
        raise ValueError(f"heuristic must be one of {HEURISTICS}")
    ground = scorer.ground
    X = ground.check_subset(X_t)
    inside = sorted(X)
    outside = sorted(ground.full - X)
    if heuristic == "random":
        rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
        inside = list(rng.permutation(inside)) if inside else []
        outside = list(rng.permutation(outside)) if outside else []
        return Permutation(tuple(int(j) for j in inside + outside))
    base = scorer(X)
    in_scores = {j: base - scorer(X - {j}) for j in inside}
    out_scores = {j: scorer(X | {j}) - base for j in outside}
    inside.sort(key=lambda j: (-in_scores[j], j))
    outside.sort(key=lambda j: (-out_scores[j], j))
    return Permutation(tuple(inside + outside))


def _boundary_permutation(X: frozenset, j: int, n: int,
                          rng: np.random.Generator) -> Permutation:
    """Random chain through X pinning element j at the inside/outside boundary."""
    if j in X:
        inside = [int(i) for i in rng.permutation(sorted(X - {j}))] + [j]
        outside = [int(i) for i in rng.permutation(sorted(set(range(1, n + 1)) - X))]
    else:
        inside = [int(i) for i in rng.permutation(sorted(X))]
        rest = sorted(set(range(1, n + 1)) - X - {j})
        outside = [j] + [int(i) for i in rng.permutation(rest)]
    return Permutation(tuple(inside + outside))


# -- shared descent driver ------------------------------------------------------


class _Run:
    def __init__(self, algo: str, inst: DSInstance, opts: SolverOptions,
                 constraint: Constraint):
        self.algo = algo
        self.opts = opts
        self.constraint = constraint
        self.ground = inst.ground
        if opts.memoize:
            self.f = memoized(inst.f)
            self.g = memoized(inst.g)
        else:
            self.f, self.g = inst.f, inst.g
        self.rng = np.random.default_rng(opts.seed)
        self.t0 = time.perf_counter()
        self._vcache: dict[frozenset, float] = {}

    def value(self, S: frozenset) -> float:
        hit = self._vcache.get(S)
        if hit is None:
            hit = self._vcache[S] = self.f(S) - self.g(S)
        return hit

    def calls(self) -> int:
        return self.f.call_count + self.g.call_count

    def point(self, S: frozenset) -> TracePoint:
        return TracePoint(S, self.value(S), self.calls(),
                          time.perf_counter() - self.t0)

    def v_oracle(self) -> SetFunctionOracle:
        return SetFunctionOracle(self.ground, lambda S: self.value(S), name="v")

    def scorer(self, heuristic: str) -> SetFunctionOracle:
        if heuristic == "v_gain":
            return self.v_oracle()
        return SetFunctionOracle(self.ground, lambda S: self.g(S), name="g_view")


def _plateau_allowed(v_cur: float, epsilon: float) -> bool:
    # the raw non-increase rule v_next <= v_prev*(1+eps) admits equal-value
    # moves exactly when eps == 0 or the current value is 0
    return epsilon == 0.0 or v_cur == 0.0


def _descent(run: _Run, start: frozenset, primary, sweep) -> OptimizationTrace:
    opts = run.opts
    trace = OptimizationTrace(run.algo, opts.seed, opts.epsilon)
    X = start
    trace.iterates.append(run.point(X))
    plateau_seen = {X}

    try:
        t = 0
        while True:
            v_cur = run.value(X)
            move = None
            move_is_strict = False
            eps_blocked = False
            plateau_pool: list[frozenset] = []
            for phase in (primary, sweep):
                strict: list[tuple[float, frozenset]] = []
                for cand in phase(X, t):
                    if cand == X or not run.constraint.is_feasible(cand):
                        continue
                    val = run.value(cand)
                    if val < v_cur - _EQ_TOL:
                        if accept_step(v_cur, val, opts.epsilon):
                            strict.append((val, cand))
                        else:
                            eps_blocked = True
                    elif abs(val - v_cur) <= _EQ_TOL:
                        plateau_pool.append(cand)
                if strict:
                    _, move = min(strict, key=lambda p: (p[0], subset_key(p[1])))
                    move_is_strict = True
                    break
            if move is None and _plateau_allowed(v_cur, opts.epsilon):
                fresh = [c for c in plateau_pool if c not in plateau_seen]
                if fresh:
                    move = min(fresh, key=subset_key)
            if move is None:
                trace.termination = "epsilon_stop" if eps_blocked else "converged"
                break
            if move_is_strict:
                plateau_seen = {move}
            else:
                plateau_seen.add(move)
            X = move
            trace.iterates.append(run.point(X))
            t += 1
            if t >= opts.max_iters:
                trace.termination = "iter_cap"
                break
    except Exception as exc:
        raise SolverError(f"{run.algo} inner solver failed: {exc}", trace) from exc

    if run.constraint.kind == "none":
        trace.locally_optimal = local_optimality_check(
            run.value, trace.final_set, ground=run.ground)
    return trace


# -- the three procedures --------------------------------------------------------


def _variants(strategy: str, t: int) -> tuple[int, ...]:
    if strategy == "best_of_both":
        return (1, 2)
    return (1,) if t % 2 == 0 else (2,)


def sub_sup(inst: DSInstance, opts: SolverOptions | None = None) -> OptimizationTrace:
    """Descend on v = f - g by exactly minimizing f minus a lower bound of g.

    Starting from the empty set, each iteration picks a permutation chain
    through the current set (by the configured heuristic), builds the tight
    modular lower bound of g along it, and minimizes the submodular
    surrogate exactly.  On a stall, both gain-ordered permutations plus one
    boundary-pinned random permutation per element are retried, which
    certifies local optimality on convergence.
    """
    opts = opts or SolverOptions()
    run = _Run("subsup", inst, opts, Constraint.none())
    ground = run.ground
    heur_scorer = run.scorer(opts.heuristic)

    def candidates(X: frozenset, sigma: Permutation) -> list[frozenset]:
        h = modular_lower_bound(run.g, X, sigma)
        sur = SetFunctionOracle(ground, lambda S: run.f(S) - h.value(S), "f_minus_h")
        if opts.sfm_method == "brute":
            Xm, val = brute_force_minimize(sur)
            largest = max((S for S in subsets_canonical(ground)
                           if sur(S) <= val + _EQ_TOL),
                          key=lambda S: (len(S), tuple(sorted(S))))
            return [Xm, largest]
        Xm, _, x = min_norm_point(sur, tol=opts.sfm_tol)
        tol_prime = max(10.0 * opts.sfm_tol, 1e-9)
        largest = frozenset(j for j in ground.elements() if x[j - 1] < tol_prime)
        return [Xm, largest]

    def primary(X, t):
        sigma = choose_permutation(opts.heuristic, X, heur_scorer, run.rng)
        return candidates(X, sigma)

    def sweep(X, t):
        out: list[frozenset] = []
        for heur in ("g_gain", "v_gain"):
            sigma = choose_permutation(heur, X, run.scorer(heur), run.rng)
            out.extend(candidates(X, sigma))
        for j in ground.elements():
            sigma = _boundary_permutation(X, j, ground.n, run.rng)
            out.extend(candidates(X, sigma))
        return out

    return _descent(run, frozenset(), primary, sweep)


def sup_sub(inst: DSInstance, opts: SolverOptions | None = None,
            constraint: Constraint = Constraint.none()) -> OptimizationTrace:
    """Descend on v = f - g by approximately maximizing g minus an upper bound of f.

    Supports no constraint or a cardinality cap.  The inner maximizer is
    double greedy polished by local search (or a cardinality greedy when
    capped); a candidate is taken only if v does not increase.  On a stall
    both upper-bound variants are retried and then the full one-element
    neighborhood is scanned, realizing the local-optimality conditions the
    two bound variants certify on single deletions and additions.
    """
    opts = opts or SolverOptions()
    if constraint.kind not in ("none", "cardinality_le"):
        raise ValueError(f"sup_sub supports none or cardinality_le constraints, "
                         f"got {constraint.kind!r}")
    constraint.validate(inst.ground.n)
    run = _Run("supsub", inst, opts, constraint)
    ground = run.ground

    def maximize(X: frozenset, variant: int) -> frozenset:
        m = modular_upper_bound(run.f, X, variant)
        sur = SetFunctionOracle(ground, lambda S: run.g(S) - m.value(S), "g_minus_m")
        if constraint.kind == "cardinality_le":
            res = greedy_cardinality_max(sur, constraint.k)
            return _polish_feasible(sur, res.set, constraint)
        if opts.max_method == "brute":
            best, best_val = frozenset(), sur(frozenset())
            for S in subsets_canonical(ground):
                val = sur(S)
                if val > best_val + _EQ_TOL:
                    best, best_val = S, val
            return best
        seed = int(run.rng.integers(2 ** 31)) if opts.dg_mode == "randomized" else None
        res = double_greedy(sur, opts.dg_mode, seed)
        return local_search_max(sur, res.set).set

    def primary(X, t):
        return [maximize(X, v) for v in _variants(opts.ub_strategy, t)]

    def sweep(X, t):
        out = [maximize(X, v) for v in (1, 2)]
        for j in ground.elements():
            T = X - {j} if j in X else X | {j}
            out.append(T)
        return out

    return _descent(run, frozenset(), primary, sweep)


def _polish_feasible(sur: SetFunctionOracle, start: frozenset,
                     constraint: Constraint) -> frozenset:
    """Local search on the surrogate restricted to feasible single moves."""
    S = start
    val = sur(S)
    while True:
        best_val, best_set = val, None
        for j in sur.ground.elements():
            T = S - {j} if j in S else S | {j}
            if not constraint.is_feasible(T):
                continue
            v = sur(T)
            if v > best_val:
                best_val, best_set = v, T
        if best_set is None:
            return S
        S, val = best_set, best_val


def mod_mod(inst: DSInstance, opts: SolverOptions | None = None,
            constraint: Constraint = Constraint.none()) -> OptimizationTrace:
    """Descend on v = f - g by minimizing a fully modular surrogate each step.

    Both sides are replaced by tight modular bounds at the current set and
    the resulting affine-modular function is minimized exactly, under any
    supported constraint.  On a stall the procedure sweeps one permutation
    per element (pinning that element at the chain boundary) crossed with
    both upper-bound variants, which certifies local optimality on
    convergence.  If the empty set is infeasible the run bootstraps from
    the constrained surrogate minimizer anchored at the empty set.
    """
    opts = opts or SolverOptions()
    constraint.validate(inst.ground.n)
    run = _Run("modmod", inst, opts, constraint)
    ground = run.ground
    heur_scorer = run.scorer(opts.heuristic)

    def candidates(X: frozenset, sigma: Permutation, variant: int) -> list[frozenset]:
        h = modular_lower_bound(run.g, X, sigma)
        m = modular_upper_bound(run.f, X, variant)
        diff = m - h
        out = [modular_minimize_constrained(diff, constraint)]
        alt = modular_maximal_minimizer(diff, constraint)
        if alt is not None and alt != out[0]:
            out.append(alt)
        return out

    def primary(X, t):
        sigma = choose_permutation(opts.heuristic, X, heur_scorer, run.rng)
        out: list[frozenset] = []
        for v in _variants(opts.ub_strategy, t):
            out.extend(candidates(X, sigma, v))
        return out

    def sweep(X, t):
        out: list[frozenset] = []
        for j in ground.elements():
            sigma = _boundary_permutation(X, j, ground.n, run.rng)
            for v in (1, 2):
                out.extend(candidates(X, sigma, v))
        return out

    start = frozenset()
    if not constraint.empty_is_feasible():
        sigma = choose_permutation(opts.heuristic, start, heur_scorer, run.rng)
        boot = [c for v in (1, 2) for c in candidates(start, sigma, v)
                if constraint.is_feasible(c)]
        if not boot:
            raise SolverError("could not find a feasible starting point", None)
        start = min(boot, key=lambda S: (run.value(S), subset_key(S)))

    return _descent(run, start, primary, sweep)
