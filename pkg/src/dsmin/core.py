"""Ground sets, set-function oracles, and exhaustive reference tools.

Elements of a ground set are the integers ``1..n`` and subsets are plain
``frozenset`` values.  Whenever a tie has to be broken between subsets, the
canonical order is: smaller cardinality first, then lexicographically
smaller sorted index tuple.  Bitmask representations (used by the
exhaustive helpers) put element ``j`` on bit ``j - 1``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator

import numpy as np

# Absolute tolerance for all floating >= / <= checks unless overridden.
FLOAT_TOL = 1e-9


@dataclass(frozen=True)
class GroundSet:
    """The index set {1, ..., n}."""

    n: int

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 1:
            raise ValueError(f"ground set size must be an integer >= 1, got {self.n!r}")

    def elements(self) -> range:
        return range(1, self.n + 1)

    @property
    def full(self) -> frozenset:
        return frozenset(self.elements())

    def check_element(self, j: int) -> None:
        if not (isinstance(j, (int, np.integer)) and 1 <= j <= self.n):
            raise ValueError(f"element {j!r} outside ground set 1..{self.n}")

    def check_subset(self, X: Iterable[int]) -> frozenset:
        S = frozenset(int(j) for j in X)
        for j in S:
            if not 1 <= j <= self.n:
                raise ValueError(f"element {j} outside ground set 1..{self.n}")
        return S

    def complement(self, X: Iterable[int]) -> frozenset:
        return self.full - frozenset(X)


def subset_key(X: Iterable[int]) -> tuple:
    """Canonical sort key: cardinality first, then sorted indices."""
    t = tuple(sorted(X))
    return (len(t), t)


def canonical_min(sets: Iterable[Iterable[int]]) -> frozenset:
    return frozenset(min(sets, key=subset_key))


def subsets_canonical(ground: GroundSet) -> Iterator[frozenset]:
    """All subsets in canonical order (by cardinality, then lexicographic)."""
    elems = list(ground.elements())
    for k in range(ground.n + 1):
        for combo in itertools.combinations(elems, k):
            yield frozenset(combo)


def mask_of(X: Iterable[int]) -> int:
    m = 0
    for j in X:
        m |= 1 << (j - 1)
    return m


def set_of(mask: int, n: int) -> frozenset:
    return frozenset(j for j in range(1, n + 1) if mask >> (j - 1) & 1)


class SetFunctionOracle:
    """A real-valued set function with an evaluation counter.

    The wrapped callable must be deterministic.  ``call_count`` increments
    once per evaluation; memoizing variants only count distinct evaluations.
    """

    def __init__(self, ground: GroundSet, fn: Callable[[frozenset], float], name: str = "f"):
        self.ground = ground
        self.name = name
        self.call_count = 0
        self._fn = fn

    def __call__(self, X: Iterable[int]) -> float:
        S = X if isinstance(X, frozenset) else self.ground.check_subset(X)
        self.call_count += 1
        return float(self._fn(S))

    def reset_count(self) -> None:
        self.call_count = 0

    def __repr__(self):
        return f"SetFunctionOracle({self.name}, n={self.ground.n}, calls={self.call_count})"


class MemoizedOracle(SetFunctionOracle):
    """Caching view of another oracle; ``call_count`` counts cache misses only."""

    def __init__(self, inner: SetFunctionOracle, name: str | None = None):
        super().__init__(inner.ground, inner._fn, name or inner.name)
        self._cache: dict[frozenset, float] = {}

    def __call__(self, X: Iterable[int]) -> float:
        S = X if isinstance(X, frozenset) else self.ground.check_subset(X)
        hit = self._cache.get(S)
        if hit is not None:
            return hit
        self.call_count += 1
        val = float(self._fn(S))
        self._cache[S] = val
        return val


def memoized(oracle: SetFunctionOracle) -> MemoizedOracle:
    return MemoizedOracle(oracle)


def normalized(oracle: SetFunctionOracle) -> SetFunctionOracle:
    """Shift an oracle so that the empty set evaluates to exactly 0."""
    base = oracle(frozenset())
    if base == 0.0:
        return oracle
    return SetFunctionOracle(oracle.ground, lambda S, _o=oracle._fn, _b=base: _o(S) - _b,
                             name=oracle.name)


@dataclass(frozen=True, eq=False)
class AffineModular:
    """Constant offset plus per-element weights.

    ``value(Y) = offset + sum(weights[j-1] for j in Y)``.  Represents the
    tight modular lower bounds, both tight modular upper bounds, and every
    modular surrogate subproblem.
    """

    offset: float
    weights: np.ndarray

    @property
    def n(self) -> int:
        return len(self.weights)

    def weight(self, j: int) -> float:
        return float(self.weights[j - 1])

    def value(self, Y: Iterable[int]) -> float:
        return float(self.offset + sum(self.weights[j - 1] for j in Y))

    __call__ = value

    def __sub__(self, other: "AffineModular") -> "AffineModular":
        return AffineModular(self.offset - other.offset, self.weights - other.weights)

    def __add__(self, other: "AffineModular") -> "AffineModular":
        return AffineModular(self.offset + other.offset, self.weights + other.weights)

    def as_oracle(self, ground: GroundSet, name: str = "modular") -> SetFunctionOracle:
        return SetFunctionOracle(ground, self.value, name=name)

    @staticmethod
    def from_weights(weights, offset: float = 0.0) -> "AffineModular":
        return AffineModular(float(offset), np.asarray(weights, dtype=float).copy())


def gain(f: SetFunctionOracle, j: int, X: Iterable[int]) -> float:
    """Marginal value f(X + j) - f(X) of adding element j in context X.

    Costs exactly two oracle calls, or one call (returning 0) if j is
    already in X.
    """
    f.ground.check_element(j)
    S = f.ground.check_subset(X)
    if j in S:
        f(S)
        return 0.0
    return f(S | {j}) - f(S)


BRUTE_FORCE_MAX_N = 25


def brute_force_minimize(v: SetFunctionOracle) -> tuple[frozenset, float]:
    """Exhaustive global minimization, for reference and desk-scale testing.

    Ties are broken canonically: smallest cardinality, then lexicographically
    smallest index set.  Refuses ground sets with more than 25 elements.
    """
    n = v.ground.n
    if n > BRUTE_FORCE_MAX_N:
        raise ValueError(f"brute-force minimization refused for n={n} > {BRUTE_FORCE_MAX_N}")
    best_set = frozenset()
    best_val = v(best_set)
    for S in subsets_canonical(v.ground):
        if not S:
            continue
        val = v(S)
        if val < best_val:
            best_set, best_val = S, val
    return best_set, best_val


TABLE_MAX_N = 20


def evaluate_table(f: SetFunctionOracle) -> np.ndarray:
    """Evaluate f on all subsets; entry ``m`` is f of the bitmask-``m`` set."""
    n = f.ground.n
    if n > TABLE_MAX_N:
        raise ValueError(f"full table refused for n={n} > {TABLE_MAX_N}")
    out = np.empty(1 << n)
    for m in range(1 << n):
        out[m] = f(set_of(m, n))
    return out


SUBMODULAR_CHECK_MAX_N = 16


def check_submodular(f: SetFunctionOracle, tol: float = FLOAT_TOL) -> bool:
    """Exhaustively test the diminishing-returns property of f.

    Uses the pairwise form, equivalent to requiring the gain of any element
    to be no larger in any bigger context: for all j != k and X avoiding
    both, f(X+j) + f(X+k) >= f(X+j+k) + f(X).  Refuses n > 16.
    """
    n = f.ground.n
    if n > SUBMODULAR_CHECK_MAX_N:
        raise ValueError(f"submodularity check refused for n={n} > {SUBMODULAR_CHECK_MAX_N}")
    if n == 1:
        f(frozenset())  # every single-element function is modular
        return True
    vals = evaluate_table(f)
    masks = np.arange(1 << n)
    for a in range(n):
        ba = 1 << a
        for b in range(a + 1, n):
            bb = 1 << b
            base = masks[(masks & (ba | bb)) == 0]
            lhs = vals[base | ba] + vals[base | bb]
            rhs = vals[base | ba | bb] + vals[base]
            if np.any(lhs < rhs - tol):
                return False
    return True


def check_monotone(f: SetFunctionOracle, tol: float = FLOAT_TOL) -> bool:
    """Exhaustively test that adding any element never decreases f."""
    n = f.ground.n
    if n > SUBMODULAR_CHECK_MAX_N:
        raise ValueError(f"monotonicity check refused for n={n} > {SUBMODULAR_CHECK_MAX_N}")
    vals = evaluate_table(f)
    masks = np.arange(1 << n)
    for a in range(n):
        ba = 1 << a
        base = masks[(masks & ba) == 0]
        if np.any(vals[base | ba] < vals[base] - tol):
            return False
    return True
