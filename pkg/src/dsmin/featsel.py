"""Feature selection by mutual information with submodular feature costs.

Selecting features A to explain a class C is a trade-off between the
relevance I(X_A; C) = H(X_A) - H(X_A | C) and the cost of A.  Minimizing
``cost(A) + H(X_A | C) - H(X_A)`` is therefore a difference of two
submodular functions, which the solvers in :mod:`dsmin.solvers` handle
directly; the greedy baselines here add one feature at a time.

Entropies are empirical plug-in estimates in bits, computed in one sweep
over the rows.  The conditional entropy can be taken jointly
("non_factored") or as a per-feature sum ("factored", the class-conditional
independence shortcut); the factored sum over-counts shared class-conditional
information, which is exactly what makes the corresponding greedy weak on
redundant features.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .core import GroundSet, SetFunctionOracle, memoized
from .solvers import DSInstance, OptimizationTrace, TracePoint


@dataclass
class Dataset:
    """Categorical feature matrix with class labels.

    ``rows[i, j - 1]`` is the value of feature j in sample i; values of
    feature j lie in ``0..arity[j-1]-1``.  Entropy queries are memoized on
    the dataset.
    """

    rows: np.ndarray
    labels: np.ndarray

    arity: np.ndarray = field(init=False)
    classes: np.ndarray = field(init=False)
    _class_rows: list[np.ndarray] = field(init=False, repr=False)
    _cache: dict = field(init=False, repr=False, default_factory=dict)

    def __post_init__(self):
        self.rows = np.asarray(self.rows)
        self.labels = np.asarray(self.labels)
        if self.rows.ndim != 2 or self.rows.shape[0] == 0:
            raise ValueError("dataset needs a non-empty 2-D row matrix")
        if len(self.labels) != self.rows.shape[0]:
            raise ValueError("one label per row required")
        self.arity = self.rows.max(axis=0).astype(np.int64) + 1
        self.classes, inv = np.unique(self.labels, return_inverse=True)
        self._class_rows = [np.where(inv == c)[0] for c in range(len(self.classes))]
        self._cache = {}

    @property
    def n_rows(self) -> int:
        return self.rows.shape[0]

    @property
    def n_features(self) -> int:
        return self.rows.shape[1]

    @property
    def ground(self) -> GroundSet:
        return GroundSet(self.n_features)


def parse_sparse_dataset(path: str, format: str = "libsvm",
                         n_features: int | None = None) -> Dataset:
    """Read a sparse "label idx:val idx:val ..." text file.

    Indices are 1-based and strictly increasing per line, values binary;
    absent indices are 0.  Malformed lines are reported by number.
    """
    if format != "libsvm":
        raise ValueError(f"unsupported dataset format {format!r}")
    labels: list[int] = []
    row_indices: list[list[int]] = []
    max_idx = 0
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            parts = text.split()
            try:
                label = int(float(parts[0]))
            except ValueError:
                raise ValueError(f"{path}:{lineno}: bad label {parts[0]!r}")
            on: list[int] = []
            prev = 0
            for tok in parts[1:]:
                try:
                    idx_s, val_s = tok.split(":")
                    idx, val = int(idx_s), float(val_s)
                except ValueError:
                    raise ValueError(f"{path}:{lineno}: bad entry {tok!r}")
                if idx <= prev:
                    raise ValueError(
                        f"{path}:{lineno}: indices must be 1-based strictly increasing")
                if val not in (0.0, 1.0):
                    raise ValueError(f"{path}:{lineno}: values must be binary, got {val}")
                if val == 1.0:
                    on.append(idx)
                prev = idx
            max_idx = max(max_idx, prev)
            labels.append(label)
            row_indices.append(on)
    if not labels:
        raise ValueError(f"{path}: no data lines")
    n = n_features if n_features is not None else max_idx
    if max_idx > n:
        raise ValueError(f"{path}: feature index {max_idx} exceeds n_features={n}")
    rows = np.zeros((len(labels), n), dtype=np.int8)
    for i, on in enumerate(row_indices):
        for idx in on:
            rows[i, idx - 1] = 1
    return Dataset(rows, np.asarray(labels))


def _entropy_from_counts(counts: np.ndarray, alpha: float) -> float:
    m = counts.sum()
    if alpha == 0.0:
        p = counts / m
        return float(-(p * np.log2(p)).sum()) + 0.0
    # pseudo-count on each observed configuration plus one pooled unseen cell
    total = m + alpha * (len(counts) + 1)
    p = (counts + alpha) / total
    h = -(p * np.log2(p)).sum()
    q = alpha / total
    return float(h - q * math.log2(q))


def _joint_counts(rows: np.ndarray) -> np.ndarray:
    if rows.shape[1] == 1:
        counts = np.bincount(rows[:, 0].astype(np.int64))
        return counts[counts > 0]
    _, counts = np.unique(rows, axis=0, return_counts=True)
    return counts


def _entropy_of_rows(ds: Dataset, row_idx, A: frozenset, alpha: float) -> float:
    if not A:
        return 0.0
    cols = sorted(j - 1 for j in A)
    sub = ds.rows[row_idx][:, cols] if row_idx is not None else ds.rows[:, cols]
    if sub.shape[0] == 0:
        return 0.0
    return _entropy_from_counts(_joint_counts(sub), alpha)


def empirical_entropy(ds: Dataset, A: Iterable[int], alpha: float = 0.0) -> float:
    """Plug-in joint entropy (bits) of the features A, H of the empty set is 0."""
    if alpha < 0:
        raise ValueError("smoothing must be >= 0")
    A = ds.ground.check_subset(A)
    key = ("joint", A, alpha)
    hit = ds._cache.get(key)
    if hit is None:
        hit = ds._cache[key] = _entropy_of_rows(ds, None, A, alpha)
    return hit


def conditional_entropy(ds: Dataset, A: Iterable[int], alpha: float = 0.0) -> float:
    """Class-weighted plug-in entropy H(X_A | C) in bits."""
    A = ds.ground.check_subset(A)
    if not A:
        return 0.0
    key = ("cond", A, alpha)
    hit = ds._cache.get(key)
    if hit is not None:
        return hit
    m = ds.n_rows
    total = 0.0
    for idx in ds._class_rows:
        if len(idx) == 0:
            continue  # class with zero rows: excluded
        total += (len(idx) / m) * _entropy_of_rows(ds, idx, A, alpha)
    ds._cache[key] = total
    return total


def mutual_information(ds: Dataset, A: Iterable[int], alpha: float = 0.0,
                       mode: str = "non_factored") -> float:
    """Estimated I(X_A; C) in bits.

    ``non_factored`` subtracts the joint conditional entropy;
    ``factored`` subtracts the per-feature sum of conditional entropies
    instead (exact only when features are independent given the class).
    """
    if mode not in ("factored", "non_factored"):
        raise ValueError(f"mode must be factored or non_factored, got {mode!r}")
    A = ds.ground.check_subset(A)
    joint = empirical_entropy(ds, A, alpha)
    if mode == "non_factored":
        return joint - conditional_entropy(ds, A, alpha)
    return joint - sum(conditional_entropy(ds, frozenset({j}), alpha) for j in A)


@dataclass(frozen=True)
class CostModel:
    """Feature-cost model: plain per-feature rate or square-root block costs."""

    kind: str                      # modular_cardinality | partition_sqrt
    lam: float
    blocks: tuple[frozenset, ...] | None = None
    weights: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.kind not in ("modular_cardinality", "partition_sqrt"):
            raise ValueError(f"unknown cost model {self.kind!r}")
        if self.kind == "partition_sqrt":
            if not self.blocks or self.weights is None:
                raise ValueError("partition_sqrt needs blocks and per-feature weights")
            seen: set[int] = set()
            for b in self.blocks:
                if seen & b:
                    raise ValueError("cost blocks must be disjoint")
                seen |= b
            if any(w < 0 for w in self.weights):
                raise ValueError("cost weights must be non-negative")

    @staticmethod
    def modular_cardinality(lam: float) -> "CostModel":
        return CostModel("modular_cardinality", float(lam))

    @staticmethod
    def partition_sqrt(blocks, weights, lam: float) -> "CostModel":
        return CostModel("partition_sqrt", float(lam),
                         tuple(frozenset(b) for b in blocks),
                         tuple(float(w) for w in weights))


def evaluate_cost(cm: CostModel, A: Iterable[int]) -> float:
    """Cost of the feature set A, already scaled by the trade-off rate."""
    A = frozenset(A)
    if cm.kind == "modular_cardinality":
        return cm.lam * len(A)
    total = 0.0
    covered = 0
    for b in cm.blocks:
        hit = A & b
        covered += len(hit)
        if hit:
            total += math.sqrt(sum(cm.weights[j - 1] for j in hit))
    if covered != len(A):
        raise ValueError("feature set contains elements outside all cost blocks")
    return cm.lam * total


@dataclass
class FeatSelObjective:
    """DS form of the regularized selection problem.

    ``instance.value(A) = [H(X_A | C) + cost(A)] - H(X_A)``; minimizing it
    maximizes relevance minus cost.  The conditional entropy follows the
    chosen mode.
    """

    instance: DSInstance
    mode: str
    cost: CostModel
    alpha: float
    dataset: Dataset

    def value(self, A: Iterable[int]) -> float:
        return self.instance.value(frozenset(A))


def build_objective(ds: Dataset, cost: CostModel, alpha: float = 1.0,
                    mode: str = "non_factored") -> FeatSelObjective:
    if mode not in ("factored", "non_factored"):
        raise ValueError(f"mode must be factored or non_factored, got {mode!r}")
    ground = ds.ground
    if cost.kind == "partition_sqrt":
        union = frozenset().union(*cost.blocks)
        if union != ground.full:
            raise ValueError("cost blocks must cover every feature")

    if mode == "non_factored":
        def f_fn(S):
            return conditional_entropy(ds, S, alpha) + evaluate_cost(cost, S)
    else:
        per_feature = {j: conditional_entropy(ds, frozenset({j}), alpha)
                       for j in ground.elements()}

        def f_fn(S):
            return sum(per_feature[j] for j in S) + evaluate_cost(cost, S)

    f = memoized(SetFunctionOracle(ground, f_fn, name=f"cond_entropy_{mode}_plus_cost"))
    g = memoized(SetFunctionOracle(ground, lambda S: empirical_entropy(ds, S, alpha),
                                   name="joint_entropy"))
    return FeatSelObjective(DSInstance(f, g), mode, cost, alpha, ds)


def greedy_select(ds: Dataset, cost: CostModel, mode: str, budget: int | None = None,
                  alpha: float = 1.0) -> tuple[frozenset, OptimizationTrace]:
    """Forward greedy on the selection objective.

    ``GrF`` scores candidates with the factored conditional entropy, ``GrNF``
    with the joint one.  Adds the feature with the largest strict decrease
    of the objective; stops at the budget or when no candidate helps.
    """
    tag = mode.lower()
    if tag not in ("grf", "grnf"):
        raise ValueError(f"mode must be GrF or GrNF, got {mode!r}")
    obj = build_objective(ds, cost, alpha,
                          "factored" if tag == "grf" else "non_factored")
    n = ds.n_features
    budget = n if budget is None else min(budget, n)
    t0 = time.perf_counter()

    def calls():
        return obj.instance.f.call_count + obj.instance.g.call_count

    S: frozenset = frozenset()
    val = obj.value(S)
    trace = OptimizationTrace(f"greedy_{tag}", 0, 0.0)
    trace.iterates.append(TracePoint(S, val, calls(), time.perf_counter() - t0))
    while len(S) < budget:
        best_val, best_j = val, None
        for j in range(1, n + 1):
            if j in S:
                continue
            cand = obj.value(S | {j})
            if cand < best_val - 1e-12:
                best_val, best_j = cand, j
        if best_j is None:
            break
        S = S | {best_j}
        val = best_val
        trace.iterates.append(TracePoint(S, val, calls(), time.perf_counter() - t0))
    trace.termination = "converged"
    return S, trace


def naive_bayes_cv(ds: Dataset, A: Iterable[int], folds: int = 10,
                   alpha: float = 1.0, seed: int = 0) -> float:
    """Mean stratified cross-validation accuracy of a categorical naive Bayes.

    Laplace smoothing ``alpha`` on both class priors and per-feature
    likelihoods; fold assignment is stratified by class and deterministic
    in the seed.  Prediction ties go to the lower class value.
    """
    A = ds.ground.check_subset(A)
    if folds < 2:
        raise ValueError("folds must be >= 2")
    if not A:
        raise ValueError("feature set must be non-empty")
    cols = sorted(j - 1 for j in A)
    X = ds.rows[:, cols].astype(np.int64)
    _, y = np.unique(ds.labels, return_inverse=True)
    n_classes = len(ds.classes)
    arity = ds.arity[cols]
    m = ds.n_rows

    rng = np.random.default_rng(seed)
    fold_of = np.empty(m, dtype=np.int64)
    for c in range(n_classes):
        idx = np.where(y == c)[0]
        rng.shuffle(idx)
        fold_of[idx] = np.arange(len(idx)) % folds

    accuracies = []
    with np.errstate(divide="ignore"):
        for k in range(folds):
            train = fold_of != k
            test = ~train
            if not np.any(test):
                continue
            ytr, Xtr = y[train], X[train]
            n_train = len(ytr)
            class_counts = np.bincount(ytr, minlength=n_classes).astype(float)
            log_prior = np.log((class_counts + alpha) / (n_train + alpha * n_classes))
            scores = np.tile(log_prior, (int(test.sum()), 1))
            Xte = X[test]
            for col in range(len(cols)):
                a = int(arity[col])
                counts = np.zeros((n_classes, a))
                np.add.at(counts, (ytr, Xtr[:, col]), 1.0)
                loglik = np.log((counts + alpha) /
                                (class_counts[:, None] + alpha * a))
                loglik[np.isnan(loglik)] = 0.0  # empty class with alpha 0
                scores += loglik[:, Xte[:, col]].T
            pred = np.argmax(scores, axis=1)
            accuracies.append(float(np.mean(pred == y[test])))
    return float(np.mean(accuracies))
