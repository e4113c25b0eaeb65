"""Downstream evaluation of feature subsets.

A multinomial logistic classifier is trained on the original (continuous)
features restricted to a support; fold errors of two methods are compared
with a one-sided paired t-test at the 5% level, and per-k verdicts are
aggregated by their mode.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.multiclass import check_classification_targets
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .dataset import FoldPlan, RawDataset

ALPHA = 0.05


class SoftmaxRegression(ClassifierMixin, BaseEstimator):
    """Multinomial logistic regression by full-batch gradient descent.

    Parameters
    ----------
    alpha : float
        L2 penalty on the weights (the intercept is not penalized).
    learning_rate : float
    max_epochs : int

    Features are standardized with training statistics; a zero standard
    deviation is treated as one. Weights start at zero, so fitting is
    deterministic.
    """

    def __init__(self, alpha=1e-3, learning_rate=0.1, max_epochs=500):
        self.alpha = alpha
        self.learning_rate = learning_rate
        self.max_epochs = max_epochs

    def fit(self, X, y):
        X, y = check_X_y(X, y)
        check_classification_targets(y)
        self.classes_, y_enc = np.unique(y, return_inverse=True)
        if self.classes_.size < 2:
            raise ValueError("training data contains a single class")
        self.n_features_in_ = X.shape[1]
        self.mean_ = X.mean(axis=0)
        std = X.std(axis=0)
        self.scale_ = np.where(std > 0, std, 1.0)
        Z = (X - self.mean_) / self.scale_

        m, c = Z.shape[0], self.classes_.size
        onehot = np.zeros((m, c))
        onehot[np.arange(m), y_enc] = 1.0
        W = np.zeros((Z.shape[1], c))
        b = np.zeros(c)
        for _ in range(self.max_epochs):
            residual = _softmax(Z @ W + b) - onehot
            W -= self.learning_rate * (Z.T @ residual / m + self.alpha * W)
            b -= self.learning_rate * residual.mean(axis=0)
        self.coef_, self.intercept_ = W, b
        return self

    def decision_function(self, X):
        check_is_fitted(self, "coef_")
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        return ((X - self.mean_) / self.scale_) @ self.coef_ + self.intercept_

    def predict_proba(self, X):
        return _softmax(self.decision_function(X))

    def predict(self, X):
        return self.classes_[np.argmax(self.decision_function(X), axis=1)]


def _softmax(z):
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def train_linear_classifier(features, labels, **params) -> SoftmaxRegression:
    return SoftmaxRegression(**params).fit(features, labels)


@dataclass(frozen=True)
class CvErrors:
    """Per-fold test error percentages for one support size ``k``."""

    errors: tuple[float, ...]
    k: int

    def __post_init__(self):
        errs = tuple(float(e) for e in self.errors)
        if any(not 0.0 <= e <= 100.0 for e in errs):
            raise ValueError("fold errors must lie in [0, 100]")
        object.__setattr__(self, "errors", errs)

    @property
    def n_folds(self) -> int:
        return len(self.errors)

    @property
    def mean(self) -> float:
        return float(np.mean(self.errors))


def fold_error(dataset: RawDataset, columns, train, test, **params) -> float:
    cols = np.asarray(columns, dtype=np.int64)
    X, y = dataset.features, dataset.labels
    model = train_linear_classifier(X[np.ix_(train, cols)], y[train], **params)
    return 100.0 * float(np.mean(model.predict(X[np.ix_(test, cols)]) != y[test]))


def cross_validate(dataset: RawDataset, support, plan: FoldPlan, **params) -> CvErrors:
    """Fold errors of the classifier restricted to ``support`` (original features)."""
    cols = np.asarray(getattr(support, "indices", support), dtype=np.int64)
    if cols.size == 0:
        raise ValueError("support must select at least one feature")
    if cols.min() < 0 or cols.max() >= dataset.n:
        raise ValueError("support index out of range")
    errs = [fold_error(dataset, cols, tr, te, **params) for tr, te in plan]
    return CvErrors(tuple(errs), int(cols.size))


# Student-t distribution via the regularized incomplete beta function


def _beta_continued_fraction(a: float, b: float, x: float) -> float:
    """Modified Lentz evaluation of the incomplete-beta continued fraction."""
    tiny, eps = 1e-300, 1e-15
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c, d = 1.0, 1.0 - qab * x / qap
    d = 1.0 / (d if abs(d) > tiny else tiny)
    h = d
    for m in range(1, 10_000):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) > tiny else tiny)
        c = 1.0 + aa / c
        c = c if abs(c) > tiny else tiny
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) > tiny else tiny)
        c = 1.0 + aa / c
        c = c if abs(c) > tiny else tiny
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            return h
    raise RuntimeError("incomplete beta continued fraction did not converge")


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """``I_x(a, b)`` for ``a, b > 0`` and ``0 <= x <= 1``."""
    if a <= 0 or b <= 0:
        raise ValueError("a and b must be positive")
    if not 0.0 <= x <= 1.0:
        raise ValueError("x must lie in [0, 1]")
    if x == 0.0 or x == 1.0:
        return x
    log_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_continued_fraction(a, b, x) / a
    return 1.0 - front * _beta_continued_fraction(b, a, 1.0 - x) / b


def student_t_cdf(t: float, df: float) -> float:
    if df <= 0:
        raise ValueError("degrees of freedom must be positive")
    if math.isinf(t):
        return 1.0 if t > 0 else 0.0
    tail = 0.5 * regularized_incomplete_beta(df / 2.0, 0.5, df / (df + t * t))
    return 1.0 - tail if t > 0 else tail


def student_t_ppf(p: float, df: float) -> float:
    """Inverse CDF by bisection on :func:`student_t_cdf`."""
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie in (0, 1)")
    if p == 0.5:
        return 0.0
    if p < 0.5:
        return -student_t_ppf(1.0 - p, df)
    lo, hi = 0.0, 1.0
    while student_t_cdf(hi, df) < p:
        lo, hi = hi, 2.0 * hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if student_t_cdf(mid, df) < p:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-14 * hi:
            break
    return 0.5 * (lo + hi)


def t_critical(df: float, alpha: float = ALPHA) -> float:
    """One-sided critical value ``t`` with ``P(T > t) = alpha``."""
    return student_t_ppf(1.0 - alpha, df)


@dataclass(frozen=True)
class Wtl:
    """Verdict of method A against method B (lower error is better)."""

    verdict: str
    t_statistic: float
    threshold: float
    alpha: float = ALPHA

    @property
    def code(self) -> str:
        return self.verdict[0]


def paired_t_test(a, b, alpha: float = ALPHA) -> Wtl:
    """One-sided paired t-test on fold errors ``a`` and ``b``.

    ``win`` means A has significantly lower error than B. When all
    differences are equal the test is decided by their sign alone.
    """
    ea = np.asarray(getattr(a, "errors", a), dtype=float)
    eb = np.asarray(getattr(b, "errors", b), dtype=float)
    if ea.shape != eb.shape or ea.ndim != 1:
        raise ValueError("fold error vectors must have equal length")
    f = ea.size
    if f < 2:
        raise ValueError("need at least 2 folds")
    d = ea - eb
    crit = t_critical(f - 1, alpha)
    mean = float(d.mean())
    sd = float(d.std(ddof=1))
    # sd can underflow to zero on subnormal differences; decide by sign as for constant ones
    if np.all(d == d[0]) or sd == 0.0:
        if mean == 0.0:
            return Wtl("tie", 0.0, crit, alpha)
        return Wtl("win" if mean < 0 else "loss", math.copysign(math.inf, mean), crit, alpha)
    t = mean / (sd / math.sqrt(f))
    if t < -crit:
        verdict = "win"
    elif t > crit:
        verdict = "loss"
    else:
        verdict = "tie"
    return Wtl(verdict, t, crit, alpha)


def aggregate_verdicts(verdicts: Sequence) -> str:
    """Modal verdict; a tie for the most frequent verdict resolves to ``tie``."""
    names = [getattr(v, "verdict", v) for v in verdicts]
    if not names:
        raise ValueError("no verdicts to aggregate")
    counts = Counter(names)
    top = max(counts.values())
    modes = [v for v, c in counts.items() if c == top]
    return modes[0] if len(modes) == 1 else "tie"


@dataclass(frozen=True)
class GridVerdict:
    verdict: str
    per_k: dict


def compare_over_k(errors_a: Mapping[int, CvErrors], errors_b: Mapping[int, CvErrors],
                   alpha: float = ALPHA) -> GridVerdict:
    per_k = {k: paired_t_test(errors_a[k], errors_b[k], alpha) for k in errors_a}
    return GridVerdict(aggregate_verdicts(list(per_k.values())), per_k)


def wtl_over_k_grid(dataset: RawDataset, method_a: Callable[[int], object],
                    method_b: Callable[[int], object], k_values: Sequence[int],
                    plan: FoldPlan, alpha: float = ALPHA) -> GridVerdict:
    """Compare two selectors (``k -> support``) over a grid of ``k``."""
    ea = {k: cross_validate(dataset, method_a(k), plan) for k in k_values}
    eb = {k: cross_validate(dataset, method_b(k), plan) for k in k_values}
    return compare_over_k(ea, eb, alpha)


def default_k_grid(n: int) -> list[int]:
    """``10..min(n, 100)``; ``1..n`` when there are fewer than 10 features."""
    if n < 10:
        return list(range(1, n + 1))
    return list(range(10, min(n, 100) + 1))


# Multi-method evaluation


@dataclass
class MethodResult:
    method: str
    errors: dict  # k -> CvErrors
    wtl_vs: dict  # other method -> GridVerdict

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "k_values": sorted(self.errors),
            "per_k": [
                {"k": k, "mean_error": e.mean, "fold_errors": list(e.errors)}
                for k, e in sorted(self.errors.items())
            ],
            "wtl_vs": {other: g.verdict[0] for other, g in sorted(self.wtl_vs.items())},
        }


def _train_subset(dataset: RawDataset, rows: np.ndarray) -> RawDataset:
    classes, y = np.unique(dataset.labels[rows], return_inverse=True)
    return RawDataset(dataset.features[rows], y, classes.size)


def evaluate_methods(dataset: RawDataset, methods: Sequence[str], k_values: Sequence[int],
                     plan: FoldPlan, config=None, scope: str = "global",
                     n_jobs: int = 1) -> list[MethodResult]:
    """Cross-validate every method over ``k_values`` and compare all pairs.

    ``scope="global"`` discretizes and selects once on the full data;
    ``scope="fold"`` repeats discretization and selection on each training
    split so the held-out rows never influence the chosen features.
    """
    from .selector import SelectionPipeline

    if scope not in ("global", "fold"):
        raise ValueError(f"unknown scope {scope!r}")
    k_values = list(k_values)
    if not k_values:
        raise ValueError("k_values is empty")
    for k in k_values:
        if not 1 <= k <= dataset.n:
            raise ValueError(f"k={k} out of range [1, {dataset.n}]")

    errors = {m: {} for m in methods}
    if scope == "global":
        pipe = SelectionPipeline(dataset, n_jobs=n_jobs)
        for m in methods:
            for k in k_values:
                support = pipe.select(m, k, config).support
                errors[m][k] = cross_validate(dataset, support, plan)
    else:
        per_fold = {m: {k: [] for k in k_values} for m in methods}
        for train, test in plan:
            pipe = SelectionPipeline(_train_subset(dataset, train), n_jobs=n_jobs)
            for m in methods:
                for k in k_values:
                    support = pipe.select(m, k, config).support
                    per_fold[m][k].append(fold_error(dataset, support.array, train, test))
        errors = {m: {k: CvErrors(tuple(v), k) for k, v in d.items()} for m, d in per_fold.items()}

    results = []
    for m in methods:
        wtl = {o: compare_over_k(errors[m], errors[o]) for o in methods if o != m}
        results.append(MethodResult(m, errors[m], wtl))
    return results
