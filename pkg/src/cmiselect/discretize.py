"""Supervised CAIM discretization of continuous features.

CAIM scores a partition of a feature into ``r`` intervals by

    CAIM = (1/r) * sum_q max_q**2 / M_q

where ``M_q`` is the number of samples in interval ``q`` and ``max_q`` its
largest single-class count. Cut points are added greedily from the midpoints
between consecutive distinct values. While there are fewer intervals than
classes a cut is always accepted; afterwards only a strict CAIM increase is.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

MAX_CANDIDATES = 10_000
TIE_RTOL = 1e-12


@dataclass(frozen=True)
class DiscretizationScheme:
    """Sorted interior cut points per feature."""

    cuts: tuple[np.ndarray, ...]

    def __post_init__(self):
        cleaned = []
        for j, c in enumerate(self.cuts):
            c = np.asarray(c, dtype=float).reshape(-1)
            if c.size > 1 and np.any(np.diff(c) <= 0):
                raise ValueError(f"cut points of feature {j} are not strictly increasing")
            c.setflags(write=False)
            cleaned.append(c)
        object.__setattr__(self, "cuts", tuple(cleaned))

    @property
    def n_features(self) -> int:
        return len(self.cuts)

    @property
    def arities(self) -> np.ndarray:
        return np.array([c.size + 1 for c in self.cuts], dtype=np.int64)

    def to_json(self) -> str:
        return json.dumps([{"cuts": [float(v) for v in c]} for c in self.cuts]) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "DiscretizationScheme":
        data = json.loads(text)
        return cls(tuple(np.asarray(entry["cuts"], dtype=float) for entry in data))

    def save(self, path) -> None:
        Path(path).write_text(self.to_json())

    @classmethod
    def load(cls, path) -> "DiscretizationScheme":
        return cls.from_json(Path(path).read_text())


@dataclass(frozen=True)
class DiscretizedDataset:
    codes: np.ndarray
    arities: np.ndarray
    labels: np.ndarray
    n_classes: int

    def __post_init__(self):
        codes = np.asarray(self.codes, dtype=np.int64)
        arities = np.asarray(self.arities, dtype=np.int64)
        labels = np.asarray(self.labels, dtype=np.int64)
        if codes.ndim != 2 or arities.shape != (codes.shape[1],):
            raise ValueError("codes must be (m, n) with one arity per column")
        if labels.shape != (codes.shape[0],):
            raise ValueError("labels length must match codes rows")
        if codes.size and (codes.min() < 0 or np.any(codes.max(axis=0) >= arities)):
            raise ValueError("codes outside [0, arity)")
        if labels.size and (labels.min() < 0 or labels.max() >= self.n_classes):
            raise ValueError("labels outside [0, n_classes)")
        object.__setattr__(self, "codes", codes)
        object.__setattr__(self, "arities", arities)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "n_classes", int(self.n_classes))

    @property
    def m(self) -> int:
        return self.codes.shape[0]

    @property
    def n(self) -> int:
        return self.codes.shape[1]


def caim_value(values, labels, cuts, n_classes: int) -> float:
    """CAIM of the partition of ``values`` induced by ``cuts``."""
    codes = np.searchsorted(np.asarray(cuts, dtype=float), np.asarray(values, dtype=float), side="right")
    r = len(cuts) + 1
    table = np.zeros((r, n_classes))
    np.add.at(table, (codes, np.asarray(labels, dtype=np.int64)), 1)
    sizes = table.sum(axis=1)
    filled = sizes > 0
    return float((table.max(axis=1)[filled] ** 2 / sizes[filled]).sum() / r)


def _thin(prefix_sizes: np.ndarray, cap: int) -> np.ndarray:
    """Pick at most ``cap`` candidate boundaries spread over sample quantiles."""
    m = prefix_sizes[-1]
    targets = np.linspace(0, m, cap + 2)[1:-1]
    pos = np.searchsorted(prefix_sizes[1:-1], targets)
    return np.unique(np.clip(pos, 0, prefix_sizes.size - 3)) + 1


def caim_fit(values, labels, n_classes: int, max_candidates: int = MAX_CANDIDATES) -> np.ndarray:
    """Greedy CAIM cut points for one feature.

    Parameters
    ----------
    values : array-like of shape (m,)
    labels : array-like of int, shape (m,)
    n_classes : int
    max_candidates : int
        Columns with more distinct values are thinned to this many candidate
        boundaries, spread evenly over sample quantiles.

    Returns
    -------
    ndarray
        Sorted cut points; empty when the feature is constant.
    """
    values = np.asarray(values, dtype=float)
    labels = np.asarray(labels, dtype=np.int64)
    if values.shape != labels.shape or values.ndim != 1:
        raise ValueError("values and labels must be 1-D of equal length")
    if values.size == 0:
        return np.empty(0)

    distinct, inverse = np.unique(values, return_inverse=True)
    if distinct.size < 2:
        return np.empty(0)
    per_value = np.zeros((distinct.size, n_classes))
    np.add.at(per_value, (inverse, labels), 1)
    # prefix[b] = class counts of the first b distinct values
    prefix = np.vstack([np.zeros(n_classes), np.cumsum(per_value, axis=0)])
    # boundary b sits between distinct values b-1 and b
    candidates = np.arange(1, distinct.size)
    if candidates.size > max_candidates:
        candidates = _thin(prefix.sum(axis=1), max_candidates)

    def term(lo, hi):
        counts = prefix[hi] - prefix[lo]
        return counts.max(axis=-1) ** 2 / counts.sum(axis=-1)

    bounds = np.array([0, distinct.size])
    total = float(term(np.array([0]), np.array([distinct.size]))[0])
    current = total
    available = np.ones(candidates.size, dtype=bool)

    while available.any():
        r = bounds.size - 1
        cand = candidates[available]
        slot = np.searchsorted(bounds, cand)
        lo, hi = bounds[slot - 1], bounds[slot]
        new_total = total - term(lo, hi) + term(lo, cand) + term(cand, hi)
        scores = new_total / (r + 1)
        # scores equal up to rounding count as ties and go to the lowest cut
        top = scores.max()
        best = int(np.argmax(scores >= top - TIE_RTOL * top))
        if r >= n_classes and not scores[best] > current * (1 + TIE_RTOL):
            break
        bounds = np.sort(np.append(bounds, cand[best]))
        total = float(new_total[best])
        current = float(scores[best])
        available[np.flatnonzero(available)[best]] = False

    chosen = bounds[1:-1]
    return (distinct[chosen - 1] + distinct[chosen]) / 2.0


def fit_scheme(features, labels, n_classes: int, max_candidates: int = MAX_CANDIDATES) -> DiscretizationScheme:
    X = np.asarray(features, dtype=float)
    return DiscretizationScheme(
        tuple(caim_fit(X[:, j], labels, n_classes, max_candidates) for j in range(X.shape[1]))
    )


def apply_cuts(values, cuts) -> np.ndarray:
    """Interval codes; a value equal to a cut goes to the right-hand interval."""
    return np.searchsorted(np.asarray(cuts, dtype=float), np.asarray(values, dtype=float), side="right")


def apply_scheme(dataset, scheme: DiscretizationScheme) -> DiscretizedDataset:
    """Encode every feature of ``dataset`` with the matching cut list."""
    X = np.asarray(dataset.features, dtype=float)
    if X.shape[1] != scheme.n_features:
        raise ValueError(
            f"scheme has {scheme.n_features} features but data has {X.shape[1]}"
        )
    codes = np.column_stack([apply_cuts(X[:, j], c) for j, c in enumerate(scheme.cuts)])
    return DiscretizedDataset(codes, scheme.arities, dataset.labels, dataset.n_classes)


def discretize(dataset, max_candidates: int = MAX_CANDIDATES):
    """Fit CAIM on ``dataset`` and encode it; returns ``(scheme, discretized)``."""
    scheme = fit_scheme(dataset.features, dataset.labels, dataset.n_classes, max_candidates)
    return scheme, apply_scheme(dataset, scheme)


class CaimDiscretizer(TransformerMixin, BaseEstimator):
    """Transformer wrapper: ``fit`` learns per-feature CAIM cuts, ``transform`` emits integer codes."""

    def __init__(self, max_candidates=MAX_CANDIDATES):
        self.max_candidates = max_candidates

    def fit(self, X, y):
        X, y = check_X_y(X, y)
        self.classes_, y_enc = np.unique(y, return_inverse=True)
        self.scheme_ = fit_scheme(X, y_enc, self.classes_.size, self.max_candidates)
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "scheme_")
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        return np.column_stack([apply_cuts(X[:, j], c) for j, c in enumerate(self.scheme_.cuts)])

    @property
    def arities_(self):
        check_is_fitted(self, "scheme_")
        return self.scheme_.arities
