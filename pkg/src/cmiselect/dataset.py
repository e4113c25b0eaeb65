"""Loading, validating and fold-splitting labeled tabular data."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from ._validation import as_rng

LOO_THRESHOLD = 100


class DataError(ValueError):
    """Raised when an input file or array violates the dataset contract."""


@dataclass(frozen=True)
class RawDataset:
    """Continuous feature matrix with integer class labels in ``[0, n_classes)``.

    Parameters
    ----------
    features : ndarray of shape (m, n)
    labels : ndarray of shape (m,)
    n_classes : int
        Number of classes ``c``; every class must occur at least once.
    feature_names : list of str, optional
    """

    features: np.ndarray
    labels: np.ndarray
    n_classes: int
    feature_names: list[str] | None = None

    def __post_init__(self):
        X = np.array(self.features, dtype=float)
        y = np.array(self.labels)
        if X.ndim != 2:
            raise DataError(f"features must be 2-D, got shape {X.shape}")
        m, n = X.shape
        if m < 2 or n < 1:
            raise DataError(f"need m >= 2 and n >= 1, got m={m}, n={n}")
        bad = np.argwhere(~np.isfinite(X))
        if bad.size:
            r, c = bad[0]
            raise DataError(f"non-finite value at ({r},{c})")
        if y.shape != (m,):
            raise DataError(f"labels must have shape ({m},), got {y.shape}")
        if not np.issubdtype(y.dtype, np.integer):
            if y.size and not np.all(np.mod(y, 1) == 0):
                raise DataError("labels must be integers")
        y = y.astype(np.int64)
        c = int(self.n_classes)
        if c < 2:
            raise DataError(f"need at least 2 classes, got {c}")
        if y.min() < 0 or y.max() >= c:
            raise DataError(f"labels must lie in [0, {c})")
        if np.unique(y).size != c:
            raise DataError("every class in [0, c) must appear at least once")
        if self.feature_names is not None and len(self.feature_names) != n:
            raise DataError("feature_names length does not match feature count")
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y)
        object.__setattr__(self, "n_classes", c)
        if self.feature_names is not None:
            object.__setattr__(self, "feature_names", [str(s) for s in self.feature_names])

    @property
    def m(self) -> int:
        return self.features.shape[0]

    @property
    def n(self) -> int:
        return self.features.shape[1]


def encode_labels(raw: Sequence) -> tuple[np.ndarray, list]:
    """Map arbitrary labels to ``0..c-1`` in order of first appearance."""
    mapping: dict = {}
    codes = np.empty(len(raw), dtype=np.int64)
    for i, v in enumerate(raw):
        codes[i] = mapping.setdefault(v, len(mapping))
    return codes, list(mapping)


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def _normalize_label(cell: str):
    s = cell.strip()
    try:
        return int(s)
    except ValueError:
        pass
    try:
        f = float(s)
    except ValueError:
        return s
    if math.isfinite(f) and f.is_integer():
        return int(f)
    return s


def load_csv(path, label_column: int | str = -1) -> RawDataset:
    """Read a comma-separated file into a :class:`RawDataset`.

    The first row is treated as a header when any of its feature cells is not
    numeric, or when ``label_column`` is given by name.
    ``label_column`` is a 0-based index (negative counts from the end) or a
    header name. Labels are re-encoded by first appearance.
    """
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise DataError(f"{path} is empty")

    first = [c.strip() for c in rows[0]]
    width = len(first)
    if isinstance(label_column, str):
        header = first
    else:
        lab = int(label_column)
        if not -width <= lab < width:
            raise DataError(f"label column index {lab} out of range for {width} columns")
        lab %= width
        # string labels are legitimate data, so only feature cells decide
        numeric = all(_is_number(c) for j, c in enumerate(first) if j != lab)
        header = None if numeric else first
    if header is not None:
        rows = rows[1:]
    for i, r in enumerate(rows):
        if len(r) != width:
            raise DataError(f"ragged row {i}: expected {width} cells, got {len(r)}")
    if width < 2:
        raise DataError("need at least one feature column and one label column")
    if not rows:
        raise DataError(f"{path} has no data rows")
    if isinstance(label_column, str):
        if label_column not in header:
            raise DataError(f"label column {label_column!r} not found in header")
        lab = header.index(label_column)

    feat_cols = [j for j in range(width) if j != lab]
    X = np.empty((len(rows), len(feat_cols)))
    for i, r in enumerate(rows):
        for out, j in enumerate(feat_cols):
            try:
                X[i, out] = float(r[j])
            except ValueError:
                raise DataError(f"non-numeric value {r[j]!r} at ({i},{out})") from None
            if not math.isfinite(X[i, out]):
                raise DataError(f"non-finite value at ({i},{out})")

    labels, classes = encode_labels([_normalize_label(r[lab]) for r in rows])
    if len(classes) < 2:
        raise DataError("label column has a single class")
    names = [header[j] for j in feat_cols] if header is not None else None
    return RawDataset(X, labels, len(classes), names)


def write_csv(dataset: RawDataset, path, label_name: str = "label") -> None:
    """Write features (17 significant digits) plus the encoded label as the last column."""
    names = dataset.feature_names or [f"x{j}" for j in range(dataset.n)]
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([*names, label_name])
        for row, y in zip(dataset.features, dataset.labels):
            w.writerow([*(format(v, ".17g") for v in row), int(y)])


@dataclass(frozen=True)
class FoldPlan:
    folds: list[tuple[np.ndarray, np.ndarray]] = field(repr=False)
    mode: str
    seed: int | None

    def __len__(self) -> int:
        return len(self.folds)

    def __iter__(self):
        return iter(self.folds)


def make_folds(
    dataset, requested_folds: int = 10, seed: int | None = 0, mode: str = "auto"
) -> FoldPlan:
    """Build cross-validation folds.

    ``mode="auto"`` gives leave-one-out when ``m <= 100`` and seeded
    stratified k-fold otherwise; ``"kfold"`` and ``"loo"`` force one or the
    other. Stratification shuffles each class's rows and deals them round-robin
    across folds, continuing the deal where the previous class stopped so
    that fold sizes stay balanced too.
    """
    labels = np.asarray(dataset.labels if hasattr(dataset, "labels") else dataset)
    m = labels.shape[0]
    if mode not in ("auto", "kfold", "loo"):
        raise ValueError(f"unknown fold mode {mode!r}")
    requested_folds = int(requested_folds)
    if requested_folds < 2:
        raise ValueError("requested_folds must be >= 2")
    if requested_folds > m:
        raise ValueError(f"requested_folds={requested_folds} exceeds m={m}")

    everything = np.arange(m)
    if mode == "loo" or (mode == "auto" and m <= LOO_THRESHOLD):
        folds = [(np.delete(everything, i), np.array([i])) for i in range(m)]
        return FoldPlan(folds, "leave-one-out", seed)

    rng = as_rng(seed)
    assign = np.empty(m, dtype=np.int64)
    start = 0
    for cls in np.unique(labels):
        members = np.flatnonzero(labels == cls)
        members = members[rng.permutation(members.size)]
        assign[members] = (start + np.arange(members.size)) % requested_folds
        start = (start + members.size) % requested_folds
    folds = []
    for f in range(requested_folds):
        test = np.flatnonzero(assign == f)
        train = np.flatnonzero(assign != f)
        folds.append((train, test))
    return FoldPlan(folds, "k-fold", seed)
