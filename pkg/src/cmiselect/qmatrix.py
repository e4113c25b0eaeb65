"""Objective matrix ``Q`` and MRMR redundancy matrix from discretized data."""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._validation import check_square
from .infotheory import _batched_counts, _clamp, _entropy_last, _mi_tables, cmi_given, mi_columns


@dataclass(frozen=True)
class CmiMatrix:
    """``q[i, i] = I(X_i;Y)``, ``q[i, j] = I(X_j;Y|X_i)``; symmetric once symmetrized."""

    q: np.ndarray
    symmetrized: bool = False

    def __post_init__(self):
        q = check_square(self.q).copy()
        q.setflags(write=False)
        object.__setattr__(self, "q", q)

    @property
    def n(self) -> int:
        return self.q.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.q if dtype is None else self.q.astype(dtype)


@dataclass(frozen=True)
class RedundancyMatrix:
    """``r[i, j] = I(X_i;X_j)`` with ``r[i, i] = H(X_i)``."""

    r: np.ndarray

    def __post_init__(self):
        r = check_square(self.r, name="r").copy()
        r.setflags(write=False)
        object.__setattr__(self, "r", r)

    @property
    def n(self) -> int:
        return self.r.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.r if dtype is None else self.r.astype(dtype)


def as_matrix(q) -> np.ndarray:
    if isinstance(q, CmiMatrix):
        return q.q
    if isinstance(q, RedundancyMatrix):
        return q.r
    return check_square(q)


def _arity_groups(arities):
    groups: dict[int, list[int]] = {}
    for j, a in enumerate(arities):
        groups.setdefault(int(a), []).append(j)
    return [(a, np.asarray(cols)) for a, cols in sorted(groups.items())]


def _run_rows(fn, n, n_jobs):
    if n_jobs is None or n_jobs == 1:
        return [fn(i) for i in range(n)]
    with ThreadPoolExecutor(max_workers=None if n_jobs < 0 else n_jobs) as ex:
        return list(ex.map(fn, range(n)))


def build_q(data, n_jobs: int | None = 1) -> CmiMatrix:
    """Raw (unsymmetrized) relevance/CMI matrix of a :class:`DiscretizedDataset`.

    Columns are processed in groups of equal arity so each entry is computed
    on exactly the table shape a scalar
    :func:`~cmiselect.infotheory.conditional_mutual_information` call uses.
    """
    X, y, arities, c = data.codes, data.labels, data.arities, data.n_classes
    n = X.shape[1]
    groups = _arity_groups(arities)

    def row(i):
        out = np.empty(n)
        for a, cols in groups:
            out[cols] = cmi_given(X[:, i], X[:, cols], y, int(arities[i]), a, c)
        return out

    q = np.vstack(_run_rows(row, n, n_jobs))
    for a, cols in groups:
        q[cols, cols] = mi_columns(X[:, cols], y, a, c)
    return CmiMatrix(q, symmetrized=False)


def symmetrize(q) -> CmiMatrix:
    """``(Q + Q^T) / 2``; leaves ``x^T Q x`` unchanged for every ``x``."""
    a = as_matrix(q)
    return CmiMatrix((a + a.T) / 2.0, symmetrized=True)


def build_redundancy(data, n_jobs: int | None = 1) -> RedundancyMatrix:
    """Pairwise feature MI matrix used by MRMR."""
    X, arities = data.codes, data.arities
    n = X.shape[1]
    groups = _arity_groups(arities)
    m = X.shape[0]
    zeros = np.zeros(m, dtype=np.int64)

    def row(i):
        out = np.empty(n)
        ai = int(arities[i])
        for a, cols in groups:
            t = _batched_counts(zeros, X[:, cols], X[:, i], 1, a, ai)[:, 0]
            out[cols] = _clamp(_mi_tables(t))
        t = np.bincount(X[:, i], minlength=ai).astype(float)
        out[i] = float(_entropy_last(t))
        return out

    r = np.vstack(_run_rows(row, n, n_jobs))
    return RedundancyMatrix(np.maximum(r, r.T))


def objective(q, support) -> float:
    """``x^T Q x`` for the indicator ``x`` of ``support``."""
    a = as_matrix(q)
    idx = np.asarray(getattr(support, "indices", support), dtype=np.int64)
    if idx.size and (idx.min() < 0 or idx.max() >= a.shape[0]):
        raise IndexError("support index out of range")
    return float(a[np.ix_(idx, idx)].sum())


def write_q_csv(q, path) -> None:
    a = as_matrix(q)
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for row in a:
            w.writerow([format(v, ".17g") for v in row])


def read_q_csv(path) -> CmiMatrix:
    with Path(path).open(newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    try:
        a = np.array([[float(v) for v in r] for r in rows])
    except ValueError as exc:
        raise ValueError(f"non-numeric entry in {path}: {exc}") from None
    a = check_square(a)
    return CmiMatrix(a, symmetrized=bool(np.array_equal(a, a.T)))
