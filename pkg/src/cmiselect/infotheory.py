"""Plug-in (count based) estimators of entropy, mutual information and
conditional mutual information, in bits.

All estimators are computed from dense contingency tables built with
``np.bincount``. The batched helpers (``_entropy_last``, ``_mi_tables``,
``_cmi_tables``) are shared between the scalar API and the matrix builders
in :mod:`cmiselect.qmatrix`, so a matrix entry and the corresponding scalar
call go through identical arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._validation import check_codes

CLAMP_TOL = 1e-12
MAX_TABLE_CELLS = 10**6


@dataclass(frozen=True)
class ContingencyTable:
    """Dense joint count table over a few discrete variables."""

    counts: np.ndarray
    arities: tuple[int, ...]

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @classmethod
    def from_codes(cls, *columns, arities: Sequence[int] | None = None) -> "ContingencyTable":
        cols = [check_codes(c) for c in columns]
        if not cols:
            raise ValueError("need at least one column")
        m = cols[0].shape[0]
        if any(c.shape[0] != m for c in cols):
            raise ValueError("length mismatch between code columns")
        arities = _resolve_arities(cols, arities)
        cells = int(np.prod(arities, dtype=np.int64))
        if cells > MAX_TABLE_CELLS:
            raise ValueError(f"contingency table of {cells} cells exceeds {MAX_TABLE_CELLS}")
        flat = np.ravel_multi_index(cols, arities) if m else np.zeros(0, dtype=np.int64)
        counts = np.bincount(flat, minlength=cells).reshape(arities)
        return cls(counts, tuple(arities))


def _resolve_arities(cols, arities):
    if arities is None:
        return tuple(int(c.max()) + 1 if c.size else 1 for c in cols)
    arities = tuple(int(a) for a in arities)
    if len(arities) != len(cols):
        raise ValueError(f"expected {len(cols)} arities, got {len(arities)}")
    for c, a in zip(cols, arities):
        if c.size and c.max() >= a:
            raise ValueError(f"code {int(c.max())} outside arity {a}")
    return arities


def _clamp(v):
    """Zero out float noise in ``[-CLAMP_TOL, 0)``."""
    v = np.asarray(v, dtype=float)
    return np.where((v < 0) & (v >= -CLAMP_TOL), 0.0, v)


def _entropy_last(counts: np.ndarray) -> np.ndarray:
    """Entropy in bits of each distribution along the last axis."""
    counts = np.asarray(counts, dtype=float)
    total = counts.sum(axis=-1)
    safe = np.where(total > 0, total, 1.0)
    p = counts / safe[..., None]
    logp = np.zeros_like(p)
    np.log2(p, out=logp, where=p > 0)
    return _ordered_sum(-(p * logp))


def _ordered_sum(terms: np.ndarray) -> np.ndarray:
    """Sum nonnegative terms along the last axis, largest first, left to right.

    The result does not depend on the order of the terms or on zero padding,
    which keeps I(X;Y) == I(Y;X) bit for bit and lets batched and scalar
    calls agree exactly.
    """
    if terms.shape[-1] == 0:
        return np.zeros(terms.shape[:-1])
    ordered = np.sort(terms, axis=-1)[..., ::-1]
    return np.cumsum(ordered, axis=-1)[..., -1]


def _swap_last(t: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(np.swapaxes(t, -1, -2))


def _mi_tables(t: np.ndarray) -> np.ndarray:
    """I(A;B) for tables of shape (..., a, b); zero-count tables give 0."""
    t = np.ascontiguousarray(t, dtype=float)
    a, b = t.shape[-2:]
    h_a = _entropy_last(t.sum(axis=-1))
    h_b = _entropy_last(_swap_last(t).sum(axis=-1))
    h_ab = _entropy_last(t.reshape(*t.shape[:-2], a * b))
    return h_a + h_b - h_ab


def _cmi_tables(t: np.ndarray) -> np.ndarray:
    """I(B;C|A) for tables of shape (..., a, b, c) as the slice-weighted MI."""
    t = np.ascontiguousarray(t, dtype=float)
    a, b, c = t.shape[-3:]
    lead = t.shape[:-3]
    slice_counts = t.reshape(*lead, a, b * c).sum(axis=-1)
    total = slice_counts.sum(axis=-1)
    weights = slice_counts / np.where(total > 0, total, 1.0)[..., None]
    per_slice = _clamp(_mi_tables(t))
    return _clamp(_ordered_sum(weights * per_slice))


def entropy(counts) -> float:
    """Entropy in bits of a vector of nonnegative counts (``0 log 0 = 0``)."""
    c = np.asarray(counts, dtype=float)
    if c.ndim != 1 or np.any(c < 0):
        raise ValueError("counts must be a 1-D vector of nonnegative values")
    if c.sum() <= 0:
        raise ValueError("counts sum to zero")
    return float(_entropy_last(c))


def entropy_of_codes(x, arity: int | None = None) -> float:
    table = ContingencyTable.from_codes(x, arities=None if arity is None else (arity,))
    return entropy(table.counts)


def mutual_information(x, y, arities: Sequence[int] | None = None) -> float:
    """Plug-in I(X;Y) = H(X) + H(Y) - H(X,Y) in bits."""
    table = ContingencyTable.from_codes(x, y, arities=arities)
    return float(_clamp(_mi_tables(table.counts)))


def conditional_mutual_information(xj, y, xi, arities: Sequence[int] | None = None) -> float:
    """Plug-in I(Xj;Y|Xi) in bits.

    ``arities`` follows the argument order ``(xj, y, xi)``.
    """
    xj, y, xi = (check_codes(v) for v in (xj, y, xi))
    if not (xj.shape == y.shape == xi.shape):
        raise ValueError("length mismatch between code columns")
    aj, c, ai = _resolve_arities([xj, y, xi], arities)
    table = ContingencyTable.from_codes(xi, xj, y, arities=(ai, aj, c))
    return float(_cmi_tables(table.counts))


def subset_mutual_information(columns, y, arities: Sequence[int] | None = None,
                              max_cells: int = MAX_TABLE_CELLS) -> float:
    """I(X_S;Y) with the columns of ``X_S`` merged into one joint variable.

    ``arities`` lists the column arities followed by the class count.
    """
    cols = [check_codes(c) for c in columns]
    if not cols:
        raise ValueError("need at least one column")
    y = check_codes(y)
    all_arities = _resolve_arities([*cols, y], arities)
    cells = int(np.prod(all_arities, dtype=np.int64))
    if cells > max_cells:
        raise ValueError(f"joint table of {cells} cells exceeds bound {max_cells}")
    joint = np.ravel_multi_index(cols, all_arities[:-1])
    joint_arity = int(np.prod(all_arities[:-1]))
    return mutual_information(joint, y, arities=(joint_arity, all_arities[-1]))


# batched helpers used by the matrix builders


def _batched_counts(first, columns, second, a_first, a_col, a_second) -> np.ndarray:
    """Tables of shape (B, a_first, a_col, a_second) for every column of ``columns``."""
    m, B = columns.shape
    cell = a_first * a_col * a_second
    key = (first * a_col)[:, None] + columns
    key = key * a_second + second[:, None]
    key = key + (np.arange(B) * cell)[None, :]
    counts = np.bincount(key.ravel(), minlength=B * cell)
    return counts.reshape(B, a_first, a_col, a_second)


def cmi_given(xi, columns, y, ai: int, a: int, c: int) -> np.ndarray:
    """I(X_j;Y|X_i) for every column X_j of ``columns`` (all of arity ``a``)."""
    t = _batched_counts(xi, columns, y, ai, a, c)
    return _cmi_tables(t)


def mi_columns(columns, y, a: int, c: int) -> np.ndarray:
    """I(X_j;Y) for every column of ``columns`` (all of arity ``a``)."""
    m, B = columns.shape
    t = _batched_counts(np.zeros(m, dtype=np.int64), columns, y, 1, a, c)
    return _clamp(_mi_tables(t[:, 0]))
