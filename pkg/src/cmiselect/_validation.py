"""Input validation helpers shared across modules."""

from __future__ import annotations

import numbers

import numpy as np


def check_k(k, n: int, *, minimum: int = 1) -> int:
    """Return ``k`` as an int, raising ValueError if outside ``[minimum, n]``."""
    if isinstance(k, bool) or not isinstance(k, numbers.Integral):
        raise TypeError(f"k must be an integer, got {type(k).__name__}")
    k = int(k)
    if k < minimum or k > n:
        raise ValueError(f"k={k} out of range [{minimum}, {n}]")
    return k


def check_square(q, *, name: str = "q") -> np.ndarray:
    a = np.asarray(q, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {a.shape}")
    if a.shape[0] == 0:
        raise ValueError(f"{name} is empty")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")
    return a


def check_symmetric(a: np.ndarray, *, rtol: float = 1e-12) -> None:
    scale = max(float(np.max(np.abs(a))), 1.0)
    if np.max(np.abs(a - a.T)) > rtol * scale:
        raise ValueError("matrix is not symmetric; call symmetrize() first")


def check_codes(codes, *, name: str = "codes") -> np.ndarray:
    a = np.asarray(codes)
    if a.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    if a.size and not np.issubdtype(a.dtype, np.integer):
        if not np.all(np.equal(np.mod(a, 1), 0)):
            raise ValueError(f"{name} must hold integer codes")
    a = a.astype(np.int64, copy=False)
    if a.size and a.min() < 0:
        raise ValueError(f"{name} must be nonnegative")
    return a


def top_k_indices(scores, k: int) -> np.ndarray:
    """Indices of the ``k`` largest scores, ties going to the lower index, sorted ascending."""
    s = np.asarray(scores, dtype=float)
    order = np.argsort(-s, kind="stable")
    return np.sort(order[:k])


def as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)
