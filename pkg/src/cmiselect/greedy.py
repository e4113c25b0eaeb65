"""Forward-greedy baselines on precomputed relevance, redundancy and CMI matrices.

* MaxRel ranks features by relevance ``I(X_j;Y)`` alone.
* MRMR adds the feature maximizing relevance minus mean redundancy to the
  already selected set (difference form).
* JMI adds the feature maximizing ``sum_{i in S} I(X_i,X_j;Y)``, with each
  joint term expanded by the chain rule as ``I(X_i;Y) + I(X_j;Y|X_i)``.

Every argmax breaks ties toward the lowest index.
"""

from __future__ import annotations

from time import perf_counter

import numpy as np

from ._validation import check_k, top_k_indices
from .qmatrix import as_matrix, objective, symmetrize
from .solvers import SolverReport, Support


def _argmax_unselected(scores: np.ndarray, selected: np.ndarray) -> int:
    s = np.where(selected, -np.inf, scores)
    return int(np.argmax(s))


def select_maxrel(q, k: int) -> Support:
    a = as_matrix(q)
    k = check_k(k, a.shape[0])
    return Support.from_indices(top_k_indices(np.diag(a), k))


def select_mrmr(q, r, k: int) -> Support:
    """Relevance ``q[j, j]`` minus mean redundancy ``r[i, j]`` over the selected ``i``."""
    a, red = as_matrix(q), as_matrix(r)
    n = a.shape[0]
    if red.shape != a.shape:
        raise ValueError("relevance and redundancy matrices differ in shape")
    k = check_k(k, n)
    relevance = np.diag(a)
    selected = np.zeros(n, dtype=bool)
    redundancy = np.zeros(n)
    for step in range(k):
        score = relevance if step == 0 else relevance - redundancy / step
        j = _argmax_unselected(score, selected)
        selected[j] = True
        redundancy += red[j]
    return Support.from_indices(np.flatnonzero(selected))


def select_jmi(q_raw, k: int) -> Support:
    """Greedy joint-MI selection on the raw (unsymmetrized) matrix.

    ``q_raw[i, j]`` must be ``I(X_j;Y|X_i)`` so that row ``i`` of the raw
    matrix holds the gain of every candidate given feature ``i``.
    """
    a = as_matrix(q_raw)
    n = a.shape[0]
    k = check_k(k, n)
    relevance = np.diag(a)
    selected = np.zeros(n, dtype=bool)
    score = np.zeros(n)
    for step in range(k):
        j = _argmax_unselected(relevance if step == 0 else score, selected)
        selected[j] = True
        score += relevance[j] + a[j]
    return Support.from_indices(np.flatnonzero(selected))


GREEDY = ("maxrel", "mrmr", "jmi")


def run_greedy(method: str, q_raw, k: int, r=None) -> SolverReport:
    """Run a greedy selector and report the objective on the symmetrized ``Q``."""
    t0 = perf_counter()
    if method == "maxrel":
        support = select_maxrel(q_raw, k)
    elif method == "mrmr":
        if r is None:
            raise ValueError("mrmr needs a redundancy matrix")
        support = select_mrmr(q_raw, r, k)
    elif method == "jmi":
        support = select_jmi(q_raw, k)
    else:
        raise ValueError(f"unknown greedy method {method!r}; choose from {list(GREEDY)}")
    return SolverReport(
        solver=method,
        support=support,
        objective=objective(symmetrize(q_raw), support),
        iterations=len(support),
        wall_time=perf_counter() - t0,
    )
