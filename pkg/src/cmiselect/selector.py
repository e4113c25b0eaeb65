"""End-to-end selection: discretize, build the CMI matrix, run a method."""

from __future__ import annotations

from functools import cached_property

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.feature_selection import SelectorMixin
from sklearn.utils.validation import check_is_fitted, check_X_y

from .dataset import RawDataset
from .discretize import DiscretizedDataset, discretize
from .greedy import GREEDY, run_greedy
from .qmatrix import build_q, build_redundancy, objective, symmetrize
from .solvers import SOLVERS, UNSUPPORTED, SolverConfig, SolverReport, Support, solve

METHODS = (*SOLVERS, *GREEDY)
BASELINES = ("random",)


class SelectionPipeline:
    """Lazily computed matrices for one dataset, shared across methods and ``k``.

    Parameters
    ----------
    data : RawDataset or DiscretizedDataset
        Raw data is CAIM-discretized first.
    n_jobs : int
        Worker threads for the matrix builders.
    """

    def __init__(self, data, n_jobs: int = 1):
        if isinstance(data, RawDataset):
            self.scheme, self.discrete = discretize(data)
        elif isinstance(data, DiscretizedDataset):
            self.scheme, self.discrete = None, data
        else:
            raise TypeError("expected a RawDataset or DiscretizedDataset")
        self.n_jobs = n_jobs

    @property
    def n(self) -> int:
        return self.discrete.n

    @cached_property
    def q_raw(self):
        return build_q(self.discrete, n_jobs=self.n_jobs)

    @cached_property
    def q(self):
        return symmetrize(self.q_raw)

    @cached_property
    def redundancy(self):
        return build_redundancy(self.discrete, n_jobs=self.n_jobs)

    def select(self, method: str, k: int, config: SolverConfig | None = None) -> SolverReport:
        return select_from_matrices(method, k, self.q_raw, config, lambda: self.redundancy)


def random_support(n: int, k: int, seed) -> Support:
    """Seeded uniform ``k``-subset; the seed is combined with ``k`` so each grid point differs."""
    rng = np.random.default_rng([0 if seed is None else int(seed), int(k)])
    return Support.from_indices(rng.choice(n, size=k, replace=False))


def select_from_matrices(method: str, k: int, q_raw, config: SolverConfig | None = None,
                         redundancy=None) -> SolverReport:
    """Run ``method`` on a raw CMI matrix.

    Global solvers see the symmetrized matrix; JMI uses the raw one.
    ``redundancy`` may be a matrix or a zero-argument callable producing it.
    """
    if method in UNSUPPORTED:
        raise ValueError(UNSUPPORTED[method])
    if method not in METHODS and method not in BASELINES:
        raise ValueError(f"unknown method {method!r}; choose from {[*METHODS, *BASELINES]}")
    cfg = config or SolverConfig()
    if method in GREEDY:
        r = redundancy() if callable(redundancy) else redundancy
        return run_greedy(method, q_raw, k, r if method == "mrmr" else None)
    if method == "random":
        n = np.asarray(q_raw).shape[0]
        support = random_support(n, k, cfg.seed)
        return SolverReport("random", support, objective(symmetrize(q_raw), support), 0, 0.0, cfg.seed)
    return solve(method, symmetrize(q_raw), k, cfg)


class CmiFeatureSelector(SelectorMixin, BaseEstimator):
    """Select ``k`` features by maximizing the conditional-mutual-information objective.

    Parameters
    ----------
    k : int
        Number of features to keep.
    method : str
        One of ``linear``, ``tpower``, ``spectral``, ``lowrank``, ``maxrel``,
        ``mrmr``, ``jmi``.
    max_iterations, tolerance, tpower_shift, lowrank_d, lowrank_epsilon, lowrank_delta
        Forwarded to :class:`~cmiselect.solvers.SolverConfig`.
    random_state : int
        Seed for the randomized spannogram.
    n_jobs : int
        Threads used to build the matrices.

    Attributes
    ----------
    support_ : Support
    report_ : SolverReport
    q_ : ndarray of shape (n_features, n_features)
        Raw matrix with ``q_[i, i] = I(X_i;Y)`` and ``q_[i, j] = I(X_j;Y|X_i)``.
    scheme_ : DiscretizationScheme
    """

    def __init__(self, k=10, method="tpower", max_iterations=1000, tolerance=1e-8,
                 tpower_shift="auto", lowrank_d=3, lowrank_epsilon=0.1, lowrank_delta=0.1,
                 random_state=42, n_jobs=1):
        self.k = k
        self.method = method
        self.max_iterations = max_iterations
        self.tolerance = tolerance
        self.tpower_shift = tpower_shift
        self.lowrank_d = lowrank_d
        self.lowrank_epsilon = lowrank_epsilon
        self.lowrank_delta = lowrank_delta
        self.random_state = random_state
        self.n_jobs = n_jobs

    def _config(self) -> SolverConfig:
        return SolverConfig(
            max_iterations=self.max_iterations,
            tolerance=self.tolerance,
            tpower_shift=self.tpower_shift,
            lowrank_d=self.lowrank_d,
            lowrank_epsilon=self.lowrank_epsilon,
            lowrank_delta=self.lowrank_delta,
            seed=self.random_state,
        )

    def fit(self, X, y):
        X, y = check_X_y(X, y)
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; choose from {list(METHODS)}")
        self.classes_, y_enc = np.unique(y, return_inverse=True)
        data = RawDataset(X, y_enc, self.classes_.size)
        pipe = SelectionPipeline(data, n_jobs=self.n_jobs)
        self.report_ = pipe.select(self.method, self.k, self._config())
        self.support_ = self.report_.support
        self.scheme_ = pipe.scheme
        self.q_ = np.asarray(pipe.q_raw)
        self.n_features_in_ = X.shape[1]
        return self

    def _get_support_mask(self):
        check_is_fitted(self, "support_")
        return self.support_.mask(self.n_features_in_)
