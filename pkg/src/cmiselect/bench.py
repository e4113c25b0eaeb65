"""Synthetic generators and the random-matrix timing and objective-gap experiments."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from time import perf_counter
from typing import Iterable, Sequence

import numpy as np

from ._validation import as_rng, check_k
from .dataset import RawDataset
from .discretize import DiscretizedDataset
from .qmatrix import CmiMatrix
from .solvers import SolverConfig, solve

DEFAULT_NS = (100, 200, 500, 1000)
DEFAULT_KS = (10, 50)
TIMING_HEADER = ("solver", "n", "k", "trial_mean_s", "trial_sd_s")
GAP_HEADER = ("solver", "n", "k", "mean_pct", "sd_pct")


def random_q(n: int, seed=None) -> CmiMatrix:
    """``(U + U^T) / 2`` with ``U`` i.i.d. uniform on [0, 1)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    u = as_rng(seed).random((n, n))
    return CmiMatrix((u + u.T) / 2.0, symmetrized=True)


def trial_seed(seed: int, n: int, trial: int) -> list[int]:
    """Seed of the shared matrix for one (cell, trial); independent of ``k`` and of the solver."""
    return [int(seed), int(n), int(trial)]


@dataclass(frozen=True)
class ExperimentGrid:
    cells: tuple[tuple[int, int], ...]
    trials: int = 10
    seed: int = 42

    def __post_init__(self):
        cells = tuple((int(n), int(k)) for n, k in self.cells)
        for n, k in cells:
            check_k(k, n)
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        object.__setattr__(self, "cells", cells)

    @classmethod
    def product(cls, ns: Iterable[int] = DEFAULT_NS, ks: Iterable[int] = DEFAULT_KS,
                trials: int = 10, seed: int = 42) -> "ExperimentGrid":
        """All ``(n, k)`` pairs with ``k <= n``."""
        ks = list(ks)
        return cls(tuple((n, k) for n in ns for k in ks if k <= n), trials, seed)


@dataclass(frozen=True)
class ExperimentRow:
    solver: str
    n: int
    k: int
    mean: float
    sd: float

    def cells(self):
        return [self.solver, self.n, self.k, format(self.mean, ".17g"), format(self.sd, ".17g")]


def _sd(values) -> float:
    return float(np.std(values, ddof=1)) if len(values) > 1 else 0.0


def _run_grid(grid: ExperimentGrid, solvers: Sequence[str], config: SolverConfig | None, measure):
    rows = []
    for n, k in grid.cells:
        samples = {s: [] for s in solvers}
        for trial in range(grid.trials):
            q = random_q(n, trial_seed(grid.seed, n, trial))
            measure(q, k, samples)
        rows.extend(
            ExperimentRow(s, n, k, float(np.mean(v)), _sd(v)) for s, v in samples.items()
        )
    return rows


def timing_experiment(grid: ExperimentGrid, solvers: Sequence[str],
                      config: SolverConfig | None = None) -> list[ExperimentRow]:
    """Mean and standard deviation of solver wall time per cell; every solver sees the same matrices."""

    def measure(q, k, samples):
        for s in samples:
            t0 = perf_counter()
            solve(s, q, k, config)
            samples[s].append(perf_counter() - t0)

    return _run_grid(grid, solvers, config, measure)


def gap_experiment(grid: ExperimentGrid, solvers: Sequence[str],
                   config: SolverConfig | None = None) -> list[ExperimentRow]:
    """Percentage gain ``100 (obj - obj_linear) / obj_linear`` per cell, on shared matrices."""

    def measure(q, k, samples):
        base = solve("linear", q, k, config).objective
        for s in samples:
            obj = solve(s, q, k, config).objective
            samples[s].append(100.0 * (obj - base) / base)

    return _run_grid(grid, solvers, config, measure)


def rows_to_csv(rows: Sequence[ExperimentRow], header: Sequence[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow(r.cells())
    return buf.getvalue()


# data for the subset MI decomposition check


def _prime_factors(c: int) -> list[int]:
    out, p = [], 2
    while p * p <= c:
        while c % p == 0:
            out.append(p)
            c //= p
        p += 1
    if c > 1:
        out.append(c)
    return out


def _sample_rows(rng, table: np.ndarray, given: np.ndarray) -> np.ndarray:
    """Draw one category per sample from ``table[given]`` (rows are distributions)."""
    cdf = np.cumsum(table[given], axis=1)
    u = rng.random(given.shape[0])[:, None]
    return np.minimum((u >= cdf).sum(axis=1), table.shape[1] - 1)


def generate_assumption1_data(n_extra: int, arity: int = 3, c: int = 4, m: int = 100_000,
                              seed=None) -> DiscretizedDataset:
    """Discrete data in which the relevance/CMI decomposition is exact in population.

    Column 0 is ``X_i``; columns ``1..n_extra`` are the extra features. The
    label is built from independent factors ``F_1..F_r`` (the prime factors of
    ``c``), each drawn from a random table ``p(F_f | X_i)``. Extra feature
    ``j`` is drawn from ``p(X_j | X_i, F_j)`` when a factor is left for it and
    from ``p(X_j | X_i)`` otherwise. The extras are then independent given
    ``X_i`` and also given ``(X_i, Y)``, which is exactly what the
    decomposition ``I(X_S;Y) = I(X_i;Y) + sum_j I(X_j;Y|X_i)`` requires.
    """
    if n_extra < 0:
        raise ValueError("n_extra must be >= 0")
    if arity < 2 or c < 2 or m < 1:
        raise ValueError("need arity >= 2, c >= 2 and m >= 1")
    rng = as_rng(seed)
    factors = _prime_factors(c)

    xi = rng.choice(arity, size=m, p=rng.dirichlet(np.ones(arity)))
    parts = [_sample_rows(rng, rng.dirichlet(np.ones(f), size=arity), xi) for f in factors]
    y = np.zeros(m, dtype=np.int64)
    for f, part in zip(factors, parts):
        y = y * f + part

    columns = [xi]
    for j in range(n_extra):
        if j < len(factors):
            f = factors[j]
            table = rng.dirichlet(np.ones(arity), size=arity * f)
            columns.append(_sample_rows(rng, table, xi * f + parts[j]))
        else:
            columns.append(_sample_rows(rng, rng.dirichlet(np.ones(arity), size=arity), xi))
    codes = np.column_stack(columns).astype(np.int64)
    return DiscretizedDataset(codes, np.full(codes.shape[1], arity), y, c)


def generate_planted_dataset(n: int, n_informative: int, m: int, seed=None,
                             n_classes: int = 2) -> RawDataset:
    """Gaussian features, ``n_informative`` of which shift their mean with the class.

    Labels are balanced over ``n_classes``. Informative columns have unit
    variance and class means spaced ``2`` apart; the rest are standard normal
    noise. Informative columns sit at random positions and are named
    ``informative_<j>``; the others ``noise_<j>``.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if m < n_classes:
        raise ValueError("m must be at least the number of classes")
    if not 0 <= n_informative <= n:
        raise ValueError("need 0 <= n_informative <= n")
    rng = as_rng(seed)
    y = rng.permutation(np.arange(m) % n_classes)
    X = rng.standard_normal((m, n))
    informative = np.sort(rng.choice(n, size=n_informative, replace=False))
    X[:, informative] += (2.0 * y - (n_classes - 1))[:, None]
    names = [f"noise_{j}" for j in range(n)]
    for j in informative:
        names[j] = f"informative_{j}"
    return RawDataset(X, y, n_classes, names)


def planted_features(dataset: RawDataset) -> np.ndarray:
    """Indices of columns named ``informative_*`` by :func:`generate_planted_dataset`."""
    names = dataset.feature_names or []
    return np.array([j for j, s in enumerate(names) if s.startswith("informative_")], dtype=np.int64)


def loglog_slope(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Least-squares slope of ``log y`` against ``log x``."""
    lx, ly = np.log(np.asarray(xs, float)), np.log(np.asarray(ys, float))
    return float(np.polyfit(lx, ly, 1)[0])

