"""Approximate maximizers of ``x^T Q x`` over binary ``x`` with exactly ``k`` ones.

Global methods:

* ``linear``   -- the ``k`` largest row sums of ``Q`` (LP relaxation optimum).
* ``tpower``   -- truncated power iteration started from the linear support.
* ``spectral`` -- top-``k`` entries of the dominant eigenvector.
* ``lowrank``  -- randomized spannogram over a rank-``d`` approximation of ``Q``.

``brute_force`` enumerates every support and serves as the exact oracle on
small instances. All ties are broken toward the lowest index so every
solver is deterministic given its inputs and seed.
"""

from __future__ import annotations

import itertools
import json
import math
import warnings
from dataclasses import dataclass, field
from time import perf_counter
from typing import NamedTuple

import numpy as np

from ._validation import check_k, check_symmetric, top_k_indices
from .qmatrix import as_matrix, objective

MAX_SPANNOGRAM_SAMPLES = 10**6
MAX_BRUTE_FORCE = 10**7
ASCENT_SLACK = 1e-12
NEAR_TIE = 1e-9


@dataclass(frozen=True)
class Support:
    """Strictly increasing feature indices; the nonzero pattern of the binary ``x``."""

    indices: tuple[int, ...]

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if any(i < 0 for i in idx):
            raise ValueError("support indices must be nonnegative")
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise ValueError("support indices must be strictly increasing")
        object.__setattr__(self, "indices", idx)

    @classmethod
    def from_indices(cls, indices, n: int | None = None) -> "Support":
        idx = np.asarray(indices, dtype=np.int64).reshape(-1)
        if np.unique(idx).size != idx.size:
            raise ValueError("duplicate indices in support")
        if n is not None and idx.size and idx.max() >= n:
            raise ValueError(f"support index {int(idx.max())} out of range for n={n}")
        return cls(tuple(np.sort(idx).tolist()))

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.indices, dtype=np.int64)

    def mask(self, n: int) -> np.ndarray:
        x = np.zeros(n, dtype=bool)
        x[list(self.indices)] = True
        return x

    def __len__(self):
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def __contains__(self, i):
        return i in self.indices


@dataclass(frozen=True)
class SolverConfig:
    """Solver settings.

    ``tpower_shift`` selects the diagonal shift used by the truncated power
    method: ``"auto"`` starts unshifted and doubles the shift (up to the
    Gershgorin bound) whenever a step would decrease the Rayleigh quotient;
    ``"gershgorin"`` uses the bound throughout; a number fixes the shift
    (monotone ascent is only guaranteed when ``Q + shift*I`` is positive
    semidefinite).
    """

    max_iterations: int = 1000
    tolerance: float = 1e-8
    tpower_shift: str | float = "auto"
    lowrank_d: int = 3
    lowrank_epsilon: float = 0.1
    lowrank_delta: float = 0.1
    seed: int | None = 42

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if isinstance(self.tpower_shift, str):
            if self.tpower_shift not in ("auto", "gershgorin"):
                raise ValueError(f"unknown tpower_shift {self.tpower_shift!r}")
        elif not self.tpower_shift >= 0:
            raise ValueError("explicit tpower_shift must be >= 0")
        if self.lowrank_d < 1:
            raise ValueError("lowrank_d must be >= 1")
        if not 0 < self.lowrank_epsilon < 1:
            raise ValueError("lowrank_epsilon must lie in (0, 1)")
        if not 0 < self.lowrank_delta < 1:
            raise ValueError("lowrank_delta must lie in (0, 1)")


@dataclass
class SolverReport:
    solver: str
    support: Support
    objective: float
    iterations: int
    wall_time: float = field(default=0.0, compare=False)
    seed: int | None = None
    details: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def k(self) -> int:
        return len(self.support)

    def to_dict(self, timing: bool = True) -> dict:
        d = {
            "solver": self.solver,
            "k": self.k,
            "support": list(self.support.indices),
            "objective": self.objective,
            "iterations": int(self.iterations),
            "seed": self.seed,
        }
        if timing:
            d["wall_time_s"] = self.wall_time
        return d

    def to_json(self, timing: bool = True) -> str:
        return json.dumps(self.to_dict(timing), sort_keys=True) + "\n"


class SpectralConvergenceError(RuntimeError):
    """Power iteration did not converge; ``last_iterate`` holds the final vector."""

    def __init__(self, message, last_iterate, iterations):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.iterations = iterations


class Eigenpairs(NamedTuple):
    values: np.ndarray
    vectors: np.ndarray
    shift: float
    iterations: list
    converged: list


@dataclass(frozen=True)
class Lp2Bound:
    """Quantities behind the linear-relaxation bound ``2 q(x*) <= q(x_bar)``.

    ``q(x) = x^T Q x - ||Q||_1`` where ``||Q||_1`` is the sum of all entries.
    """

    total: float
    optimum: float
    linear: float
    lp2_value: float
    tolerance: float = 1e-9

    @property
    def slack(self) -> float:
        return (self.linear - self.total) - 2.0 * (self.optimum - self.total)

    @property
    def bound_holds(self) -> bool:
        return self.slack >= -self.tolerance * max(1.0, abs(self.total))

    @property
    def relaxation_holds(self) -> bool:
        return self.lp2_value >= self.optimum - self.tolerance * max(1.0, abs(self.optimum))


def _symmetric(q) -> np.ndarray:
    a = as_matrix(q)
    check_symmetric(a)
    return a


def _report(name, a, idx, iterations, t0, seed=None, **details) -> SolverReport:
    support = Support.from_indices(idx, a.shape[0])
    return SolverReport(
        solver=name,
        support=support,
        objective=objective(a, support),
        iterations=int(iterations),
        wall_time=perf_counter() - t0,
        seed=seed,
        details=details,
    )


def _top_k_rows(scores: np.ndarray, k: int) -> np.ndarray:
    """Row-wise top-``k`` column indices (ties to the lower index), sorted."""
    order = np.argsort(-scores, axis=1, kind="stable")[:, :k]
    return np.sort(order, axis=1)


def _batch_objectives(a: np.ndarray, supports: np.ndarray) -> np.ndarray:
    B, k = supports.shape
    out = np.empty(B)
    chunk = max(1, 4_000_000 // max(1, k * k))
    for s in range(0, B, chunk):
        idx = supports[s:s + chunk]
        out[s:s + chunk] = a[idx[:, :, None], idx[:, None, :]].sum(axis=(1, 2))
    return out


def _pick_best(a: np.ndarray, supports: np.ndarray) -> tuple[int, float]:
    """Index of the best candidate support; ties go to the earliest candidate.

    Candidates are screened in batch, then everything within a relative
    ``NEAR_TIE`` of the maximum is re-scored with :func:`objective` so the
    winner is decided on the same arithmetic the reports use.
    """
    vals = _batch_objectives(a, supports)
    top = vals.max()
    near = np.flatnonzero(vals >= top - NEAR_TIE * abs(top))
    exact = [objective(a, supports[i]) for i in near]
    j = int(np.argmax(exact))
    return int(near[j]), float(exact[j])


def psd_shift(q) -> float:
    """Gershgorin bound ``max_i sum_j |q_ij|``; ``Q + shift*I`` is positive semidefinite."""
    a = as_matrix(q)
    return float(np.abs(a).sum(axis=1).max())


def _truncate(v: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    v = np.asarray(v, dtype=float)
    if not np.any(v):
        raise ValueError("cannot truncate-normalize the zero vector")
    keep = top_k_indices(np.abs(v), k)
    z = np.zeros_like(v)
    z[keep] = v[keep]
    norm = np.linalg.norm(z)
    if norm == 0:
        raise ValueError("truncated vector is zero")
    return z / norm, keep


def truncate_normalize(v, k: int) -> np.ndarray:
    """Keep the ``k`` largest-magnitude entries of ``v``, zero the rest, scale to unit norm."""
    v = np.asarray(v, dtype=float)
    k = check_k(k, v.size)
    return _truncate(v, k)[0]


def solve_linear(q, k: int, config: SolverConfig | None = None) -> SolverReport:
    t0 = perf_counter()
    a = _symmetric(q)
    k = check_k(k, a.shape[0])
    idx = top_k_indices(a.sum(axis=1), k)
    return _report("linear", a, idx, 1, t0)


def solve_tpower(q, k: int, config: SolverConfig | None = None) -> SolverReport:
    """Truncated power method from the linear support.

    Iterates ``x <- truncate_normalize((Q + s I) x, k)``. For a unit vector
    ``x^T (Q + sI) x = x^T Q x + s``, so the shift never changes which sparse
    vector is optimal; it only damps the step. The Rayleigh quotient is kept
    nondecreasing, and the reported support is the best binary support seen
    along the path (the linear start included).
    """
    cfg = config or SolverConfig()
    t0 = perf_counter()
    a = _symmetric(q)
    n = a.shape[0]
    k = check_k(k, n)
    start = top_k_indices(a.sum(axis=1), k)
    if k == n:
        return _report("tpower", a, start, 1, t0, shift=0.0, rayleigh_trace=[])

    cap = max(psd_shift(a), cfg.tolerance)
    adaptive = cfg.tpower_shift == "auto"
    if adaptive:
        shift = 0.0
    elif cfg.tpower_shift == "gershgorin":
        shift = cap
    else:
        shift = float(cfg.tpower_shift)

    x = np.zeros(n)
    x[start] = 1.0 / math.sqrt(k)
    support = start
    rq = float(x @ a @ x)
    best, best_obj = start, objective(a, start)
    trace = [rq]
    iterations = 0
    for iterations in range(1, cfg.max_iterations + 1):
        while True:
            z, new_support = _truncate(a @ x + shift * x, k)
            new_rq = float(z @ a @ z)
            if not adaptive or shift >= cap or new_rq >= rq - ASCENT_SLACK * abs(rq):
                break
            shift = min(cap, max(2.0 * shift, cap / 1024.0))
        new_obj = objective(a, new_support)
        if new_obj > best_obj:
            best, best_obj = new_support, new_obj
        stable = np.array_equal(new_support, support)
        change = abs(new_rq - rq)
        x, support, rq = z, new_support, new_rq
        trace.append(rq)
        if stable and change <= cfg.tolerance * abs(rq):
            break
    return _report("tpower", a, best, iterations, t0, shift=shift, rayleigh_trace=trace)


def dominant_eigenvector(q, config: SolverConfig | None = None) -> tuple[np.ndarray, int]:
    """Power iteration on ``Q + shift*I`` from the normalized all-ones vector.

    Returns the unit eigenvector (oriented to a nonnegative sum) and the
    iteration count. Raises :class:`SpectralConvergenceError` when successive
    iterates still differ by more than the tolerance after the iteration cap.
    """
    cfg = config or SolverConfig()
    a = _symmetric(q)
    n = a.shape[0]
    shift = max(psd_shift(a), cfg.tolerance)
    v = np.full(n, 1.0 / math.sqrt(n))
    for it in range(1, cfg.max_iterations + 1):
        w = a @ v + shift * v
        w /= np.linalg.norm(w)
        if w.sum() < 0:
            w = -w
        done = np.linalg.norm(w - v) <= cfg.tolerance
        v = w
        if done:
            return v, it
    raise SpectralConvergenceError(
        f"power iteration did not converge in {cfg.max_iterations} iterations", v, cfg.max_iterations
    )


def solve_spectral(q, k: int, config: SolverConfig | None = None) -> SolverReport:
    t0 = perf_counter()
    a = _symmetric(q)
    if np.any(a < 0):
        raise ValueError("spectral relaxation expects a nonnegative matrix")
    k = check_k(k, a.shape[0])
    weights, iterations = dominant_eigenvector(a, config)
    return _report("spectral", a, top_k_indices(weights, k), iterations, t0, weights=weights)


def _start_vector(n: int, basis: np.ndarray | None) -> np.ndarray:
    trials = itertools.chain([np.ones(n)], (np.eye(1, n, j)[0] for j in range(n)))
    for v in trials:
        if basis is not None:
            v = v - basis @ (basis.T @ v)
        norm = np.linalg.norm(v)
        if norm > 1e-8:
            return v / norm
    raise RuntimeError("no start vector orthogonal to the found eigenvectors")


def top_d_eigen(q, d: int, config: SolverConfig | None = None) -> Eigenpairs:
    """Leading ``d`` eigenpairs of ``Q + shift*I`` by power iteration with deflation.

    After each pair is found the matrix is deflated (``A <- A - lam v v^T``)
    and later iterates are re-orthogonalized against earlier vectors. A pair
    that has not converged at the iteration cap is kept as is and flagged in
    ``converged``; near-degenerate eigenvalues can make that unavoidable.
    """
    cfg = config or SolverConfig()
    a = _symmetric(q)
    n = a.shape[0]
    if not 1 <= d <= n:
        raise ValueError(f"d={d} out of range [1, {n}]")
    shift = max(psd_shift(a), cfg.tolerance)
    A = a + shift * np.eye(n)
    values, vectors, iterations, converged = [], [], [], []
    basis = None
    for _ in range(d):
        v = _start_vector(n, basis)
        ok = False
        it = 0
        for it in range(1, cfg.max_iterations + 1):
            w = A @ v
            if basis is not None:
                w -= basis @ (basis.T @ w)
            norm = np.linalg.norm(w)
            if norm <= 1e-300:
                ok = True
                break
            w /= norm
            diff = np.linalg.norm(w - v)
            v = w
            if diff <= cfg.tolerance:
                ok = True
                break
        lam = float(v @ A @ v)
        A -= lam * np.outer(v, v)
        values.append(lam)
        vectors.append(v)
        iterations.append(it)
        converged.append(ok)
        basis = np.column_stack(vectors)
    return Eigenpairs(np.array(values), basis, shift, iterations, converged)


def spannogram_sample_count(d: int, epsilon: float, delta: float) -> int:
    """``ceil((4/eps)^(d-1) * ln(1/delta))`` sphere samples for the randomized net."""
    return math.ceil((4.0 / epsilon) ** (d - 1) * math.log(1.0 / delta))


def _unique_rows(rows: np.ndarray) -> np.ndarray:
    _, first = np.unique(rows, axis=0, return_index=True)
    return rows[np.sort(first)]


def solve_lowrank(q, k: int, config: SolverConfig | None = None) -> SolverReport:
    """Bilinear low-rank approximation with a randomized spannogram.

    Each sampled direction ``c`` on the unit sphere in ``R^d`` yields a
    candidate ``y`` (top-``k`` of ``V diag(lam) c``) and its best response
    ``x`` (top-``k`` of ``A_d y``). Every candidate, plus the linear support,
    is scored on the true ``Q``.
    """
    cfg = config or SolverConfig()
    t0 = perf_counter()
    a = _symmetric(q)
    n = a.shape[0]
    k = check_k(k, n)
    d = cfg.lowrank_d
    if d > n:
        raise ValueError(f"lowrank_d={d} exceeds n={n}")
    samples = spannogram_sample_count(d, cfg.lowrank_epsilon, cfg.lowrank_delta)
    if samples > MAX_SPANNOGRAM_SAMPLES:
        warnings.warn(
            f"spannogram sample count {samples} capped at {MAX_SPANNOGRAM_SAMPLES}", RuntimeWarning
        )
        samples = MAX_SPANNOGRAM_SAMPLES

    eig = top_d_eigen(a, d, cfg)
    weighted = eig.vectors * eig.values
    rng = np.random.default_rng(cfg.seed)
    directions = rng.standard_normal((samples, d))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)

    chunk = max(1, 2_000_000 // n)
    ys = [
        _top_k_rows((weighted @ directions[s:s + chunk].T).T, k)
        for s in range(0, samples, chunk)
    ]
    ys = _unique_rows(np.vstack(ys))
    projected = eig.vectors[ys].sum(axis=1)  # V^T y for each candidate
    xs = _top_k_rows((projected * eig.values) @ eig.vectors.T, k)

    candidates = np.empty((2 * len(ys) + 1, k), dtype=np.int64)
    candidates[0] = top_k_indices(a.sum(axis=1), k)
    candidates[1::2] = ys
    candidates[2::2] = xs
    best, _ = _pick_best(a, candidates)
    return _report(
        "lowrank", a, candidates[best], samples, t0, seed=cfg.seed,
        unique_candidates=len(ys), eigen_converged=eig.converged,
    )


def brute_force(q, k: int, config: SolverConfig | None = None) -> SolverReport:
    """Exhaustive maximum over all ``C(n, k)`` supports; ties go to the lexicographically smallest."""
    t0 = perf_counter()
    a = as_matrix(q)
    n = a.shape[0]
    k = check_k(k, n)
    total = math.comb(n, k)
    if total > MAX_BRUTE_FORCE:
        raise ValueError(f"C({n},{k}) = {total} exceeds brute-force limit {MAX_BRUTE_FORCE}")
    combos = itertools.combinations(range(n), k)
    chunk = max(1, 2_000_000 // max(1, k * k))
    best, best_obj = None, -math.inf
    while True:
        block = np.array(list(itertools.islice(combos, chunk)), dtype=np.int64)
        if block.size == 0:
            break
        i, val = _pick_best(a, block.reshape(-1, k))
        if val > best_obj:
            best, best_obj = block[i], val
    return _report("brute_force", a, best, total, t0)


def verify_lp2_bound(q, k: int) -> Lp2Bound:
    """Compare the exact optimum with the linear relaxation on one instance."""
    a = _symmetric(q)
    k = check_k(k, a.shape[0])
    opt = brute_force(a, k)
    lin = solve_linear(a, k)
    row_sums = a.sum(axis=1)
    return Lp2Bound(
        total=float(a.sum()),
        optimum=opt.objective,
        linear=lin.objective,
        lp2_value=float(row_sums[lin.support.array].sum()),
    )


SOLVERS = {
    "linear": solve_linear,
    "tpower": solve_tpower,
    "spectral": solve_spectral,
    "lowrank": solve_lowrank,
}


UNSUPPORTED = {
    "sdp": "sdp: not supported; the semidefinite relaxation needs an external SDP solver "
           "(see README)",
}


def solve(method: str, q, k: int, config: SolverConfig | None = None) -> SolverReport:
    if method in UNSUPPORTED:
        raise ValueError(UNSUPPORTED[method])
    try:
        fn = SOLVERS[method]
    except KeyError:
        raise ValueError(f"unknown solver {method!r}; choose from {sorted(SOLVERS)}") from None
    return fn(q, k, config)
