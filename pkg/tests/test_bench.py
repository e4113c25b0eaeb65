import time

import numpy as np
import pytest

from cmiselect.bench import (
    GAP_HEADER,
    TIMING_HEADER,
    ExperimentGrid,
    gap_experiment,
    generate_assumption1_data,
    generate_planted_dataset,
    loglog_slope,
    planted_features,
    random_q,
    rows_to_csv,
    timing_experiment,
    trial_seed,
)
from cmiselect.infotheory import conditional_mutual_information
from cmiselect.solvers import solve_tpower


def test_random_q_properties():
    a, b = random_q(50, 7), random_q(50, 7)
    np.testing.assert_array_equal(np.asarray(a), np.asarray(b))
    q = np.asarray(a)
    assert np.array_equal(q, q.T)
    assert q.min() >= 0 and q.max() < 1
    assert not np.array_equal(q, np.asarray(random_q(50, 8)))


def test_random_q_fast():
    t0 = time.perf_counter()
    random_q(1000, 0)
    assert time.perf_counter() - t0 < 1.0


def test_random_q_rejects_empty():
    with pytest.raises(ValueError):
        random_q(0, 0)


def test_trial_seed_independent_of_k():
    assert trial_seed(42, 100, 3) == [42, 100, 3]


def test_grid_product_and_validation():
    g = ExperimentGrid.product([5, 20], [10], trials=2, seed=1)
    assert g.cells == ((20, 10),)
    with pytest.raises(ValueError):
        ExperimentGrid(((5, 6),))
    with pytest.raises(ValueError):
        ExperimentGrid(((5, 2),), trials=0)


def test_empty_grid_writes_header_only():
    g = ExperimentGrid.product([], [], trials=1)
    assert rows_to_csv(timing_experiment(g, ["linear"]), TIMING_HEADER) == ",".join(TIMING_HEADER) + "\n"
    assert rows_to_csv(gap_experiment(g, ["linear"]), GAP_HEADER) == ",".join(GAP_HEADER) + "\n"


def test_gap_experiment_signs():
    g = ExperimentGrid.product([40, 60], [5, 10], trials=3, seed=0)
    rows = gap_experiment(g, ["linear", "tpower", "lowrank"])
    assert len(rows) == 12
    for r in rows:
        if r.solver == "linear":
            assert r.mean == 0.0 and r.sd == 0.0
        else:
            assert r.mean >= 0.0


def test_gap_experiment_deterministic():
    g = ExperimentGrid.product([30], [4], trials=2, seed=5)
    assert gap_experiment(g, ["tpower", "spectral"]) == gap_experiment(g, ["tpower", "spectral"])


def test_timing_rows():
    g = ExperimentGrid.product([30], [5], trials=2)
    rows = timing_experiment(g, ["linear", "tpower"])
    assert [r.solver for r in rows] == ["linear", "tpower"]
    assert all(r.mean > 0 for r in rows)
    lines = rows_to_csv(rows, TIMING_HEADER).splitlines()
    assert lines[0] == ",".join(TIMING_HEADER) and len(lines) == 3


def test_tpower_iteration_cost_is_quadratic():
    ns = [500, 1000, 2000, 4000]
    per_iter = []
    for n in ns:
        q = random_q(n, n)
        best = min(
            (r.wall_time / r.iterations for r in (solve_tpower(q, 50) for _ in range(3))),
        )
        per_iter.append(best)
    assert 1.5 <= loglog_slope(ns, per_iter) <= 2.5


def test_loglog_slope():
    xs = [1, 2, 4, 8]
    assert loglog_slope(xs, [x**2 for x in xs]) == pytest.approx(2.0)


def test_assumption1_shape():
    d = generate_assumption1_data(0, seed=0, m=500)
    assert d.codes.shape == (500, 1) and d.n_classes == 4
    d = generate_assumption1_data(3, arity=3, c=6, m=800, seed=1)
    assert d.codes.shape == (800, 4)
    assert d.codes.max() <= 2 and set(np.unique(d.labels)) <= set(range(6))


def test_assumption1_conditional_independence():
    d = generate_assumption1_data(2, m=100_000, seed=3)
    xi, y = d.codes[:, 0], d.labels
    joint = xi * 4 + y
    assert conditional_mutual_information(d.codes[:, 1], d.codes[:, 2], joint) <= 0.01


def test_assumption1_validation():
    with pytest.raises(ValueError):
        generate_assumption1_data(-1)
    with pytest.raises(ValueError):
        generate_assumption1_data(1, arity=1)


def test_planted_dataset():
    d = generate_planted_dataset(100, 10, 500, seed=0)
    assert d.features.shape == (500, 100)
    assert len(planted_features(d)) == 10
    assert np.bincount(d.labels).tolist() == [250, 250]
    d2 = generate_planted_dataset(20, 0, 10, seed=0)
    assert len(planted_features(d2)) == 0
    with pytest.raises(ValueError):
        generate_planted_dataset(10, 2, 0)
    with pytest.raises(ValueError):
        generate_planted_dataset(10, 11, 50)
