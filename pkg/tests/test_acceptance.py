"""The ten acceptance criteria, each reported as one pass/fail line."""

import json
import time

import numpy as np
import pytest
from conftest import random_sym

from cmiselect.bench import (
    ExperimentGrid,
    gap_experiment,
    generate_assumption1_data,
    generate_planted_dataset,
    planted_features,
    timing_experiment,
)
from cmiselect.cli import main
from cmiselect.dataset import make_folds, write_csv
from cmiselect.evaluation import cross_validate, paired_t_test, t_critical
from cmiselect.infotheory import conditional_mutual_information, mutual_information, subset_mutual_information
from cmiselect.selector import SelectionPipeline, random_support
from cmiselect.solvers import (
    SOLVERS,
    SolverConfig,
    brute_force,
    dominant_eigenvector,
    psd_shift,
    solve,
    top_d_eigen,
    verify_lp2_bound,
)

N_INSTANCES = 500


def sweep_instances():
    rng = np.random.default_rng(2024)
    for i in range(N_INSTANCES):
        n = int(rng.integers(4, 13))
        k = int(rng.integers(1, n))
        q = random_sym(n, [7, i])
        if i % 2:
            mask = rng.random((n, n)) < 0.5
            q = q * (mask | mask.T)  # sparser instances, still symmetric and nonnegative
        yield q, k


def test_01_oracle_sweep(record_acceptance):
    t0 = time.perf_counter()
    violations = []
    for i, (q, k) in enumerate(sweep_instances()):
        best = brute_force(q, k).objective
        lin = None
        for name in SOLVERS:
            r = solve(name, q, k)
            if name == "linear":
                lin = r.objective
            if len(r.support) != k:
                violations.append((i, name, "infeasible"))
            if r.objective > best + 1e-12 * max(1.0, best):
                violations.append((i, name, "above optimum"))
            if name in ("tpower", "lowrank") and r.objective < lin:
                violations.append((i, name, "below linear"))
    elapsed = time.perf_counter() - t0
    ok = not violations and elapsed < 120
    record_acceptance(1, "oracle sweep", ok, f"{len(violations)} violations, {elapsed:.1f}s")
    assert ok, violations[:5]


def test_02_bound_suite(record_acceptance):
    bound = relaxation = 0
    for q, k in sweep_instances():
        b = verify_lp2_bound(q, k)
        bound += not b.bound_holds
        relaxation += not b.relaxation_holds
    ok = bound == 0 and relaxation == 0
    record_acceptance(2, "linear-relaxation bounds", ok,
                      f"{bound} bound and {relaxation} relaxation violations over {N_INSTANCES}")
    assert ok


def test_03_decomposition(record_acceptance):
    deviations = []
    for seed in range(20):
        d = generate_assumption1_data(2, arity=3, c=4, m=100_000, seed=seed)
        xi, y = d.codes[:, 0], d.labels
        direct = subset_mutual_information([d.codes[:, j] for j in range(3)], y)
        decomposed = mutual_information(xi, y) + sum(
            conditional_mutual_information(d.codes[:, j], y, xi) for j in (1, 2)
        )
        deviations.append(abs(direct - decomposed))
    within = sum(v <= 0.02 for v in deviations)
    ok = within >= 19
    record_acceptance(3, "subset MI decomposition", ok,
                      f"{within}/20 seeds within 0.02 bits, max {max(deviations):.5f}")
    assert ok


def test_04_information_identities(record_acceptance):
    rng = np.random.default_rng(11)
    worst_chain, asym, negatives = 0.0, 0, 0
    for _ in range(1000):
        ax, az, ay = rng.integers(2, 5, size=3)
        m = int(rng.integers(5, 200))
        x, z, y = rng.integers(0, ax, m), rng.integers(0, az, m), rng.integers(0, ay, m)
        if rng.random() < 0.5:
            y = (x + z * rng.integers(0, 2, m)) % ay  # dependent labels
        joint = subset_mutual_information([x, z], y, arities=(ax, az, ay))
        split = mutual_information(z, y, (az, ay)) + conditional_mutual_information(x, y, z, (ax, ay, az))
        worst_chain = max(worst_chain, abs(joint - split))
        asym += mutual_information(x, y) != mutual_information(y, x)
        negatives += min(mutual_information(x, y), conditional_mutual_information(x, y, z)) < 0
    ok = worst_chain <= 1e-9 and asym == 0 and negatives == 0
    record_acceptance(4, "information identities", ok,
                      f"chain rule max error {worst_chain:.2e}, {asym} asymmetric, {negatives} negative")
    assert ok


def test_05_gap_direction(record_acceptance):
    t0 = time.perf_counter()
    grid = ExperimentGrid(((100, 10), (500, 50)), trials=10, seed=42)
    rows = gap_experiment(grid, ["tpower", "spectral", "lowrank"])
    elapsed = time.perf_counter() - t0
    ok = elapsed < 600
    parts = []
    for cell in grid.cells:
        g = {r.solver: r.mean for r in rows if (r.n, r.k) == cell}
        ok &= g["tpower"] >= 0 and g["lowrank"] >= 0 and min(g["tpower"], g["lowrank"]) >= g["spectral"]
        parts.append(f"{cell}: tpower {g['tpower']:.2f}% spectral {g['spectral']:.2f}% "
                     f"lowrank {g['lowrank']:.2f}%")
    record_acceptance(5, "gap direction", ok, "; ".join(parts) + f"; {elapsed:.0f}s")
    assert ok


def test_06_timing_direction(record_acceptance):
    grid = ExperimentGrid(((1000, 50),), trials=10, seed=42)
    t = {r.solver: r.mean for r in timing_experiment(grid, ["linear", "tpower", "lowrank"],
                                                      SolverConfig(lowrank_d=3))}
    ok = t["linear"] < t["tpower"] < t["lowrank"]
    record_acceptance(6, "timing direction", ok,
                      f"linear {t['linear']:.4f}s, tpower {t['tpower']:.4f}s, lowrank {t['lowrank']:.4f}s")
    assert ok


def test_07_spectral_correctness(record_acceptance):
    worst_cos, worst_rec = 0.0, 0.0
    for seed in range(50):
        q = random_sym(10, [70, seed])
        v, _ = dominant_eigenvector(q)
        w = np.linalg.eigh(q)[1][:, -1]
        worst_cos = max(worst_cos, 1.0 - abs(v @ w) / (np.linalg.norm(v) * np.linalg.norm(w)))
        eig = top_d_eigen(q, 10, SolverConfig(max_iterations=100_000, tolerance=1e-12))
        rebuilt = eig.vectors @ np.diag(eig.values) @ eig.vectors.T
        target = q + eig.shift * np.eye(10)
        worst_rec = max(worst_rec, np.linalg.norm(rebuilt - target) / np.linalg.norm(target))
    ok = worst_cos <= 1e-6 and worst_rec <= 1e-6
    record_acceptance(7, "spectral correctness", ok,
                      f"max cosine distance {worst_cos:.2e}, max reconstruction error {worst_rec:.2e}")
    assert ok


def test_08_t_test_fidelity(record_acceptance):
    crit = t_critical(9, 0.05)
    rng = np.random.default_rng(8)
    flip = {"win": "loss", "loss": "win", "tie": "tie"}
    antisym = 0
    for _ in range(200):
        f = int(rng.integers(2, 16))
        a, b = rng.uniform(0, 100, f), rng.uniform(0, 100, f)
        if rng.random() < 0.3:
            b = a + rng.normal(2, 1, f)
        ab, ba = paired_t_test(a, b), paired_t_test(b, a)
        antisym += ba.verdict != flip[ab.verdict] or ba.t_statistic != -ab.t_statistic
    same = np.full(10, 12.5)
    degenerate = (
        paired_t_test(same, same).verdict == "tie"
        and paired_t_test(same - 5, same).verdict == "win"
        and paired_t_test(same + 5, same).verdict == "loss"
        and paired_t_test(same - 5, same).t_statistic == -np.inf
    )
    ok = 1.8325 <= crit <= 1.8336 and antisym == 0 and degenerate
    record_acceptance(8, "t-test fidelity", ok,
                      f"t_crit(9) = {crit:.6f}, {antisym} antisymmetry violations, "
                      f"degenerate rules {'exact' if degenerate else 'broken'}")
    assert ok


def test_09_planted_recovery(record_acceptance):
    methods = ("tpower", "lowrank", "jmi")
    good = dict.fromkeys(methods, 0)
    beats = 0
    for seed in range(10):
        d = generate_planted_dataset(50, 5, 2000, seed=seed)
        planted = set(planted_features(d).tolist())
        pipe = SelectionPipeline(d)
        for m in methods:
            good[m] += len(planted & set(pipe.select(m, 5).support)) >= 4
        plan = make_folds(d, 10, seed=seed)
        informative = cross_validate(d, sorted(planted), plan).mean
        rnd = cross_validate(d, random_support(50, 5, seed), plan).mean
        beats += informative < rnd
    ok = all(v >= 8 for v in good.values()) and beats == 10
    detail = ", ".join(f"{m} {good[m]}/10" for m in methods) + f"; informative beats random {beats}/10"
    record_acceptance(9, "planted recovery", ok, detail)
    assert ok


def _run_twice(tmp_path, argv, outputs):
    snapshots = []
    for _ in range(2):
        assert main([str(a) for a in argv]) == 0
        snapshots.append({p.name: p.read_bytes() for p in outputs})
    return snapshots


def _strip_timing(name, data):
    if name == "timing.csv":
        lines = data.decode().splitlines()
        return [",".join(line.split(",")[:3]) for line in lines]
    if name.endswith(".json") and not name.endswith("manifest.json"):
        obj = json.loads(data)
        if isinstance(obj, dict):
            obj.pop("wall_time_s", None)
        return obj
    return data


def test_10_cli_determinism(tmp_path, record_acceptance, capsys):
    d = generate_planted_dataset(15, 3, 150, seed=0)
    data = tmp_path / "d.csv"
    write_csv(d, data)
    runs = {
        "select": (["select", "--input", data, "--k", 3, "--method", "lowrank",
                    "--output", tmp_path / "sel.json", "--scheme-out", tmp_path / "scheme.json"],
                   ["sel.json", "sel.json.manifest.json", "scheme.json"]),
        "select-omit-timing": (["select", "--input", data, "--k", 3, "--method", "jmi", "--omit-timing",
                                "--output", tmp_path / "jmi.json"], ["jmi.json"]),
        "export-q": (["export-q", "--input", data, "--output", tmp_path / "q.csv"],
                     ["q.csv", "q.csv.manifest.json"]),
        "evaluate": (["evaluate", "--input", data, "--methods", "tpower", "random", "--k-values", "2:3",
                      "--folds", 5, "--output", tmp_path / "ev.json"], ["ev.json", "ev.json.manifest.json"]),
        "benchmark": (["benchmark", "--ns", 30, "--ks", 5, "--trials", 2, "--output-dir", tmp_path / "b"],
                      ["b/gap.csv", "b/timing.csv", "b/manifest.json"]),
    }
    differing = []
    for name, (argv, outs) in runs.items():
        a, b = _run_twice(tmp_path, argv, [tmp_path / o for o in outs])
        for key in a:
            if _strip_timing(key, a[key]) != _strip_timing(key, b[key]):
                differing.append(f"{name}:{key}")
    capsys.readouterr()
    ok = not differing
    record_acceptance(10, "CLI determinism", ok,
                      f"{len(runs)} commands repeated, {len(differing)} differing outputs")
    assert ok, differing
