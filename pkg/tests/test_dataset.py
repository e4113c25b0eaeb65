import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cmiselect.dataset import DataError, RawDataset, load_csv, make_folds, write_csv


def _write(path, text):
    path.write_text(text)
    return path


def test_labels_encoded_by_first_appearance(tmp_path):
    p = _write(tmp_path / "d.csv", "1.0,2.0,a\n3.0,4.0,b\n5.0,6.0,a\n")
    d = load_csv(p)
    assert d.labels.tolist() == [0, 1, 0]
    assert d.n_classes == 2
    assert d.feature_names is None


def test_nan_cell_rejected_with_position(tmp_path):
    p = _write(tmp_path / "d.csv", "1,2,0\n3,nan,1\n")
    with pytest.raises(DataError, match=r"non-finite value at \(1,1\)"):
        load_csv(p)


def test_waveform_shaped_file(tmp_path):
    rng = np.random.default_rng(0)
    X = rng.normal(size=(30, 21))
    y = np.arange(30) % 3
    lines = [",".join([*(f"{v:.6f}" for v in row), str(lab)]) for row, lab in zip(X, y)]
    d = load_csv(_write(tmp_path / "w.csv", "\n".join(lines) + "\n"))
    assert (d.n, d.n_classes, d.m) == (21, 3, 30)


def test_header_detection_and_label_by_name(tmp_path):
    p = _write(tmp_path / "d.csv", "cls,f1,f2\nx,1,2\ny,3,4\nx,5,6\n")
    d = load_csv(p, label_column="cls")
    assert d.feature_names == ["f1", "f2"]
    np.testing.assert_array_equal(d.features, [[1, 2], [3, 4], [5, 6]])
    assert d.labels.tolist() == [0, 1, 0]
    assert load_csv(p, label_column=0).labels.tolist() == [0, 1, 0]


def test_integer_like_labels_normalized(tmp_path):
    d = load_csv(_write(tmp_path / "d.csv", "1,1\n2,1.0\n3,2\n"))
    assert d.labels.tolist() == [0, 0, 1]


@pytest.mark.parametrize(
    "text, message",
    [
        ("1,2,0\n3,0\n", "ragged"),
        ("1,2,0\n3,abc,1\n", "non-numeric"),
        ("1,2,0\n3,4,0\n", "single class"),
        ("", "empty"),
    ],
)
def test_load_errors(tmp_path, text, message):
    with pytest.raises(DataError, match=message):
        load_csv(_write(tmp_path / "d.csv", text))


def test_missing_file(tmp_path):
    with pytest.raises(DataError, match="cannot read"):
        load_csv(tmp_path / "absent.csv")


def test_unknown_label_name(tmp_path):
    p = _write(tmp_path / "d.csv", "a,b\n1,0\n2,1\n")
    with pytest.raises(DataError, match="not found"):
        load_csv(p, label_column="zzz")


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(features=np.zeros((1, 2)), labels=[0], n_classes=2),
        dict(features=np.zeros((3, 2)), labels=[0, 0, 0], n_classes=2),
        dict(features=np.zeros((3, 2)), labels=[0, 1, 2], n_classes=2),
        dict(features=[[1.0], [np.inf]], labels=[0, 1], n_classes=2),
        dict(features=np.zeros((2, 2)), labels=[0, 1], n_classes=1),
    ],
)
def test_raw_dataset_invariants(kwargs):
    with pytest.raises(DataError):
        RawDataset(**kwargs)


def test_raw_dataset_is_read_only():
    d = RawDataset(np.zeros((2, 1)), [0, 1], 2)
    with pytest.raises(ValueError):
        d.features[0, 0] = 1.0


@given(
    st.integers(2, 12),
    st.integers(1, 4),
    st.integers(2, 3),
    st.integers(0, 2**31 - 1),
)
def test_csv_round_trip(m, n, c, seed):
    import tempfile
    from pathlib import Path

    rng = np.random.default_rng(seed)
    m = max(m, c)
    X = rng.normal(size=(m, n)) * 10.0 ** rng.integers(-8, 8)
    y = np.arange(m) % c
    # first-appearance encoding of 0..c-1 in this order is the identity
    d = RawDataset(X, y, c)
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "rt.csv"
        write_csv(d, path)
        back = load_csv(path)
    np.testing.assert_array_equal(back.features, d.features)
    np.testing.assert_array_equal(back.labels, d.labels)


def test_two_fold_partition_of_four_rows():
    plan = make_folds([0, 1, 0, 1], 2, seed=3, mode="kfold")
    assert plan.mode == "k-fold" and len(plan) == 2
    tests = [t for _, t in plan]
    assert [len(t) for t in tests] == [2, 2]
    assert sorted(np.concatenate(tests).tolist()) == [0, 1, 2, 3]


def test_small_data_uses_leave_one_out():
    plan = make_folds(np.arange(80) % 2, 10, seed=0)
    assert plan.mode == "leave-one-out"
    assert len(plan) == 80
    assert all(len(te) == 1 and len(tr) == 79 for tr, te in plan)


def test_large_data_uses_kfold():
    plan = make_folds(np.arange(101) % 2, 10, seed=0)
    assert plan.mode == "k-fold" and len(plan) == 10


def test_folds_deterministic_given_seed():
    y = np.arange(500) % 3
    a, b = make_folds(y, 10, seed=7), make_folds(y, 10, seed=7)
    for (tr1, te1), (tr2, te2) in zip(a, b):
        np.testing.assert_array_equal(tr1, tr2)
        np.testing.assert_array_equal(te1, te2)
    c = make_folds(y, 10, seed=8)
    assert any(not np.array_equal(x[1], z[1]) for x, z in zip(a, c))


def test_fold_errors():
    with pytest.raises(ValueError):
        make_folds([0, 1, 0], 4, mode="kfold")
    with pytest.raises(ValueError):
        make_folds([0, 1, 0], 1)
    with pytest.raises(ValueError):
        make_folds([0, 1, 0], 2, mode="bogus")


@given(
    st.lists(st.integers(0, 3), min_size=2, max_size=300),
    st.integers(2, 12),
    st.integers(0, 1000),
    st.sampled_from(["auto", "kfold"]),
)
def test_fold_partition_and_stratification(labels, folds, seed, mode):
    y = np.array(labels)
    m = y.size
    folds = min(folds, m)
    plan = make_folds(y, folds, seed=seed, mode=mode)
    everything = np.arange(m)
    tests = np.concatenate([te for _, te in plan])
    assert sorted(tests.tolist()) == everything.tolist()
    for tr, te in plan:
        assert np.intersect1d(tr, te).size == 0
        assert sorted(np.concatenate([tr, te]).tolist()) == everything.tolist()
    if plan.mode == "k-fold":
        for cls in np.unique(y):
            total = np.sum(y == cls)
            for _, te in plan:
                count = np.sum(y[te] == cls)
                assert abs(count - total / len(plan)) < 1.0 + 1e-9
