import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gwtransient import classifiers as clf
from gwtransient.dataset import DatasetConfig, build_dataset, holdout_split
from gwtransient.errors import DomainError, FormatError
from gwtransient.evaluation import (
    ConfusionMatrix,
    accuracy,
    benchmark_training,
    confusion_matrix,
    read_confusion_csv,
    render_table,
    timed,
    write_confusion_csv,
    write_report_json,
)

labels = st.lists(st.integers(0, 7), min_size=1, max_size=200)


def test_identity_predictions_diagonal():
    y = np.array([0, 1, 2, 2, 7, 5])
    cm = confusion_matrix(y, y)
    assert np.array_equal(cm.counts, np.diag(np.bincount(y, minlength=8)))
    assert accuracy(cm) == 100.0


def test_single_example():
    cm = confusion_matrix([3], [5])
    expected = np.zeros((8, 8), dtype=int)
    expected[3, 5] = 1
    assert np.array_equal(cm.counts, expected)


def test_matches_double_loop():
    rng = np.random.default_rng(0)
    t, p = rng.integers(0, 8, 1000), rng.integers(0, 8, 1000)
    ref = np.zeros((8, 8), dtype=int)
    for i in range(8):
        for j in range(8):
            ref[i, j] = sum(1 for a, b in zip(t, p) if a == i and b == j)
    assert np.array_equal(confusion_matrix(t, p).counts, ref)


def test_accuracy_arithmetic():
    counts = np.zeros((8, 8), dtype=int)
    counts[0, 0], counts[1, 1], counts[2, 3] = 5, 4, 3
    assert accuracy(ConfusionMatrix(counts)) == 75.0


def test_validation():
    with pytest.raises(DomainError):
        confusion_matrix([0, 1], [0])
    with pytest.raises(DomainError):
        confusion_matrix([0, 8], [0, 1])
    with pytest.raises(DomainError):
        confusion_matrix([-1], [0])
    with pytest.raises(DomainError):
        accuracy(ConfusionMatrix(np.zeros((8, 8), dtype=int)))


@settings(max_examples=80, deadline=None)
@given(data=st.data(), y=labels)
def test_properties(data, y):
    p = data.draw(st.lists(st.integers(0, 7), min_size=len(y), max_size=len(y)))
    cm = confusion_matrix(y, p)
    assert list(cm.row_sums()) == list(np.bincount(y, minlength=8))
    assert cm.total == len(y)
    assert accuracy(confusion_matrix(y, y)) == 100.0
    assert abs(accuracy(cm) - 100.0 * np.mean(np.array(y) == np.array(p))) < 1e-9


def test_csv_round_trip(tmp_path):
    rng = np.random.default_rng(1)
    cm = confusion_matrix(rng.integers(0, 8, 300), rng.integers(0, 8, 300))
    path = tmp_path / "cm.csv"
    write_confusion_csv(cm, path)
    lines = path.read_text().splitlines()
    assert len(lines) == 9
    assert lines[0].split(",")[0] == "Ring Gaussian"
    back, names = read_confusion_csv(path)
    assert np.array_equal(back.counts, cm.counts)
    assert len(names) == 8


def test_csv_rejects_garbage(tmp_path):
    path = tmp_path / "cm.csv"
    path.write_text("a,b\n1,2\n3,x\n")
    with pytest.raises(FormatError, match="line 3"):
        read_confusion_csv(path)
    path.write_text("a,b\n1,2\n")
    with pytest.raises(FormatError):
        read_confusion_csv(path)


def test_report_json_schema(tmp_path):
    reports = [clf.TrainReport("A", 1.5, 3, [1.0, 0.5], 80.0, accuracy=75.0)]
    path = tmp_path / "r.json"
    write_report_json(reports, path)
    data = json.loads(path.read_text())
    assert data[0]["model"] == "A"
    assert data[0]["accuracy_percent"] == 75.0
    assert data[0]["train_seconds"] == 1.5 and data[0]["epochs"] == 3


def test_table_sorted_by_accuracy():
    reports = [
        clf.TrainReport("low", 1.0, 1, accuracy=20.0),
        clf.TrainReport("broken", 0.0, 1, error="boom"),
        clf.TrainReport("high", 2.0, 1, accuracy=90.0),
    ]
    rows = render_table(reports).splitlines()[2:]
    assert [r.split()[0] for r in rows] == ["high", "low", "broken"]
    assert "failed" in rows[2]


@pytest.fixture(scope="module")
def split():
    return holdout_split(build_dataset(DatasetConfig(per_class=30, master_seed=5)), 0.8, seed=0)


def test_benchmark_smoke(split):
    train, test = split
    reports, confusions, table = benchmark_training([clf.default_spec("logreg", epochs=2)], train, test)
    (r,) = reports
    assert np.isfinite(r.wall_time) and r.wall_time >= 0
    assert 0 <= r.accuracy <= 100
    assert confusions["logreg"].total == len(test)
    assert "Logistic" in table


def test_benchmark_repeatable_and_failure_isolated(split, monkeypatch):
    from gwtransient import evaluation

    real_train = evaluation.train

    def flaky(spec, *args, **kwargs):
        if spec.kind == "elm":
            raise FloatingPointError("injected failure")
        return real_train(spec, *args, **kwargs)

    monkeypatch.setattr(evaluation, "train", flaky)
    train, test = split
    specs = [clf.default_spec("logreg", epochs=2), clf.ModelSpec("elm", hidden=16), clf.ModelSpec("rf", trees=3)]
    a, _, _ = benchmark_training(specs, train, test)
    b, _, _ = benchmark_training(specs, train, test)
    assert [r.accuracy for r in a] == [r.accuracy for r in b]
    assert "injected failure" in a[1].error and a[1].accuracy is None
    assert a[2].accuracy is not None


def test_benchmark_needs_specs(split):
    with pytest.raises(DomainError):
        benchmark_training([], *split)


def test_timed():
    out, seconds = timed(sum, [1, 2, 3])
    assert out == 6 and seconds >= 0
