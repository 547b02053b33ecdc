import csv

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gwtransient import noise as nz
from gwtransient.dataset import (
    Dataset,
    DatasetConfig,
    build_dataset,
    example_rng,
    export_csv,
    holdout_split,
    injected_signal,
    read_dataset,
    read_header,
    standardize,
    whitening_psd,
    write_dataset,
)
from gwtransient.errors import DomainError, FormatError
from gwtransient.waveforms import TimeGrid, params_from_slots


@pytest.fixture(scope="module")
def small():
    return build_dataset(DatasetConfig(per_class=6, master_seed=7))


def test_class_major_order():
    ds = build_dataset(DatasetConfig(per_class=1, master_seed=3))
    assert len(ds) == 8
    assert list(ds.labels) == list(range(8))


def test_balance_and_shapes(small):
    assert len(small) == 48
    assert list(small.class_counts()) == [6] * 8
    assert small.per_class == 6
    assert small.x.dtype == np.float32 and small.x.shape == (48, 1024)
    assert np.all((small.snr >= 5) & (small.snr <= 25))


def test_stored_examples_are_standardised(small):
    x = small.x.astype(np.float64)
    # samples are stored as float32, so 1e-9 is only reachable before storage
    assert np.max(np.abs(x.mean(axis=1))) < 1e-6
    assert np.max(np.abs(x.std(axis=1) - 1.0)) < 1e-6


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), scale=st.floats(1e-3, 1e3), shift=st.floats(-1e3, 1e3))
def test_standardize_before_storage(seed, scale, shift):
    x = shift + scale * np.random.default_rng(seed).standard_normal(1024)
    z = standardize(x)
    assert abs(z.mean()) < 1e-9
    assert abs(z.std() - 1.0) < 1e-9


def test_injected_snr_reproducible(small):
    config = DatasetConfig(per_class=6, master_seed=7)
    for k in range(0, 48, 5):
        label, index = int(small.labels[k]), k % 6
        params, target, scaled, _ = injected_signal(config, label, index)
        assert target == small.snr[k]
        assert nz.matched_filter_snr(scaled) == pytest.approx(target, rel=1e-9)
        assert params == params_from_slots(small.params_tag[k], small.params[k])


def test_injection_additivity():
    config = DatasetConfig(per_class=1, master_seed=11)
    psd = whitening_psd(config)
    _, _, scaled, rng = injected_signal(config, 3, 0)
    noise = nz.white_noise(1024, 1.0, rng)
    together = nz.whiten(scaled + noise, psd)
    apart = nz.whiten(scaled, psd) + nz.whiten(noise, psd)
    np.testing.assert_allclose(together, apart, atol=1e-9)
    assert np.array_equal(standardize(together).astype(np.float32), build_dataset(config).x[3])


def test_example_seeds_distinct():
    config = DatasetConfig(per_class=1)
    draws = {example_rng(config, c, i).integers(2**63) for c in range(8) for i in range(50)}
    assert len(draws) == 400


def test_serial_and_threaded_builds_identical(tmp_path):
    config = DatasetConfig(per_class=5, master_seed=99)
    a = build_dataset(config, threads=1)
    b = build_dataset(config, threads=4)
    assert a == b
    write_dataset(a, tmp_path / "a.gwtd")
    write_dataset(b, tmp_path / "b.gwtd")
    assert (tmp_path / "a.gwtd").read_bytes() == (tmp_path / "b.gwtd").read_bytes()


def test_different_seed_differs():
    a = build_dataset(DatasetConfig(per_class=1, master_seed=1))
    b = build_dataset(DatasetConfig(per_class=1, master_seed=2))
    assert a != b


def test_config_validation():
    with pytest.raises(DomainError):
        DatasetConfig(per_class=0)
    with pytest.raises(DomainError):
        DatasetConfig(snr_min=25, snr_max=5)


def test_split_counts_and_disjoint():
    ds = build_dataset(DatasetConfig(per_class=10, master_seed=5))
    train, test = holdout_split(ds, 0.8, seed=1)
    assert list(train.class_counts()) == [8] * 8
    assert list(test.class_counts()) == [2] * 8
    key = lambda d: {(int(l), float(s)) for l, s in zip(d.labels, d.snr)}
    everything = key(ds)
    assert key(train) | key(test) == everything
    assert not key(train) & key(test)


def test_split_smallest_stratum():
    ds = build_dataset(DatasetConfig(per_class=2, master_seed=5))
    train, test = holdout_split(ds, 0.5)
    assert list(train.class_counts()) == [1] * 8 and list(test.class_counts()) == [1] * 8
    with pytest.raises(DomainError):
        holdout_split(build_dataset(DatasetConfig(per_class=1)), 0.8)
    with pytest.raises(DomainError):
        holdout_split(ds, 1.0)


def test_split_deterministic(small):
    a = holdout_split(small, 0.5, seed=3)
    b = holdout_split(small, 0.5, seed=3)
    assert a[0] == b[0] and a[1] == b[1]


def test_round_trip(tmp_path, small):
    path = tmp_path / "d.gwtd"
    write_dataset(small, path)
    back = read_dataset(path)
    assert back == small
    assert read_header(path) == (48, 1024, 4096.0, 7)


def test_header_of_single_example_per_class(tmp_path):
    path = tmp_path / "one.gwtd"
    write_dataset(build_dataset(DatasetConfig(per_class=1)), path)
    assert read_header(path)[0] == 8


def test_truncated_file_rejected(tmp_path, small):
    path = tmp_path / "d.gwtd"
    write_dataset(small, path)
    data = path.read_bytes()
    path.write_bytes(data[: len(data) - 100])
    with pytest.raises(FormatError, match="byte offset"):
        read_dataset(path)
    path.write_bytes(data[:10])
    with pytest.raises(FormatError):
        read_dataset(path)


def test_bad_magic_and_trailing_bytes(tmp_path, small):
    path = tmp_path / "d.gwtd"
    write_dataset(small, path)
    data = path.read_bytes()
    path.write_bytes(b"XXXX" + data[4:])
    with pytest.raises(FormatError, match="magic"):
        read_dataset(path)
    path.write_bytes(data + b"\0")
    with pytest.raises(FormatError, match="trailing"):
        read_dataset(path)


def test_csv_export_matches_binary(tmp_path):
    ds = build_dataset(DatasetConfig(per_class=1, master_seed=4))
    path = tmp_path / "d.csv"
    export_csv(ds, path)
    rows = list(csv.reader(path.open()))
    assert len(rows) == 9
    assert rows[0][:3] == ["label", "snr", "s0"]
    assert [int(r[0]) for r in rows[1:]] == list(ds.labels)
    values = np.array([[float(v) for v in r[2:]] for r in rows[1:]], dtype=np.float32)
    assert np.array_equal(values, ds.x)


def test_csv_export_empty(tmp_path, small):
    empty = small.subset([])
    path = tmp_path / "e.csv"
    export_csv(empty, path)
    assert len(path.read_text().splitlines()) == 1


def test_indexing_and_iteration(small):
    ex = small[7]
    assert ex.label == int(small.labels[7])
    assert ex.x.shape == (1024,)
    assert len(small.examples) == 48


def test_custom_grid_and_catalog(tmp_path):
    t = np.arange(4096) / 16384.0
    wave = -np.exp(-(((t - 0.1) / 0.001) ** 2))
    lines = [" ".join(["0", "16384"] + [repr(float(v)) for v in wave])]
    (tmp_path / "sn.txt").write_text("\n".join(lines) + "\n")
    config = DatasetConfig(per_class=2, grid=TimeGrid(512, 2048.0), supernova_catalog=str(tmp_path / "sn.txt"))
    ds = build_dataset(config)
    assert ds.x.shape == (16, 512)
    assert np.all(ds.params[ds.labels == 7][:, 0] == 0)
