"""Labeled dataset generation, hold-out splitting and persistence.

Binary layout (little-endian)::

    header : b"GWTD" | u16 version=1 | u32 n_examples | u32 n_samples
             | f64 sample_rate | u64 master_seed
    record : u8 label | f64 target_snr | u8 params_tag | 6 x f64 params
             | n_samples x f32 samples
"""

from __future__ import annotations

import csv
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import noise as nz
from . import waveforms as wf
from .errors import DomainError, FormatError
from .seeding import derive_seed, rng_for, worker_count

MAGIC = b"GWTD"
VERSION = 1
_HEADER = struct.Struct("<4sHIIdQ")
_RECORD_HEAD = struct.Struct("<BdB6d")

PSD_STREAM_LENGTH = 2**20
_PSD_KEY = 0x505344  # stream key for the whitening-noise realisation


@dataclass(frozen=True)
class DatasetConfig:
    per_class: int = 800
    snr_min: float = 5.0
    snr_max: float = 25.0
    grid: wf.TimeGrid = field(default_factory=wf.TimeGrid)
    master_seed: int = 42
    supernova_catalog: str | None = None

    def __post_init__(self):
        if self.per_class < 1:
            raise DomainError(f"per_class must be at least 1, got {self.per_class}")
        if not 0 < self.snr_min <= self.snr_max:
            raise DomainError(f"need 0 < snr_min <= snr_max, got {self.snr_min}, {self.snr_max}")
        if not 0 <= self.master_seed < 2**64:
            raise DomainError("master_seed must fit in an unsigned 64-bit integer")


@dataclass(frozen=True)
class LabeledExample:
    x: np.ndarray
    label: int
    target_snr: float
    params: object


@dataclass
class Dataset:
    """Examples stored column-wise.

    ``x`` is ``(n_examples, n_samples)`` float32, ``labels`` uint8,
    ``snr`` float64, ``params_tag`` uint8 and ``params`` ``(n, 6)`` float64.
    """

    x: np.ndarray
    labels: np.ndarray
    snr: np.ndarray
    params_tag: np.ndarray
    params: np.ndarray
    grid: wf.TimeGrid
    master_seed: int

    def __post_init__(self):
        n = len(self.labels)
        self.x = np.ascontiguousarray(self.x, dtype=np.float32).reshape(n, self.grid.n_samples)
        self.labels = np.asarray(self.labels, dtype=np.uint8)
        self.snr = np.asarray(self.snr, dtype=np.float64)
        self.params_tag = np.asarray(self.params_tag, dtype=np.uint8)
        self.params = np.asarray(self.params, dtype=np.float64).reshape(n, wf.N_PARAM_SLOTS)

    def __len__(self):
        return len(self.labels)

    def __getitem__(self, i):
        return LabeledExample(
            self.x[i], int(self.labels[i]), float(self.snr[i]),
            wf.params_from_slots(self.params_tag[i], self.params[i]),
        )

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    @property
    def examples(self):
        return list(self)

    def class_counts(self):
        return np.bincount(self.labels, minlength=wf.N_CLASSES)

    @property
    def per_class(self):
        counts = self.class_counts()
        return int(counts[0]) if np.all(counts == counts[0]) else None

    def subset(self, index):
        index = np.asarray(index, dtype=np.intp)
        return Dataset(
            self.x[index], self.labels[index], self.snr[index],
            self.params_tag[index], self.params[index], self.grid, self.master_seed,
        )

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.grid.n_samples == other.grid.n_samples
            and self.grid.sample_rate == other.grid.sample_rate
            and self.master_seed == other.master_seed
            and np.array_equal(self.labels, other.labels)
            and np.array_equal(self.params_tag, other.params_tag)
            and self.snr.tobytes() == other.snr.tobytes()
            and self.params.tobytes() == other.params.tobytes()
            and self.x.tobytes() == other.x.tobytes()
        )


# --- generation --------------------------------------------------------------


def standardize(x):
    """Zero mean, unit (population) standard deviation along the last axis."""
    x = np.asarray(x, dtype=float)
    centered = x - x.mean(axis=-1, keepdims=True)
    std = centered.std(axis=-1, keepdims=True)
    return centered / np.where(std > 0, std, 1.0)


def whitening_psd(config):
    """PSD of a long unit-variance noise stream, floored, shared by a whole build."""
    rng = rng_for(config.master_seed, _PSD_KEY)
    stream = nz.white_noise(PSD_STREAM_LENGTH, 1.0, rng)
    psd = nz.estimate_psd(stream, config.grid.n_samples, config.grid.sample_rate)
    return nz.floored(psd)


def example_rng(config, label, index):
    return rng_for(config.master_seed, int(label), int(index))


def injected_signal(config, label, index, catalog=None):
    """Regenerate the scaled template of one example (before noise).

    Returns ``(params, target_snr, samples, rng)`` where ``rng`` is positioned
    to draw that example's noise.
    """
    rng = example_rng(config, label, index)
    params = wf.sample_params(label, rng, catalog=catalog)
    template = wf.synthesize(label, params, config.grid, catalog=catalog)
    target = float(rng.uniform(config.snr_min, config.snr_max))
    scaled = nz.scale_to_snr(template.samples, target)
    return params, target, scaled, rng


def _generate_one(config, catalog, psd, label, index):
    params, target, scaled, rng = injected_signal(config, label, index, catalog)
    noisy = scaled + nz.white_noise(config.grid.n_samples, 1.0, rng)
    x = standardize(nz.whiten(noisy, psd))
    tag, slots = wf.params_to_slots(params)
    return x, target, tag, slots


def build_dataset(config, threads=None):
    """Generate ``per_class`` whitened noisy examples of every class.

    Examples are ordered class-major, then by index, whatever the number of
    worker threads.
    """
    catalog = None
    if config.supernova_catalog is not None:
        catalog = wf.load_supernova_catalog(config.supernova_catalog, config.grid)
    psd = whitening_psd(config)
    jobs = [(label, i) for label in range(wf.N_CLASSES) for i in range(config.per_class)]
    threads = threads or worker_count()

    def run(job):
        return _generate_one(config, catalog, psd, *job)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, jobs, chunksize=64))
    else:
        results = [run(job) for job in jobs]

    n = len(jobs)
    x = np.empty((n, config.grid.n_samples), dtype=np.float32)
    for k, r in enumerate(results):
        x[k] = r[0]
    return Dataset(
        x=x,
        labels=np.array([label for label, _ in jobs], dtype=np.uint8),
        snr=np.array([r[1] for r in results]),
        params_tag=np.array([r[2] for r in results], dtype=np.uint8),
        params=np.array([r[3] for r in results]).reshape(n, wf.N_PARAM_SLOTS),
        grid=config.grid,
        master_seed=config.master_seed,
    )


def holdout_split(ds, train_fraction=0.8, seed=0):
    """Stratified hold-out split; each class contributes ``floor(f * count)`` to train."""
    if not 0.0 < train_fraction < 1.0:
        raise DomainError(f"train_fraction must lie in (0, 1), got {train_fraction}")
    rng = np.random.Generator(np.random.PCG64(derive_seed(seed, 0x53504C)))
    train_idx, test_idx = [], []
    for label in range(wf.N_CLASSES):
        members = np.flatnonzero(ds.labels == label)
        if members.size == 0:
            continue
        members = members[rng.permutation(members.size)]
        k = int(np.floor(train_fraction * members.size))
        if k == 0 or k == members.size:
            raise DomainError(
                f"split {train_fraction} of {members.size} examples leaves class {label} "
                "with an empty train or test side"
            )
        train_idx.append(members[:k])
        test_idx.append(members[k:])
    return ds.subset(np.concatenate(train_idx)), ds.subset(np.concatenate(test_idx))


# --- persistence -------------------------------------------------------------


def _record_struct(n_samples):
    return struct.Struct(f"<BdB6d{n_samples}f")


def write_dataset(ds, path):
    n, m = ds.x.shape
    rec = _record_struct(m)
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, n, m, ds.grid.sample_rate, int(ds.master_seed)))
        for i in range(n):
            fh.write(
                rec.pack(int(ds.labels[i]), float(ds.snr[i]), int(ds.params_tag[i]), *ds.params[i], *ds.x[i])
            )


def read_dataset(path):
    """Read a dataset file; malformed input raises ``FormatError`` with a byte offset."""
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise FormatError("file shorter than the dataset header", offset=len(data))
    magic, version, n, m, rate, seed = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {MAGIC!r}", offset=0)
    if version != VERSION:
        raise FormatError(f"unsupported dataset version {version}", offset=4)
    try:
        grid = wf.TimeGrid(m, rate)
    except DomainError as exc:
        raise FormatError(f"invalid grid in header: {exc}", offset=10) from None

    rec_size = _RECORD_HEAD.size + 4 * m
    expected = _HEADER.size + n * rec_size
    if len(data) < expected:
        complete = (len(data) - _HEADER.size) // rec_size
        raise FormatError(
            f"truncated: {n} records declared, {complete} complete",
            offset=_HEADER.size + complete * rec_size,
        )
    if len(data) > expected:
        raise FormatError("trailing bytes after the last record", offset=expected)

    rec_dtype = np.dtype(
        [("label", "u1"), ("snr", "<f8"), ("tag", "u1"), ("params", "<f8", (6,)), ("x", "<f4", (m,))]
    )
    assert rec_dtype.itemsize == rec_size
    records = np.frombuffer(data, dtype=rec_dtype, count=n, offset=_HEADER.size)
    bad = np.flatnonzero(records["label"] >= wf.N_CLASSES)
    if bad.size:
        raise FormatError(f"label {records['label'][bad[0]]} out of range", offset=_HEADER.size + bad[0] * rec_size)
    return Dataset(
        x=records["x"].astype(np.float32),
        labels=records["label"].copy(),
        snr=records["snr"].astype(np.float64),
        params_tag=records["tag"].copy(),
        params=records["params"].astype(np.float64),
        grid=grid,
        master_seed=int(seed),
    )


def read_header(path):
    """``(n_examples, n_samples, sample_rate, master_seed)`` without loading records."""
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
    if len(head) < _HEADER.size:
        raise FormatError("file shorter than the dataset header", offset=len(head))
    magic, version, n, m, rate, seed = _HEADER.unpack(head)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}", offset=0)
    return n, m, rate, seed


def export_csv(ds, path):
    """Write ``label,snr,s0,...`` rows with 9 significant digits."""
    m = ds.grid.n_samples
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["label", "snr"] + [f"s{i}" for i in range(m)])
        for i in range(len(ds)):
            writer.writerow(
                [int(ds.labels[i]), f"{ds.snr[i]:.9g}"] + [f"{v:.9g}" for v in ds.x[i].astype(float)]
            )
