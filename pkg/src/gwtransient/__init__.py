"""Synthetic gravitational-wave transients and a nine-model classification benchmark.

Submodules: ``waveforms`` (burst templates), ``noise`` (white noise, SNR,
PSD and whitening), ``dataset`` (generation, splits, GWTD files),
``features`` (TV, PCA, Haar), ``nn`` (from-scratch layers and ADAM),
``classifiers``, ``evaluation``, ``plotting`` and ``cli``.
"""

from .dataset import Dataset, DatasetConfig, build_dataset, holdout_split, read_dataset, write_dataset
from .errors import DomainError, FormatError, NumericalError
from .waveforms import CLASS_NAMES, TimeGrid, TimeSeries, TransientClass, sample_params, synthesize

__version__ = "0.1.0"

__all__ = [
    "CLASS_NAMES",
    "Dataset",
    "DatasetConfig",
    "DomainError",
    "FormatError",
    "NumericalError",
    "TimeGrid",
    "TimeSeries",
    "TransientClass",
    "build_dataset",
    "holdout_split",
    "read_dataset",
    "sample_params",
    "synthesize",
    "write_dataset",
]
