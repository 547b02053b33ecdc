"""Model specifications, trained-model container and training reports."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, replace

import numpy as np

from ..errors import DomainError
from ..features import FeaturePipeline
from ..waveforms import N_CLASSES

GRADIENT_MODELS = ("logreg", "svm", "mlp", "sae", "cnn", "rnn", "deepfilter")
MODEL_NAMES = ("logreg", "svm", "elm", "rf", "mlp", "sae", "cnn", "rnn", "deepfilter")

DISPLAY_NAMES = {
    "deepfilter": "Deep Filtering",
    "cnn": "CNN",
    "rnn": "RNN",
    "rf": "Random Forest",
    "mlp": "MLP",
    "svm": "SVM",
    "logreg": "Logistic Regression",
    "sae": "Stacked Autoencoder",
    "elm": "ELM",
}

DEFAULT_LR = 1e-5
DEFAULT_DECAY = 1e-5
FAST_LR = 1e-3
_EPOCHS = {"cnn": 50, "rnn": 50, "deepfilter": 50, "mlp": 100, "sae": 100, "logreg": 50, "svm": 50}


@dataclass(frozen=True)
class ModelSpec:
    """Which model to train and with what hyperparameters.

    Only the fields relevant to ``kind`` are used: ``c`` for the SVM,
    ``hidden``/``ridge`` for the ELM, ``trees``/``max_depth`` for the
    forest, ``pretrain_epochs`` for the stacked autoencoder.
    """

    kind: str
    epochs: int = 50
    batch_size: int = 128
    lr: float = DEFAULT_LR
    decay: float = DEFAULT_DECAY
    seed: int = 0
    c: float = 1.0
    hidden: int = 8000
    ridge: float = 1e-6
    trees: int = 100
    max_depth: int = 5
    pretrain_epochs: int = 20
    dtype: str = "float32"

    def __post_init__(self):
        if self.kind not in MODEL_NAMES:
            raise DomainError(f"unknown model {self.kind!r}; valid names: {', '.join(MODEL_NAMES)}")
        if self.epochs < 0 or self.pretrain_epochs < 0:
            raise DomainError("epochs must be non-negative")
        if self.batch_size < 1:
            raise DomainError("batch_size must be >= 1")
        if self.hidden < 1 or self.trees < 1 or self.max_depth < 1:
            raise DomainError("hidden, trees and max_depth must be >= 1")
        if self.lr <= 0 or self.decay < 0 or self.c <= 0 or self.ridge < 0:
            raise DomainError("lr and c must be positive; decay and ridge non-negative")
        if self.dtype not in ("float32", "float64"):
            raise DomainError("dtype must be float32 or float64")

    @property
    def is_gradient(self):
        return self.kind in GRADIENT_MODELS

    @property
    def display_name(self):
        return DISPLAY_NAMES[self.kind]

    def to_dict(self):
        return asdict(self)


def default_spec(kind, fast=False, **overrides):
    """Reference hyperparameters for ``kind``; ``fast`` raises the learning rate to 1e-3."""
    base = ModelSpec(kind=kind, epochs=_EPOCHS.get(kind, 0), lr=FAST_LR if fast else DEFAULT_LR)
    return replace(base, **{k: v for k, v in overrides.items() if v is not None})


@dataclass
class TrainReport:
    model: str
    wall_time: float
    epochs: int
    loss_trace: list = field(default_factory=list)
    train_accuracy: float | None = None
    accuracy: float | None = None  # test accuracy, percent
    error: str | None = None

    def to_json(self):
        return {
            "model": self.model,
            "accuracy_percent": self.accuracy,
            "train_seconds": self.wall_time,
            "epochs": self.epochs,
            "train_accuracy_percent": self.train_accuracy,
            "loss_trace": [float(v) for v in self.loss_trace],
            "error": self.error,
        }


def as_xy(data):
    """Accept a ``Dataset`` or an ``(X, y)`` pair."""
    if isinstance(data, tuple):
        X, y = data
    else:
        X, y = data.x, data.labels
    X = np.asarray(X)
    y = np.asarray(y, dtype=np.intp)
    if X.ndim != 2 or len(X) != len(y):
        raise DomainError("training data must be a 2-D matrix with one label per row")
    return X, y


def argmax_lowest(scores):
    """Row-wise argmax; ties go to the lowest class index."""
    return np.argmax(scores, axis=1)


@dataclass
class TrainedModel:
    """A fitted classifier together with the preprocessing it was trained behind.

    ``payload`` exposes ``scores(Z)`` on preprocessed features; ``n_features``
    is the raw input width the model accepts.
    """

    spec: ModelSpec
    n_features: int
    payload: object
    features: FeaturePipeline = field(default_factory=FeaturePipeline)
    n_classes: int = N_CLASSES
    meta: dict = field(default_factory=dict)

    def scores(self, X):
        X = np.asarray(X)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            width = X.shape[-1] if X.ndim else 0
            raise DomainError(f"model expects {self.n_features} features per example, got {width}")
        return self.payload.scores(self.features.transform(X))

    def predict(self, X):
        return argmax_lowest(self.scores(X))


def predict(model, X):
    return model.predict(X)
