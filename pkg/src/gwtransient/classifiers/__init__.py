"""The nine benchmark classifiers behind one train/predict interface."""

from .base import (
    DISPLAY_NAMES,
    GRADIENT_MODELS,
    MODEL_NAMES,
    ModelSpec,
    TrainReport,
    TrainedModel,
    default_spec,
    predict,
)
from .elm import train_elm
from .forest import gini_gain, train_random_forest
from .gradient import build_network, topology, train_gradient_model
from .persistence import load_model, save_model


def train(spec, data, features=None, log=None):
    """Train any model kind; returns ``(TrainedModel, TrainReport)``."""
    if spec.kind == "elm":
        return train_elm(spec, data, features=features)
    if spec.kind == "rf":
        return train_random_forest(spec, data, features=features)
    return train_gradient_model(spec, data, features=features, log=log)
