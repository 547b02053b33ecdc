"""A small reverse-mode training core shared by the gradient-trained models."""

from .layers import (
    BiLSTM,
    Conv1D,
    Dense,
    Dropout,
    Flatten,
    LAYER_TYPES,
    Layer,
    MaxPool1D,
    ReLU,
    Reshape,
    Sigmoid,
    Tanh,
    layer_from_dict,
)
from .network import (
    AdamState,
    Network,
    adam_step,
    gradient_check,
    init_bounds,
    init_params,
    softmax,
    softmax_cross_entropy,
)
