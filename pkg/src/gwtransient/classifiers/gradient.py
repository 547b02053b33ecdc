"""Topologies and mini-batch ADAM training for the gradient-trained models."""

from __future__ import annotations

import time

import numpy as np

from .. import nn
from ..errors import DomainError, NumericalError
from ..seeding import rng_for
from ..waveforms import N_CLASSES
from .base import TrainReport, TrainedModel, argmax_lowest, as_xy

RNN_FEATURES_PER_STEP = 16

# Stream keys under the model seed.
_INIT, _SHUFFLE, _PRETRAIN, _DROPOUT = 1, 2, 3, 4


def _conv_stack(width, dilations, channels, kernels):
    layers = [nn.Reshape((1, width))]
    c_in = 1
    for d, c_out, k in zip(dilations, channels, kernels):
        layers += [nn.Conv1D(c_in, c_out, k, dilation=d), nn.ReLU(), nn.MaxPool1D(4)]
        c_in = c_out
    return layers


def topology(kind, width, n_classes=N_CLASSES):
    """Layer list for a gradient-trained model taking ``width`` input features."""
    if kind in ("logreg", "svm"):
        return [nn.Dense(width, n_classes)]
    if kind == "mlp":
        return [nn.Dense(width, 256), nn.ReLU(), nn.Dense(256, 64), nn.ReLU(), nn.Dense(64, n_classes)]
    if kind == "sae":
        return [nn.Dense(width, 256), nn.Tanh(), nn.Dense(256, 64), nn.Tanh(), nn.Dense(64, n_classes)]
    if kind in ("cnn", "deepfilter"):
        if kind == "cnn":
            layers = _conv_stack(width, (1, 1, 1), (16, 32, 64), (16, 8, 8))
        else:
            layers = _conv_stack(width, (1, 2, 2), (16, 32, 64), (16, 16, 16))
        layers.append(nn.Flatten())
        # Flattened width depends on the input length; resolve it by shape inference.
        shape = (width,)
        for layer in layers:
            try:
                shape = layer.output_shape(shape)
            except DomainError as exc:
                raise DomainError(f"{kind} cannot take {width} input features: {exc}") from None
        return layers + [nn.Dense(shape[0], 64), nn.ReLU(), nn.Dense(64, n_classes)]
    if kind == "rnn":
        if width % RNN_FEATURES_PER_STEP:
            raise DomainError(f"rnn input width must be a multiple of {RNN_FEATURES_PER_STEP}, got {width}")
        steps = width // RNN_FEATURES_PER_STEP
        return [
            nn.Reshape((steps, RNN_FEATURES_PER_STEP)),
            nn.BiLSTM(RNN_FEATURES_PER_STEP, 64),
            nn.Dense(128, n_classes),
        ]
    raise DomainError(f"{kind!r} is not a gradient-trained model")


def build_network(kind, width, rng, dtype=np.float64):
    net = nn.Network(topology(kind, width), (width,), dtype=dtype)
    return nn.init_params(net, rng)


class NetworkScorer:
    """Payload wrapper exposing ``scores`` for a trained network."""

    def __init__(self, network):
        self.network = network

    def scores(self, Z):
        return self.network.predict_scores(np.asarray(Z, dtype=self.network.dtype))


def hinge_ovr(scores, labels, weights, c, n_total):
    """One-vs-rest L2-regularised hinge loss and its gradients.

    Per-sample objective ``sum_k max(0, 1 - y_k s_k) + ||W||^2 / (2 c N)``
    with ``y_k = +1`` for the true class and ``-1`` otherwise.
    """
    n, k = scores.shape
    y = -np.ones((n, k), dtype=scores.dtype)
    y[np.arange(n), labels] = 1.0
    margins = 1.0 - y * scores
    active = margins > 0
    reg = 1.0 / (2.0 * c * n_total)
    loss = np.where(active, margins, 0.0).sum() / n + reg * float(np.sum(weights * weights))
    dscores = -(y * active) / n
    return float(loss), dscores, 2.0 * reg * weights


def _batches(n, batch_size, rng):
    order = rng.permutation(n)
    for start in range(0, n, batch_size):
        yield order[start : start + batch_size]


def _pretrain_autoencoder(X, n_hidden, spec, rng, dtype):
    """Tied-weight tanh autoencoder trained on mean squared reconstruction error."""
    n, width = X.shape
    bound = np.sqrt(6.0 / (width + n_hidden))
    w = rng.uniform(-bound, bound, size=(width, n_hidden)).astype(dtype)
    b = np.zeros(n_hidden, dtype=dtype)
    c = np.zeros(width, dtype=dtype)
    state = nn.AdamState.for_params([w, b, c], lr=spec.lr, decay=spec.decay)
    for _ in range(spec.pretrain_epochs):
        for idx in _batches(n, spec.batch_size, rng):
            x = X[idx]
            h = np.tanh(x @ w + b)
            r = h @ w.T + c
            dr = 2.0 * (r - x) / r.size
            dh = dr @ w
            dpre = dh * (1.0 - h * h)
            dw = x.T @ dpre + dr.T @ h
            nn.adam_step(state, [w, b, c], [dw, dpre.sum(axis=0), dr.sum(axis=0)])
    return w, b


def train_gradient_model(spec, train, features=None, log=None):
    """Mini-batch ADAM training of a gradient-trained model.

    ``features`` is an unfitted ``FeaturePipeline`` (default: none).  Returns
    ``(TrainedModel, TrainReport)``; the report's wall time covers the
    whole call.
    """
    from ..features import FeaturePipeline

    if not spec.is_gradient:
        raise DomainError(f"{spec.kind!r} is not trained by gradient descent")
    X_raw, y = as_xy(train)
    start = time.perf_counter()
    features = features or FeaturePipeline()
    features.fit(X_raw)
    dtype = np.dtype(spec.dtype)
    X = np.ascontiguousarray(features.transform(X_raw), dtype=dtype)
    n, width = X.shape

    net = build_network(spec.kind, width, rng_for(spec.seed, _INIT), dtype=dtype)
    if spec.kind == "sae" and spec.pretrain_epochs > 0 and n:
        prng = rng_for(spec.seed, _PRETRAIN)
        w1, b1 = _pretrain_autoencoder(X, 256, spec, prng, dtype)
        w2, b2 = _pretrain_autoencoder(np.tanh(X @ w1 + b1), 64, spec, prng, dtype)
        net.params[0] = [w1, b1]
        net.params[2] = [w2, b2]
        net.touch()

    params = net.flat_params()
    state = nn.AdamState.for_params(params, lr=spec.lr, decay=spec.decay)
    shuffle = rng_for(spec.seed, _SHUFFLE)
    drop = rng_for(spec.seed, _DROPOUT)
    trace = []
    for epoch in range(spec.epochs):
        total, seen = 0.0, 0
        for idx in _batches(n, spec.batch_size, shuffle):
            logits, cache = net.forward(X[idx], train=True, rng=drop)
            if spec.kind == "svm":
                w = net.params[0][0]
                loss, dlogits, dreg = hinge_ovr(logits, y[idx], w, spec.c, n)
            else:
                loss, dlogits = nn.softmax_cross_entropy(logits, y[idx])
                dreg = None
            grads = net.backward(cache, dlogits.astype(dtype, copy=False))
            if dreg is not None:
                grads[0][0] = grads[0][0] + dreg
            nn.adam_step(state, params, [g for group in grads for g in group])
            net.touch()
            total += loss * len(idx)
            seen += len(idx)
        mean_loss = total / max(seen, 1)
        if not np.isfinite(mean_loss):
            raise NumericalError(f"{spec.kind}: loss became non-finite in epoch {epoch}")
        trace.append(mean_loss)
        if log is not None:
            log(f"{spec.kind} epoch {epoch + 1}/{spec.epochs} loss {mean_loss:.5f}")
    wall = time.perf_counter() - start

    model = TrainedModel(spec=spec, n_features=X_raw.shape[1], payload=NetworkScorer(net), features=features)
    train_acc = 100.0 * float(np.mean(argmax_lowest(net.predict_scores(X)) == y)) if n else None
    return model, TrainReport(spec.display_name, wall, spec.epochs, trace, train_acc)

