"""Sequential networks, initialisation, loss and the ADAM optimiser."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import DomainError
from .layers import BiLSTM, Conv1D, Dense, ReLU, Sigmoid, Tanh


@dataclass
class Cache:
    entries: list
    version: int


class Network:
    """A sequence of layers with their parameters.

    ``params[i]`` is the list of arrays owned by layer ``i`` (possibly empty).
    ``version`` is bumped whenever parameters are updated in place so that a
    cache from an earlier forward pass cannot be used for backward.
    """

    def __init__(self, layers, input_shape, params=None, dtype=np.float64):
        self.layers = list(layers)
        self.input_shape = tuple(input_shape)
        self.dtype = np.dtype(dtype)
        self.shapes = [self.input_shape]
        for idx, layer in enumerate(self.layers):
            try:
                self.shapes.append(tuple(layer.output_shape(self.shapes[-1])))
            except DomainError as exc:
                raise DomainError(f"layer {idx} ({layer.kind}): {exc}") from None
        self.params = params if params is not None else [
            [np.zeros(s, dtype=self.dtype) for s in layer.param_shapes(self.shapes[i])]
            for i, layer in enumerate(self.layers)
        ]
        self.version = 0

    @property
    def output_shape(self):
        return self.shapes[-1]

    def flat_params(self):
        return [p for group in self.params for p in group]

    def n_params(self):
        return sum(p.size for p in self.flat_params())

    def touch(self):
        self.version += 1

    def forward(self, x, train=False, rng=None):
        x = np.asarray(x, dtype=self.dtype)
        if x.shape[1:] != self.input_shape:
            raise DomainError(f"layer 0 ({self.layers[0].kind}): expected input {self.input_shape}, got {x.shape[1:]}")
        entries = []
        for layer, p in zip(self.layers, self.params):
            x, c = layer.forward(p, x, train=train, rng=rng)
            entries.append(c)
        return x, Cache(entries, self.version)

    def backward(self, cache, grad_out):
        if cache.version != self.version:
            raise DomainError("stale cache: parameters changed since the forward pass")
        grads = [None] * len(self.layers)
        dy = grad_out
        for i in range(len(self.layers) - 1, -1, -1):
            dy, grads[i] = self.layers[i].backward(self.params[i], cache.entries[i], dy)
        return grads

    def backward_input(self, cache, grad_out):
        """Gradient with respect to the network input."""
        if cache.version != self.version:
            raise DomainError("stale cache: parameters changed since the forward pass")
        dy = grad_out
        for i in range(len(self.layers) - 1, -1, -1):
            dy, _ = self.layers[i].backward(self.params[i], cache.entries[i], dy)
        return dy

    def predict_scores(self, x, batch_size=512):
        out = []
        for start in range(0, len(x), batch_size):
            logits, _ = self.forward(x[start : start + batch_size])
            out.append(logits)
        if not out:
            return np.zeros((0,) + self.output_shape)
        return np.concatenate(out)


def _activation_after(layers, idx):
    for layer in layers[idx + 1 :]:
        if isinstance(layer, (ReLU, Tanh, Sigmoid)):
            return layer.kind
        if isinstance(layer, (Dense, Conv1D, BiLSTM)):
            return None
    return None


def init_bounds(layers, input_shape):
    """Uniform init bound per weighted layer (``None`` for parameter-free layers).

    He-uniform ``sqrt(6/fan_in)`` when the next activation is ReLU;
    Glorot-uniform ``sqrt(6/(fan_in+fan_out))`` otherwise (tanh, sigmoid,
    LSTM, and the linear output layer).
    """
    bounds = []
    shape = tuple(input_shape)
    for i, layer in enumerate(layers):
        if isinstance(layer, (Dense, Conv1D, BiLSTM)):
            fan_in, fan_out = layer.fan(shape)
            if not isinstance(layer, BiLSTM) and _activation_after(layers, i) == "relu":
                bounds.append(math.sqrt(6.0 / fan_in))
            else:
                bounds.append(math.sqrt(6.0 / (fan_in + fan_out)))
        else:
            bounds.append(None)
        shape = layer.output_shape(shape)
    return bounds


def init_params(net, rng):
    """Fill ``net``'s weights from ``rng``; biases start at zero."""
    for layer, group, bound in zip(net.layers, net.params, init_bounds(net.layers, net.input_shape)):
        if bound is None:
            continue
        for p in group:
            if p.ndim >= 2:
                p[...] = rng.uniform(-bound, bound, size=p.shape)
            else:
                p[...] = 0.0
    net.touch()
    return net


def softmax(logits):
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def softmax_cross_entropy(logits, labels):
    """Mean cross-entropy over the batch and its gradient with respect to ``logits``."""
    logits = np.asarray(logits, dtype=float)
    labels = np.asarray(labels, dtype=np.intp)
    n, k = logits.shape
    if labels.shape != (n,) or (n and (labels.min() < 0 or labels.max() >= k)):
        raise DomainError("labels must be a length-batch vector of codes in range")
    z = logits - logits.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(z).sum(axis=1))
    log_p = z - log_norm[:, None]
    loss = -log_p[np.arange(n), labels].mean()
    grad = np.exp(log_p)
    grad[np.arange(n), labels] -= 1.0
    return float(loss), grad / n


@dataclass
class AdamState:
    """ADAM accumulators with Keras-style inverse-time learning-rate decay."""

    lr: float = 1e-3
    decay: float = 0.0
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    step_count: int = 0
    first_moment: list = field(default_factory=list)
    second_moment: list = field(default_factory=list)

    @classmethod
    def for_params(cls, params, **kw):
        state = cls(**kw)
        state.first_moment = [np.zeros_like(p) for p in params]
        state.second_moment = [np.zeros_like(p) for p in params]
        return state

    @property
    def effective_lr(self):
        return self.lr / (1.0 + self.decay * self.step_count)


def adam_step(state, params, grads):
    """Update ``params`` in place; returns ``(params, state)``."""
    if not state.first_moment:
        state.first_moment = [np.zeros_like(p) for p in params]
        state.second_moment = [np.zeros_like(p) for p in params]
    if len(params) != len(grads) or len(params) != len(state.first_moment):
        raise DomainError("params, grads and optimiser state disagree in length")
    lr = state.effective_lr
    state.step_count += 1
    t = state.step_count
    c1 = 1.0 - state.beta1**t
    c2 = 1.0 - state.beta2**t
    for p, g, m, v in zip(params, grads, state.first_moment, state.second_moment):
        if p.shape != g.shape:
            raise DomainError(f"gradient shape {g.shape} does not match parameter shape {p.shape}")
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * g * g
        p -= lr * (m / c1) / (np.sqrt(v / c2) + state.epsilon)
    return params, state


def gradient_check(net, x, labels, h=1e-5, max_entries=None, rng=None):
    """Largest relative error between backprop and central differences.

    The loss is softmax cross-entropy.  Returns a dict mapping
    ``(layer_index, param_index)`` to ``||analytic - numeric|| /
    max(||analytic||, ||numeric||)`` over the checked entries.  With
    ``max_entries`` only that many randomly chosen entries per array are
    perturbed.
    """
    rng = rng or np.random.default_rng(0)
    logits, cache = net.forward(x)
    _, dlogits = softmax_cross_entropy(logits, labels)
    grads = net.backward(cache, dlogits)

    def loss():
        out, _ = net.forward(x)
        return softmax_cross_entropy(out, labels)[0]

    errors = {}
    for li, group in enumerate(net.params):
        for pi, p in enumerate(group):
            flat = p.reshape(-1)
            idx = np.arange(flat.size)
            if max_entries is not None and flat.size > max_entries:
                idx = np.sort(rng.choice(flat.size, size=max_entries, replace=False))
            numeric = np.empty(idx.size)
            for j, k in enumerate(idx):
                old = flat[k]
                flat[k] = old + h
                up = loss()
                flat[k] = old - h
                down = loss()
                flat[k] = old
                numeric[j] = (up - down) / (2 * h)
            analytic = grads[li][pi].reshape(-1)[idx]
            scale = max(np.linalg.norm(analytic), np.linalg.norm(numeric), 1e-300)
            errors[(li, pi)] = float(np.linalg.norm(analytic - numeric) / scale)
    return errors
