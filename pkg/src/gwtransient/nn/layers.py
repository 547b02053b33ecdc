"""Layer specifications with explicit forward and backward passes.

Each layer is a frozen dataclass that knows its parameter shapes, its
output shape for a given input shape (batch axis excluded), and how to
run forward and backward on a batch.  ``forward`` returns ``(y, cache)``;
``backward`` takes that cache and ``dy`` and returns ``(dx, grads)`` with
``grads`` aligned to the layer's parameter list.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import ClassVar

import numpy as np

from ..errors import DomainError


def _sigmoid(z):
    # Split by sign so neither branch overflows.
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


class Layer:
    kind: ClassVar[str] = ""
    init: ClassVar[str] = "none"

    def param_shapes(self, in_shape):
        return []

    def fan(self, in_shape):
        """(fan_in, fan_out) of the weight tensor, for initialisation."""
        return 0, 0

    def output_shape(self, in_shape):
        return in_shape

    def forward(self, params, x, train=False, rng=None):
        raise NotImplementedError

    def backward(self, params, cache, dy):
        raise NotImplementedError

    def to_dict(self):
        d = {k: v for k, v in self.__dict__.items()}
        d["kind"] = self.kind
        return d


@dataclass(frozen=True)
class Dense(Layer):
    n_in: int
    n_out: int
    kind: ClassVar[str] = "dense"

    def __post_init__(self):
        if self.n_in < 1 or self.n_out < 1:
            raise DomainError("Dense sizes must be >= 1")

    def param_shapes(self, in_shape):
        return [(self.n_in, self.n_out), (self.n_out,)]

    def fan(self, in_shape):
        return self.n_in, self.n_out

    def output_shape(self, in_shape):
        if in_shape != (self.n_in,):
            raise DomainError(f"Dense expects input shape ({self.n_in},), got {in_shape}")
        return (self.n_out,)

    def forward(self, params, x, train=False, rng=None):
        w, b = params
        return x @ w + b, x

    def backward(self, params, cache, dy):
        w, _ = params
        x = cache
        return dy @ w.T, [x.T @ dy, dy.sum(axis=0)]


@dataclass(frozen=True)
class Conv1D(Layer):
    """Valid (unpadded) 1-D convolution over ``(batch, channels, length)``."""

    in_channels: int
    out_channels: int
    kernel: int
    stride: int = 1
    dilation: int = 1
    kind: ClassVar[str] = "conv1d"

    def __post_init__(self):
        if min(self.in_channels, self.out_channels, self.kernel, self.stride, self.dilation) < 1:
            raise DomainError("Conv1D sizes must be >= 1")

    @property
    def span(self):
        return self.dilation * (self.kernel - 1) + 1

    def param_shapes(self, in_shape):
        return [(self.out_channels, self.in_channels, self.kernel), (self.out_channels,)]

    def fan(self, in_shape):
        return self.in_channels * self.kernel, self.out_channels * self.kernel

    def output_shape(self, in_shape):
        if len(in_shape) != 2 or in_shape[0] != self.in_channels:
            raise DomainError(f"Conv1D expects ({self.in_channels}, length), got {in_shape}")
        n_out = (in_shape[1] - self.span) // self.stride + 1
        if n_out < 1:
            raise DomainError(f"Conv1D kernel span {self.span} exceeds input length {in_shape[1]}")
        return (self.out_channels, n_out)

    def _n_out(self, length):
        return (length - self.span) // self.stride + 1

    def _columns(self, x):
        # cols[b, t, c, k] = x[b, c, t*stride + k*dilation]
        batch, chans, length = x.shape
        n_out = self._n_out(length)
        cols = np.empty((batch, n_out, chans, self.kernel), dtype=x.dtype)
        last = self.stride * (n_out - 1) + 1
        for k in range(self.kernel):
            start = k * self.dilation
            cols[:, :, :, k] = x[:, :, start : start + last : self.stride].transpose(0, 2, 1)
        return cols.reshape(batch, n_out, chans * self.kernel)

    def forward(self, params, x, train=False, rng=None):
        w, b = params
        cols = self._columns(x)
        y = cols @ w.reshape(self.out_channels, -1).T + b  # (batch, n_out, out_channels)
        return y.transpose(0, 2, 1), (cols, x.shape)

    def backward(self, params, cache, dy):
        w, _ = params
        cols, x_shape = cache
        batch, chans, length = x_shape
        dy_t = dy.transpose(0, 2, 1)  # (batch, n_out, out_channels)
        n_out = dy_t.shape[1]
        dw = np.tensordot(dy_t, cols, axes=([0, 1], [0, 1])).reshape(w.shape)
        db = dy_t.sum(axis=(0, 1))
        dcols = (dy_t @ w.reshape(self.out_channels, -1)).reshape(batch, n_out, chans, self.kernel)
        dx = np.zeros(x_shape, dtype=dy.dtype)
        last = self.stride * (n_out - 1) + 1
        for k in range(self.kernel):
            start = k * self.dilation
            dx[:, :, start : start + last : self.stride] += dcols[:, :, :, k].transpose(0, 2, 1)
        return dx, [dw, db]


@dataclass(frozen=True)
class MaxPool1D(Layer):
    """Non-overlapping max pooling; a trailing remainder shorter than ``width`` is dropped."""

    width: int
    kind: ClassVar[str] = "maxpool1d"

    def __post_init__(self):
        if self.width < 1:
            raise DomainError("MaxPool1D width must be >= 1")

    def output_shape(self, in_shape):
        if len(in_shape) != 2 or in_shape[1] < self.width:
            raise DomainError(f"MaxPool1D({self.width}) cannot pool input shape {in_shape}")
        return (in_shape[0], in_shape[1] // self.width)

    def forward(self, params, x, train=False, rng=None):
        batch, chans, length = x.shape
        n_out = length // self.width
        windows = x[:, :, : n_out * self.width].reshape(batch, chans, n_out, self.width)
        arg = windows.argmax(axis=-1)
        y = np.take_along_axis(windows, arg[..., None], axis=-1)[..., 0]
        return y, (arg, x.shape)

    def backward(self, params, cache, dy):
        arg, x_shape = cache
        batch, chans, length = x_shape
        n_out = dy.shape[-1]
        dwin = np.zeros((batch, chans, n_out, self.width), dtype=dy.dtype)
        np.put_along_axis(dwin, arg[..., None], dy[..., None], axis=-1)
        dx = np.zeros(x_shape, dtype=dy.dtype)
        dx[:, :, : n_out * self.width] = dwin.reshape(batch, chans, n_out * self.width)
        return dx, []


@dataclass(frozen=True)
class ReLU(Layer):
    kind: ClassVar[str] = "relu"

    def forward(self, params, x, train=False, rng=None):
        mask = x > 0
        return x * mask, mask

    def backward(self, params, cache, dy):
        return dy * cache, []


@dataclass(frozen=True)
class Tanh(Layer):
    kind: ClassVar[str] = "tanh"

    def forward(self, params, x, train=False, rng=None):
        y = np.tanh(x)
        return y, y

    def backward(self, params, cache, dy):
        return dy * (1.0 - cache**2), []


@dataclass(frozen=True)
class Sigmoid(Layer):
    kind: ClassVar[str] = "sigmoid"

    def forward(self, params, x, train=False, rng=None):
        y = _sigmoid(x)
        return y, y

    def backward(self, params, cache, dy):
        return dy * cache * (1.0 - cache), []


@dataclass(frozen=True)
class Flatten(Layer):
    kind: ClassVar[str] = "flatten"

    def output_shape(self, in_shape):
        return (math.prod(in_shape),)

    def forward(self, params, x, train=False, rng=None):
        return x.reshape(x.shape[0], -1), x.shape

    def backward(self, params, cache, dy):
        return dy.reshape(cache), []


@dataclass(frozen=True)
class Reshape(Layer):
    shape: tuple
    kind: ClassVar[str] = "reshape"

    def __post_init__(self):
        object.__setattr__(self, "shape", tuple(int(s) for s in self.shape))

    def output_shape(self, in_shape):
        if math.prod(in_shape) != math.prod(self.shape):
            raise DomainError(f"cannot reshape {in_shape} to {self.shape}")
        return self.shape

    def forward(self, params, x, train=False, rng=None):
        return x.reshape((x.shape[0],) + self.shape), x.shape

    def backward(self, params, cache, dy):
        return dy.reshape(cache), []

    def to_dict(self):
        return {"kind": self.kind, "shape": list(self.shape)}


@dataclass(frozen=True)
class Dropout(Layer):
    """Inverted dropout; identity outside training."""

    rate: float
    kind: ClassVar[str] = "dropout"

    def __post_init__(self):
        if not 0.0 <= self.rate < 1.0:
            raise DomainError(f"dropout rate must lie in [0, 1), got {self.rate}")

    def forward(self, params, x, train=False, rng=None):
        if not train or self.rate == 0.0:
            return x, None
        if rng is None:
            raise DomainError("Dropout in training mode needs an rng")
        mask = (rng.random(x.shape) >= self.rate) / (1.0 - self.rate)
        return x * mask, mask

    def backward(self, params, cache, dy):
        return (dy if cache is None else dy * cache), []


@dataclass(frozen=True)
class BiLSTM(Layer):
    """Bidirectional LSTM over ``(batch, steps, features)``.

    Emits the concatenation of the forward direction's last hidden state
    and the backward direction's last hidden state (which has read the
    sequence from the end back to step 0): shape ``(batch, 2*hidden)``.
    Gate order within the ``4*hidden`` block is input, forget, cell, output.
    Parameters per direction: ``W`` of shape ``(features + hidden, 4*hidden)``
    and ``b`` of shape ``(4*hidden,)``.
    """

    input_size: int
    hidden_size: int
    kind: ClassVar[str] = "bilstm"

    def __post_init__(self):
        if self.input_size < 1 or self.hidden_size < 1:
            raise DomainError("BiLSTM sizes must be >= 1")

    def param_shapes(self, in_shape):
        w = (self.input_size + self.hidden_size, 4 * self.hidden_size)
        b = (4 * self.hidden_size,)
        return [w, b, w, b]

    def fan(self, in_shape):
        return self.input_size + self.hidden_size, 4 * self.hidden_size

    def output_shape(self, in_shape):
        if len(in_shape) != 2 or in_shape[1] != self.input_size:
            raise DomainError(f"BiLSTM expects (steps, {self.input_size}), got {in_shape}")
        return (2 * self.hidden_size,)

    def _run(self, w, b, x):
        batch, steps, _ = x.shape
        h_size = self.hidden_size
        h = np.zeros((batch, h_size), dtype=x.dtype)
        c = np.zeros((batch, h_size), dtype=x.dtype)
        wx, wh = w[: self.input_size], w[self.input_size :]
        pre_x = x @ wx + b  # input contribution for every step at once
        steps_cache = []
        for t in range(steps):
            z = pre_x[:, t] + h @ wh
            i = _sigmoid(z[:, :h_size])
            f = _sigmoid(z[:, h_size : 2 * h_size])
            g = np.tanh(z[:, 2 * h_size : 3 * h_size])
            o = _sigmoid(z[:, 3 * h_size :])
            c_prev, h_prev = c, h
            c = f * c_prev + i * g
            tc = np.tanh(c)
            h = o * tc
            steps_cache.append((i, f, g, o, c_prev, h_prev, tc))
        return h, steps_cache

    def _unroll_back(self, w, x, steps_cache, dh):
        h_size = self.hidden_size
        wx, wh = w[: self.input_size], w[self.input_size :]
        batch, steps, _ = x.shape
        dz_all = np.empty((batch, steps, 4 * h_size), dtype=dh.dtype)
        dc = np.zeros_like(dh)
        dwh = np.zeros_like(wh)
        for t in range(steps - 1, -1, -1):
            i, f, g, o, c_prev, h_prev, tc = steps_cache[t]
            do = dh * tc
            dc = dc + dh * o * (1.0 - tc**2)
            di = dc * g
            dg = dc * i
            df = dc * c_prev
            dz = dz_all[:, t]
            dz[:, :h_size] = di * i * (1.0 - i)
            dz[:, h_size : 2 * h_size] = df * f * (1.0 - f)
            dz[:, 2 * h_size : 3 * h_size] = dg * (1.0 - g**2)
            dz[:, 3 * h_size :] = do * o * (1.0 - o)
            dwh += h_prev.T @ dz
            dh = dz @ wh.T
            dc = dc * f
        flat_dz = dz_all.reshape(batch * steps, -1)
        dwx = x.reshape(batch * steps, -1).T @ flat_dz
        db = flat_dz.sum(axis=0)
        dx = dz_all @ wx.T
        return dx, np.vstack([dwx, dwh]), db

    def forward(self, params, x, train=False, rng=None):
        wf, bf, wb, bb = params
        xr = x[:, ::-1]
        hf, cache_f = self._run(wf, bf, x)
        hb, cache_b = self._run(wb, bb, xr)
        return np.concatenate([hf, hb], axis=1), (x, xr, cache_f, cache_b)

    def backward(self, params, cache, dy):
        wf, _, wb, _ = params
        x, xr, cache_f, cache_b = cache
        h_size = self.hidden_size
        dxf, dwf, dbf = self._unroll_back(wf, x, cache_f, dy[:, :h_size])
        dxb, dwb, dbb = self._unroll_back(wb, xr, cache_b, dy[:, h_size:])
        return dxf + dxb[:, ::-1], [dwf, dbf, dwb, dbb]


LAYER_TYPES = {
    cls.kind: cls for cls in (Dense, Conv1D, MaxPool1D, ReLU, Tanh, Sigmoid, Flatten, Reshape, Dropout, BiLSTM)
}


def layer_from_dict(d):
    d = dict(d)
    kind = d.pop("kind")
    try:
        cls = LAYER_TYPES[kind]
    except KeyError:
        raise DomainError(f"unknown layer kind {kind!r}") from None
    return cls(**d)
