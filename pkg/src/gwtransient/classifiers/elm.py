"""Extreme learning machine: fixed random tanh layer plus a ridge readout."""

from __future__ import annotations

import time

import numpy as np
import scipy.linalg

from ..errors import DomainError, NumericalError
from ..seeding import rng_for
from ..waveforms import N_CLASSES
from .base import TrainReport, TrainedModel, argmax_lowest, as_xy

_CHUNK = 2048


class ElmScorer:
    def __init__(self, w_in, b_in, w_out):
        self.w_in = w_in
        self.b_in = b_in
        self.w_out = w_out

    def hidden(self, Z):
        return np.tanh(np.asarray(Z, dtype=float) @ self.w_in + self.b_in)

    def scores(self, Z):
        Z = np.asarray(Z, dtype=float)
        out = np.empty((len(Z), self.w_out.shape[1]))
        for start in range(0, len(Z), _CHUNK):
            out[start : start + _CHUNK] = self.hidden(Z[start : start + _CHUNK]) @ self.w_out
        return out


def random_projection(width, hidden, rng):
    """Input weights scaled so unit-variance inputs give unit-variance pre-activations."""
    w = rng.uniform(-1.0, 1.0, size=(width, hidden)) * np.sqrt(3.0 / width)
    b = rng.uniform(-1.0, 1.0, size=hidden)
    return w, b


def _solve_normal(gram, rhs, ridge):
    gram = gram.copy()
    gram[np.diag_indices_from(gram)] += ridge
    try:
        return scipy.linalg.solve(gram, rhs, assume_a="pos")
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
        raise NumericalError(f"ELM readout system is singular: {exc}") from None


def ridge_readout(H, Y, ridge):
    """Solve ``(H^T H + ridge I) W = H^T Y`` by Cholesky factorisation."""
    return _solve_normal(H.T @ H, H.T @ Y, ridge)


def train_elm(spec, train, features=None):
    from ..features import FeaturePipeline

    if spec.kind != "elm":
        raise DomainError(f"train_elm needs an elm spec, got {spec.kind!r}")
    X_raw, y = as_xy(train)
    start = time.perf_counter()
    features = features or FeaturePipeline()
    features.fit(X_raw)
    X = np.asarray(features.transform(X_raw), dtype=float)
    n, width = X.shape

    w_in, b_in = random_projection(width, spec.hidden, rng_for(spec.seed, 1))
    scorer = ElmScorer(w_in, b_in, None)
    targets = np.zeros((n, N_CLASSES))
    targets[np.arange(n), y] = 1.0

    if n < spec.hidden:
        # Fewer rows than hidden units: the dual system (H H^T + ridge I) A = Y
        # with W = H^T A is the same solution at n x n cost.
        H = scorer.hidden(X)
        scorer.w_out = H.T @ _solve_normal(H @ H.T, targets, spec.ridge)
    else:
        # Normal equations accumulated in row chunks so H is never held whole.
        gram = np.zeros((spec.hidden, spec.hidden))
        rhs = np.zeros((spec.hidden, N_CLASSES))
        for s in range(0, n, _CHUNK):
            H = scorer.hidden(X[s : s + _CHUNK])
            gram += H.T @ H
            rhs += H.T @ targets[s : s + _CHUNK]
        scorer.w_out = _solve_normal(gram, rhs, spec.ridge)
    # C order so a reloaded model multiplies through the same BLAS path
    scorer.w_out = np.ascontiguousarray(scorer.w_out)
    wall = time.perf_counter() - start

    model = TrainedModel(spec=spec, n_features=X_raw.shape[1], payload=scorer, features=features)
    train_acc = 100.0 * float(np.mean(argmax_lowest(scorer.scores(X)) == y)) if n else None
    return model, TrainReport(spec.display_name, wall, 0, [], train_acc)
