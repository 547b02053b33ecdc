"""Unsupervised preprocessing: total-variation denoising, PCA, Haar wavelets."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

FEATURE_KINDS = ("none", "tv", "pca", "dwt")
DEFAULT_PCA_COMPONENTS = 64
DEFAULT_TV_LAMBDA = 0.5
DEFAULT_DWT_LEVELS = 5


def tv_denoise(x, lam):
    """Exact minimiser of ``0.5*||y - x||^2 + lam * sum|y[i+1] - y[i]|``.

    Direct (non-iterative) taut-string style algorithm of L. Condat (2013),
    linear time in practice.
    """
    x = np.asarray(x, dtype=float)
    if lam < 0:
        raise DomainError(f"lambda must be non-negative, got {lam}")
    n = x.size
    if n == 0:
        return x.copy()
    if lam == 0:
        return x.copy()
    y = np.empty(n)
    xs = x.tolist()
    k = k0 = kplus = kminus = 0
    umin, umax = lam, -lam
    vmin, vmax = xs[0] - lam, xs[0] + lam
    twolam = 2.0 * lam
    while True:
        while k == n - 1:
            if umin < 0.0:
                while True:
                    y[k0] = vmin
                    k0 += 1
                    if k0 > kminus:
                        break
                k = kminus = k0
                vmin = xs[k0]
                umin = lam
                umax = vmin + umin - vmax
            elif umax > 0.0:
                while True:
                    y[k0] = vmax
                    k0 += 1
                    if k0 > kplus:
                        break
                k = kplus = k0
                vmax = xs[k0]
                umax = -lam
                umin = vmax + umax - vmin
            else:
                vmin += umin / (k - k0 + 1)
                y[k0 : k + 1] = vmin
                return y
        umin += xs[k + 1] - vmin
        if umin < -lam:
            while True:
                y[k0] = vmin
                k0 += 1
                if k0 > kminus:
                    break
            k = kplus = kminus = k0
            vmin = xs[k0]
            vmax = vmin + twolam
            umin, umax = lam, -lam
            continue
        umax += xs[k + 1] - vmax
        if umax > lam:
            while True:
                y[k0] = vmax
                k0 += 1
                if k0 > kplus:
                    break
            k = kplus = kminus = k0
            vmax = xs[k0]
            vmin = vmax - twolam
            umin, umax = lam, -lam
            continue
        k += 1
        if umin >= lam:
            kminus = k
            vmin += (umin - lam) / (kminus - k0 + 1)
            umin = lam
        if umax <= -lam:
            kplus = k
            vmax += (umax + lam) / (kplus - k0 + 1)
            umax = -lam


def tv_objective(y, x, lam):
    y = np.asarray(y, dtype=float)
    return 0.5 * np.sum((y - x) ** 2) + lam * np.sum(np.abs(np.diff(y)))


# --- PCA ---------------------------------------------------------------------


@dataclass(frozen=True)
class PcaModel:
    mean: np.ndarray
    components: np.ndarray  # (k, n_features), rows orthonormal
    explained_variance: np.ndarray

    @property
    def k(self):
        return self.components.shape[0]


def pca_fit(X, k):
    """Top-``k`` eigenpairs of the sample covariance of the rows of ``X``.

    Each component is signed so that its largest-magnitude entry is positive.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] < 2:
        raise DomainError("PCA needs a 2-D matrix with at least two rows")
    rows, cols = X.shape
    if not 1 <= k <= min(rows, cols):
        raise DomainError(f"k must lie in [1, {min(rows, cols)}], got {k}")
    mean = X.mean(axis=0)
    centered = X - mean
    cov = centered.T @ centered / (rows - 1)
    values, vectors = np.linalg.eigh(cov)
    order = np.argsort(values)[::-1][:k]
    values = np.clip(values[order], 0.0, None)
    comps = vectors[:, order].T.copy()
    lead = np.argmax(np.abs(comps), axis=1)
    signs = np.sign(comps[np.arange(k), lead])
    comps *= signs[:, None]
    return PcaModel(mean, comps, values)


def pca_project(model, x):
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != model.mean.size:
        raise DomainError(f"expected {model.mean.size} features, got {x.shape[-1]}")
    return (x - model.mean) @ model.components.T


def pca_reconstruct(model, coeffs):
    return np.asarray(coeffs) @ model.components + model.mean


# --- Haar wavelets -----------------------------------------------------------

_INV_SQRT2 = 1.0 / np.sqrt(2.0)


@dataclass(frozen=True)
class WaveletCoeffs:
    approximation: np.ndarray
    details: list  # finest level first
    levels: int

    def concatenated(self):
        """Coarse-to-fine layout: approximation, then details from coarsest to finest."""
        return np.concatenate([self.approximation] + self.details[::-1], axis=-1)


def haar_dwt(x, levels):
    """Orthonormal multilevel Haar analysis along the last axis."""
    a = np.asarray(x, dtype=float)
    n = a.shape[-1]
    if levels < 0 or (levels and n % (1 << levels)):
        raise DomainError(f"length {n} is not divisible by 2**{levels}")
    details = []
    for _ in range(levels):
        even, odd = a[..., 0::2], a[..., 1::2]
        details.append((even - odd) * _INV_SQRT2)
        a = (even + odd) * _INV_SQRT2
    return WaveletCoeffs(a, details, levels)


def haar_idwt(c):
    a = c.approximation
    for d in reversed(c.details):
        out = np.empty(a.shape[:-1] + (2 * a.shape[-1],))
        out[..., 0::2] = (a + d) * _INV_SQRT2
        out[..., 1::2] = (a - d) * _INV_SQRT2
        a = out
    return a


# --- pipelines ---------------------------------------------------------------


@dataclass
class FeaturePipeline:
    """A fitted preprocessing stage applied to every example before a classifier."""

    kind: str = "none"
    tv_lambda: float = DEFAULT_TV_LAMBDA
    dwt_levels: int = DEFAULT_DWT_LEVELS
    pca_components: int = DEFAULT_PCA_COMPONENTS
    pca: PcaModel | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in FEATURE_KINDS:
            raise DomainError(f"unknown feature kind {self.kind!r}; choose from {', '.join(FEATURE_KINDS)}")

    def fit(self, X):
        if self.kind == "pca":
            self.pca = pca_fit(X, self.pca_components)
        return self

    def transform(self, X):
        X = np.asarray(X)
        if self.kind == "none":
            return X
        if self.kind == "tv":
            return np.stack([tv_denoise(row, self.tv_lambda) for row in X]) if len(X) else X.astype(float)
        if self.kind == "dwt":
            return haar_dwt(X, self.dwt_levels).concatenated()
        if self.pca is None:
            raise DomainError("PCA pipeline used before fit")
        return pca_project(self.pca, X)

    def output_width(self, width):
        return self.pca.k if self.kind == "pca" else width

    def describe(self):
        return {
            "kind": self.kind,
            "tv_lambda": self.tv_lambda,
            "dwt_levels": self.dwt_levels,
            "pca_components": self.pca_components,
        }

    def arrays(self):
        if self.kind == "pca":
            return {"pca_mean": self.pca.mean, "pca_components": self.pca.components,
                    "pca_variance": self.pca.explained_variance}
        return {}

    @classmethod
    def restore(cls, desc, arrays):
        pipe = cls(**desc)
        if pipe.kind == "pca":
            pipe.pca = PcaModel(arrays["pca_mean"], arrays["pca_components"], arrays["pca_variance"])
        return pipe
