"""Independent reference implementations used as test oracles.

Everything here is written with scalar ``math``/``cmath`` loops or textbook
algorithms so that it shares no code path with the package under test.
"""

import cmath
import math

import numpy as np


def direct_waveform(kind, params, n, rate, t0):
    """Closed-form burst evaluated one sample at a time (no peak normalisation)."""
    out = []
    for i in range(n):
        d = i / rate - t0
        if kind == "gaussian":
            v = math.exp(-(d * d) / params["tau"] ** 2)
        elif kind == "sine_gaussian":
            v = math.exp(-(d * d) / params["tau"] ** 2) * math.sin(2 * math.pi * params["f0"] * d)
        elif kind == "ringdown":
            v = math.exp(-d / params["tau"]) * math.cos(2 * math.pi * params["f0"] * d) if d >= 0 else 0.0
        elif kind == "csg":
            tau, alpha, f0 = params["tau"], params["alpha"], params["f0"]
            z = -(1 - 1j * alpha) * d * d / (4 * tau * tau) + 2j * math.pi * d * f0
            v = (cmath.exp(z) / (2 * math.pi * tau * tau) ** 0.25).real
        else:
            raise ValueError(kind)
        out.append(v)
    return np.array(out)


def jacobi_eigh(a, tol=1e-14, max_sweeps=100):
    """Cyclic Jacobi eigensolver for a symmetric matrix; returns (values, vectors)."""
    a = np.array(a, dtype=float)
    n = a.shape[0]
    v = np.eye(n)
    for _ in range(max_sweeps):
        off = math.sqrt(sum(a[p, q] ** 2 for p in range(n) for q in range(n) if p != q))
        if off < tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if abs(a[p, q]) < 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2 * a[p, q])
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1))
                c = 1 / math.sqrt(t * t + 1)
                s = t * c
                for k in range(n):
                    akp, akq = a[k, p], a[k, q]
                    a[k, p] = c * akp - s * akq
                    a[k, q] = s * akp + c * akq
                for k in range(n):
                    apk, aqk = a[p, k], a[q, k]
                    a[p, k] = c * apk - s * aqk
                    a[q, k] = s * apk + c * aqk
                for k in range(n):
                    vkp, vkq = v[k, p], v[k, q]
                    v[k, p] = c * vkp - s * vkq
                    v[k, q] = s * vkp + c * vkq
    return np.diag(a).copy(), v


def lu_solve(a, b):
    """Doolittle LU with partial pivoting, written out by hand."""
    a = np.array(a, dtype=float)
    b = np.array(b, dtype=float)
    n = a.shape[0]
    perm = list(range(n))
    for k in range(n):
        piv = max(range(k, n), key=lambda r: abs(a[r, k]))
        if piv != k:
            a[[k, piv]] = a[[piv, k]]
            perm[k], perm[piv] = perm[piv], perm[k]
        for r in range(k + 1, n):
            a[r, k] /= a[k, k]
            a[r, k + 1 :] -= a[r, k] * a[k, k + 1 :]
    y = b[perm].copy()
    for r in range(n):
        y[r] -= a[r, :r] @ y[:r]
    for r in range(n - 1, -1, -1):
        y[r] = (y[r] - a[r, r + 1 :] @ y[r + 1 :]) / a[r, r]
    return y


def naive_conv1d(x, w, b, stride=1, dilation=1):
    """x: (batch, c_in, length); w: (c_out, c_in, k). Valid cross-correlation."""
    batch, c_in, length = x.shape
    c_out, _, k = w.shape
    span = (k - 1) * dilation + 1
    out_len = (length - span) // stride + 1
    y = np.zeros((batch, c_out, out_len))
    for n in range(batch):
        for o in range(c_out):
            for t in range(out_len):
                acc = b[o]
                for c in range(c_in):
                    for j in range(k):
                        acc += x[n, c, t * stride + j * dilation] * w[o, c, j]
                y[n, o, t] = acc
    return y


def gini_by_hand(labels):
    n = len(labels)
    if n == 0:
        return 0.0
    return 1.0 - sum((labels.count(c) / n) ** 2 for c in set(labels))


def perceptron_separates(X, y, epochs=1000):
    """True when a plain perceptron finds a separating hyperplane for labels in {0, 1}."""
    w = np.zeros(X.shape[1] + 1)
    Xa = np.hstack([X, np.ones((len(X), 1))])
    s = np.where(y == 1, 1.0, -1.0)
    for _ in range(epochs):
        mistakes = 0
        for xi, si in zip(Xa, s):
            if si * (xi @ w) <= 0:
                w += si * xi
                mistakes += 1
        if mistakes == 0:
            return True
    return False
