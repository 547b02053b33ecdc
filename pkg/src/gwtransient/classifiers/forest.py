"""Random forest of depth-limited CART trees with Gini splits."""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..errors import DomainError
from ..seeding import rng_for, worker_count
from ..waveforms import N_CLASSES
from .base import TrainReport, TrainedModel, argmax_lowest, as_xy


def gini(counts):
    """Gini impurity of class-count vectors along the last axis."""
    counts = np.asarray(counts, dtype=float)
    n = counts.sum(axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        g = 1.0 - np.sum(counts**2, axis=-1) / n**2
    return np.where(n > 0, g, 0.0)


def gini_gain(y, left_mask, n_classes=N_CLASSES):
    """Impurity decrease of splitting labels ``y`` into ``left_mask`` / rest."""
    y = np.asarray(y)
    left_mask = np.asarray(left_mask, dtype=bool)
    total = np.bincount(y, minlength=n_classes)
    left = np.bincount(y[left_mask], minlength=n_classes)
    right = total - left
    n = len(y)
    return float(gini(total) - (left.sum() * gini(left) + right.sum() * gini(right)) / n)


def best_split(X, y, features, n_classes=N_CLASSES):
    """Best Gini split of ``(X, y)`` over candidate ``features``.

    Returns ``(feature, threshold, gain)`` or ``None`` when no feature has
    two distinct values.  Ties are broken by the smallest sorted position,
    then by candidate order.
    """
    m = len(y)
    X = np.asarray(X)
    dtype = X.dtype if X.dtype in (np.float32, np.float64) else np.float64
    vals = np.ascontiguousarray(X[:, features].T, dtype=dtype)  # (f, m); float32 sorts faster
    # Order within runs of equal values is irrelevant: only boundaries between
    # distinct values are candidate thresholds.
    order = np.argsort(vals, axis=1)
    sorted_vals = np.take_along_axis(vals, order, axis=1)
    ys = y[order]
    total = np.bincount(y, minlength=n_classes)
    # Every row of ``ys`` permutes the same labels.  Adding the r-th member of
    # a class raises sum_c left_c^2 by 2r + 1, and sum_c right_c^2 follows from
    # sum_c (T_c - left_c)^2, so two cumulative sums replace a per-class loop.
    by_class = np.argsort(ys, axis=1, kind="stable")
    starts = np.concatenate(([0], np.cumsum(total)[:-1]))
    rank_sorted = np.arange(m) - starts[np.sort(y)]
    rank = np.empty_like(by_class)
    np.put_along_axis(rank, by_class, rank_sorted, axis=1)
    sq_left = np.cumsum(2 * rank + 1, axis=1)
    sq_right = (np.sum(total * total) - 2 * np.cumsum(total[ys], axis=1) + sq_left).astype(float)
    sq_left = sq_left.astype(float)
    total = total.astype(float)
    nl = np.arange(1, m + 1, dtype=float)
    nr = m - nl
    with np.errstate(invalid="ignore", divide="ignore"):
        weighted = (nl - sq_left / nl) + np.where(nr > 0, nr - sq_right / np.where(nr > 0, nr, 1.0), 0.0)
    weighted = weighted[:, :-1].T / m  # (positions, candidates)
    valid = (sorted_vals[:, :-1] < sorted_vals[:, 1:]).T
    if not valid.any():
        return None
    weighted = np.where(valid, weighted, np.inf)
    pos, j = np.unravel_index(np.argmin(weighted), weighted.shape)
    # midpoint in float64 so it lies strictly between two distinct float32 values
    threshold = 0.5 * (float(sorted_vals[j, pos]) + float(sorted_vals[j, pos + 1]))
    gain = float(gini(total) - weighted[pos, j])
    return int(features[j]), float(threshold), gain


@dataclass
class Tree:
    """Node arrays; ``feature == -1`` marks a leaf.  ``value`` holds class counts."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    def leaf_index(self, X):
        node = np.zeros(len(X), dtype=np.intp)
        while True:
            f = self.feature[node]
            internal = f >= 0
            if not internal.any():
                return node
            rows = np.flatnonzero(internal)
            go_left = X[rows, f[rows]].astype(float) <= self.threshold[node[rows]]
            node[rows] = np.where(go_left, self.left[node[rows]], self.right[node[rows]])

    def predict(self, X):
        return argmax_lowest(self.value[self.leaf_index(X)])


def build_tree(X, y, max_depth, rng, n_classes=N_CLASSES, max_features=None, rows=None):
    """Grow one tree on ``X[rows]`` (all rows by default) without copying ``X``."""
    d = X.shape[1]
    rows = np.arange(len(X)) if rows is None else np.asarray(rows, dtype=np.intp)
    max_features = max_features or max(1, int(math.sqrt(d)))
    feature, threshold, left, right, value = [], [], [], [], []

    def new_node(idx):
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(np.bincount(y[idx], minlength=n_classes).astype(float))
        return len(feature) - 1

    stack = [(new_node(rows), rows, 0)]
    while stack:
        node, idx, depth = stack.pop()
        counts = value[node]
        if depth >= max_depth or len(idx) < 2 or np.count_nonzero(counts) <= 1:
            continue
        cand = np.sort(rng.choice(d, size=min(max_features, d), replace=False))
        # only the candidate columns of the node's rows are gathered
        found = best_split(X[np.ix_(idx, cand)], y[idx], np.arange(len(cand)), n_classes)
        if found is None or found[2] <= 0.0:
            continue
        f, thr = int(cand[found[0]]), found[1]
        go_left = X[idx, f].astype(float) <= thr
        li, ri = idx[go_left], idx[~go_left]
        feature[node], threshold[node] = f, thr
        left[node] = new_node(li)
        right[node] = new_node(ri)
        stack.append((right[node], ri, depth + 1))
        stack.append((left[node], li, depth + 1))

    return Tree(
        np.array(feature, dtype=np.intp),
        np.array(threshold, dtype=float),
        np.array(left, dtype=np.intp),
        np.array(right, dtype=np.intp),
        np.array(value, dtype=float).reshape(-1, n_classes),
    )


class ForestScorer:
    """Majority vote of tree predictions; scores are vote counts."""

    def __init__(self, trees, n_classes=N_CLASSES):
        self.trees = trees
        self.n_classes = n_classes

    def scores(self, Z):
        Z = np.asarray(Z, dtype=float)
        votes = np.zeros((len(Z), self.n_classes))
        rows = np.arange(len(Z))
        for tree in self.trees:
            votes[rows, tree.predict(Z)] += 1.0
        return votes


def train_random_forest(spec, train, features=None, threads=None):
    from ..features import FeaturePipeline

    if spec.kind != "rf":
        raise DomainError(f"train_random_forest needs an rf spec, got {spec.kind!r}")
    X_raw, y = as_xy(train)
    start = time.perf_counter()
    features = features or FeaturePipeline()
    features.fit(X_raw)
    X = np.asarray(features.transform(X_raw))
    if X.dtype not in (np.float32, np.float64):
        X = X.astype(float)
    X = np.ascontiguousarray(X)
    n = len(X)

    def grow(t):
        rng = rng_for(spec.seed, 0x5452, t)
        boot = rng.integers(0, n, size=n)
        return build_tree(X, y, spec.max_depth, rng, rows=boot)

    threads = threads or worker_count()
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            trees = list(pool.map(grow, range(spec.trees)))
    else:
        trees = [grow(t) for t in range(spec.trees)]
    wall = time.perf_counter() - start

    scorer = ForestScorer(trees)
    model = TrainedModel(spec=spec, n_features=X_raw.shape[1], payload=scorer, features=features)
    train_acc = 100.0 * float(np.mean(argmax_lowest(scorer.scores(X)) == y)) if n else None
    return model, TrainReport(spec.display_name, wall, 0, [], train_acc)
