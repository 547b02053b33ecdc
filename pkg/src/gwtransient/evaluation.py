"""Confusion matrices, accuracy and the training-time benchmark."""

from __future__ import annotations

import csv
import json
import time
import traceback
from dataclasses import dataclass

import numpy as np

from .classifiers import TrainReport, train
from .errors import DomainError, FormatError
from .waveforms import CLASS_NAMES, N_CLASSES, TransientClass

__all__ = [
    "ConfusionMatrix",
    "TrainReport",
    "accuracy",
    "benchmark_training",
    "confusion_matrix",
    "read_confusion_csv",
    "render_table",
    "write_confusion_csv",
    "write_report_json",
]


@dataclass(frozen=True)
class ConfusionMatrix:
    """Counts with rows = true class, columns = predicted class."""

    counts: np.ndarray

    @property
    def total(self):
        return int(self.counts.sum())

    def row_sums(self):
        return self.counts.sum(axis=1)


def confusion_matrix(y_true, y_pred, n_classes=N_CLASSES):
    y_true = np.asarray(y_true, dtype=np.intp)
    y_pred = np.asarray(y_pred, dtype=np.intp)
    if y_true.shape != y_pred.shape or y_true.ndim != 1:
        raise DomainError(f"label vectors differ in shape: {y_true.shape} vs {y_pred.shape}")
    for name, v in (("true", y_true), ("predicted", y_pred)):
        if v.size and (v.min() < 0 or v.max() >= n_classes):
            raise DomainError(f"{name} class code out of range [0, {n_classes - 1}]")
    counts = np.bincount(y_true * n_classes + y_pred, minlength=n_classes * n_classes)
    return ConfusionMatrix(counts.reshape(n_classes, n_classes).astype(np.int64))


def accuracy(cm):
    """Percentage of examples on the diagonal."""
    total = cm.total
    if total == 0:
        raise DomainError("accuracy of an empty confusion matrix is undefined")
    return 100.0 * float(np.trace(cm.counts)) / total


def write_confusion_csv(cm, path):
    names = [CLASS_NAMES[TransientClass(i)] for i in range(cm.counts.shape[0])]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(names)
        for row in cm.counts:
            writer.writerow([int(v) for v in row])


def read_confusion_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise FormatError("empty confusion CSV", line=1)
    k = len(rows[0])
    if len(rows) != k + 1:
        raise FormatError(f"expected {k} count rows after the header, found {len(rows) - 1}", line=len(rows))
    counts = []
    for lineno, row in enumerate(rows[1:], start=2):
        try:
            values = [int(v) for v in row]
        except ValueError:
            raise FormatError("non-integer count", line=lineno) from None
        if len(values) != k or min(values) < 0:
            raise FormatError(f"expected {k} non-negative counts", line=lineno)
        counts.append(values)
    return ConfusionMatrix(np.array(counts, dtype=np.int64)), rows[0]


def write_report_json(reports, path):
    with open(path, "w") as fh:
        json.dump([r.to_json() for r in reports], fh, indent=2)


def render_table(reports):
    """Plain-text table of accuracy and training time, best accuracy first."""
    ordered = sorted(reports, key=lambda r: -(r.accuracy if r.accuracy is not None else -1.0))
    width = max([len("Model")] + [len(r.model) for r in ordered])
    lines = [f"{'Model':<{width}}  {'Accuracy (%)':>12}  {'Train (s)':>10}  {'Epochs':>6}"]
    lines.append("-" * len(lines[0]))
    for r in ordered:
        acc = f"{r.accuracy:12.5f}" if r.accuracy is not None else f"{'failed':>12}"
        lines.append(f"{r.model:<{width}}  {acc}  {r.wall_time:10.2f}  {r.epochs:>6}")
    return "\n".join(lines)


def benchmark_training(specs, train_data, test_data, features=None, log=None):
    """Train each spec in turn, time it, and score it on ``test_data``.

    Returns ``(reports, confusions, table)``; ``confusions`` maps model kind to
    its test ``ConfusionMatrix``.  A model that raises is recorded with an
    ``error`` and no accuracy; the remaining models still run.
    """
    if not specs:
        raise DomainError("benchmark needs at least one model spec")
    reports, confusions = [], {}
    for spec in specs:
        pipeline = features() if callable(features) else None
        try:
            model, report = train(spec, train_data, features=pipeline, log=log)
            pred = model.predict(test_data.x)
            cm = confusion_matrix(test_data.labels, pred)
            report.accuracy = accuracy(cm)
            confusions[spec.kind] = cm
        except Exception as exc:  # recorded per model, never aborts the run
            report = TrainReport(spec.display_name, 0.0, spec.epochs, error=f"{type(exc).__name__}: {exc}")
            if log is not None:
                log(traceback.format_exc())
        reports.append(report)
        if log is not None:
            acc = "failed" if report.accuracy is None else f"{report.accuracy:.3f}%"
            log(f"{report.model}: accuracy {acc}, {report.wall_time:.1f} s")
    return reports, confusions, render_table(reports)


def timed(fn, *args, **kwargs):
    """``(result, seconds)`` using a monotonic clock."""
    start = time.perf_counter()
    out = fn(*args, **kwargs)
    return out, time.perf_counter() - start
