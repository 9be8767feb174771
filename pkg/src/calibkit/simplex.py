"""Prediction vectors, labelled datasets and the accuracy-preserving map.

Predictions are plain float arrays whose last axis runs over the ``L``
classes. A single prediction is shape ``(L,)``; a batch is ``(n, L)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DegenerateVector, EmptyData, InvalidClass

#: Inputs whose entries sum to within this of 1 are silently renormalized.
SIMPLEX_TOL = 1e-6


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


def normalize(raw) -> np.ndarray:
    """Scale nonnegative vectors onto the probability simplex.

    Works along the last axis, so a ``(n, L)`` batch is normalized row by
    row. Rows that already sum to 1 up to a few ulps are returned
    unchanged, which makes ``normalize`` exactly idempotent.

    Raises
    ------
    DegenerateVector
        If any entry is negative or non-finite, if ``L < 2``, or if a row
        sums to zero.
    """
    raw = np.asarray(raw, dtype=float)
    if raw.ndim == 0 or raw.shape[-1] < 2:
        raise DegenerateVector("need at least two classes")
    if not np.all(np.isfinite(raw)) or np.any(raw < 0):
        raise DegenerateVector("entries must be finite and nonnegative")
    total = raw.sum(axis=-1, keepdims=True)
    if np.any(total <= 0):
        raise DegenerateVector("vector sums to zero")
    out = raw / total
    # rows already on the simplex are left bitwise untouched
    done = np.abs(total - 1.0) <= 4 * raw.shape[-1] * np.finfo(float).eps
    return np.where(done, raw, out)


def apply_accuracy_preserving(g: Callable[[np.ndarray], np.ndarray], z) -> np.ndarray:
    """Apply ``g`` entrywise and renormalize.

    ``g`` must be vectorized, nonnegative and strictly increasing on [0, 1];
    the ordering of entries within every row of ``z`` then survives.
    """
    z = np.asarray(z, dtype=float)
    return normalize(np.asarray(g(z), dtype=float))


def argmax_class(z) -> np.ndarray | int:
    """Index of the largest entry; ties go to the smallest index."""
    z = np.asarray(z)
    idx = np.argmax(z, axis=-1)
    return int(idx) if idx.ndim == 0 else idx


def as_probs(z, tol: float = SIMPLEX_TOL) -> np.ndarray:
    """Validate a prediction or batch of predictions.

    Rows summing to within ``tol`` of 1 are renormalized; anything further
    off, negative, above one or non-finite is rejected.
    """
    z = np.asarray(z, dtype=float)
    if z.ndim == 0 or z.shape[-1] < 2:
        raise DegenerateVector("need at least two classes")
    if not np.all(np.isfinite(z)):
        raise DegenerateVector("non-finite probability")
    if np.any(z < 0) or np.any(z > 1):
        raise DegenerateVector("probabilities must lie in [0, 1]")
    if np.any(np.abs(z.sum(axis=-1) - 1.0) > tol):
        raise DegenerateVector("probabilities do not sum to 1")
    return normalize(z)


def one_hot(labels, n_classes: int) -> np.ndarray:
    labels = np.asarray(labels, dtype=int)
    if np.any(labels < 0) or np.any(labels >= n_classes):
        raise InvalidClass(f"label outside [0, {n_classes})")
    return np.eye(n_classes)[labels]


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    """``n`` predictions of shape ``(n, L)`` paired with class indices."""

    probs: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float)
        labels = np.asarray(self.labels)
        if probs.ndim != 2:
            raise DegenerateVector("predictions must be a 2-D array (n, L)")
        if probs.shape[0] == 0:
            raise EmptyData("dataset is empty")
        if labels.ndim == 2:
            # one-hot rows
            if labels.shape != probs.shape or not np.all(
                (labels == 0) | (labels == 1)
            ) or np.any(labels.sum(axis=1) != 1):
                raise InvalidClass("one-hot labels must have exactly one 1 per row")
            labels = labels.argmax(axis=1)
        if labels.shape != (probs.shape[0],):
            raise EmptyData("predictions and labels differ in length")
        if not np.issubdtype(labels.dtype, np.integer):
            if not np.all(labels == np.round(labels)):
                raise InvalidClass("labels must be integers")
        labels = labels.astype(np.int64)
        if np.any(labels < 0) or np.any(labels >= probs.shape[1]):
            raise InvalidClass(f"label outside [0, {probs.shape[1]})")
        object.__setattr__(self, "probs", _freeze(as_probs(probs)))
        object.__setattr__(self, "labels", _freeze(labels))

    @property
    def n(self) -> int:
        return self.probs.shape[0]

    @property
    def n_classes(self) -> int:
        return self.probs.shape[1]

    def onehot(self) -> np.ndarray:
        return one_hot(self.labels, self.n_classes)

    def subset(self, idx) -> "LabeledDataset":
        return LabeledDataset(self.probs[idx], self.labels[idx])

    def with_probs(self, probs) -> "LabeledDataset":
        return LabeledDataset(probs, self.labels)

    def __eq__(self, other):
        if not isinstance(other, LabeledDataset):
            return NotImplemented
        return np.array_equal(self.probs, other.probs) and np.array_equal(
            self.labels, other.labels
        )


@dataclass(frozen=True, eq=False)
class BinaryReducedDataset:
    """One-dimensional (confidence, outcome) pairs.

    ``kind`` is ``"top-label"`` or ``"class-wise"``; for the latter
    ``class_index`` records which class was extracted.
    """

    confidences: np.ndarray
    outcomes: np.ndarray
    kind: str = "class-wise"
    class_index: int | None = None
    n_classes: int | None = None

    def __post_init__(self):
        c = np.asarray(self.confidences, dtype=float)
        o = np.asarray(self.outcomes)
        if c.ndim != 1 or c.shape != o.shape:
            raise EmptyData("confidences and outcomes must be 1-D and equal length")
        if np.any(c < 0) or np.any(c > 1):
            raise DegenerateVector("confidences must lie in [0, 1]")
        if not np.all((o == 0) | (o == 1)):
            raise InvalidClass("outcomes must be 0 or 1")
        if self.kind not in ("top-label", "class-wise"):
            raise ValueError(f"unknown reduction kind {self.kind!r}")
        if self.kind == "top-label" and self.n_classes:
            if np.any(c < 1.0 / self.n_classes - 1e-12):
                raise DegenerateVector("top-label confidence below 1/L")
        object.__setattr__(self, "confidences", _freeze(c))
        object.__setattr__(self, "outcomes", _freeze(o.astype(float)))

    @property
    def n(self) -> int:
        return self.confidences.shape[0]


def top_label_reduce(data: LabeledDataset) -> BinaryReducedDataset:
    pred = argmax_class(data.probs)
    return BinaryReducedDataset(
        data.probs.max(axis=1),
        (pred == data.labels).astype(float),
        kind="top-label",
        n_classes=data.n_classes,
    )


def classwise_reduce(data: LabeledDataset, l: int) -> BinaryReducedDataset:
    if not 0 <= l < data.n_classes:
        raise InvalidClass(f"class {l} outside [0, {data.n_classes})")
    return BinaryReducedDataset(
        data.probs[:, l],
        (data.labels == l).astype(float),
        kind="class-wise",
        class_index=l,
        n_classes=data.n_classes,
    )


def accuracy(data: LabeledDataset, probs=None) -> float:
    """Top-1 accuracy of ``probs`` (defaults to the dataset's own predictions)."""
    probs = data.probs if probs is None else np.asarray(probs)
    return float(np.mean(argmax_class(probs) == data.labels))


def squared_loss(probs, onehot) -> np.ndarray:
    """Per-sample ``||z - y||_2^2``."""
    diff = np.asarray(probs, dtype=float) - np.asarray(onehot, dtype=float)
    return np.sum(diff * diff, axis=-1)
