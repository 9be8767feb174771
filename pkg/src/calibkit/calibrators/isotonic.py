"""Isotonic calibrators: PAVA, the pooled multi-class map (IRM),
one-vs-all isotonic regression (IROvA) and its composition with TS."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import DimensionError, EmptyData, NumericError
from ..simplex import LabeledDataset, apply_accuracy_preserving, as_probs
from .temperature import TemperatureMap, apply_temperature, fit_temperature

#: Slope added to the fitted step function to make it strictly increasing.
DEFAULT_EPS = 1e-8


def pava_levels(values, weights=None) -> np.ndarray:
    """Weighted isotonic least-squares fit of an ordered sequence.

    Pool-adjacent-violators with a block stack; O(n).
    """
    y = np.asarray(values, dtype=float)
    if y.size == 0:
        raise EmptyData("PAVA needs at least one value")
    w = np.ones_like(y) if weights is None else np.asarray(weights, dtype=float)
    if w.shape != y.shape or np.any(w <= 0):
        raise NumericError("weights must be positive and match values")

    means, wsum, sizes = [], [], []
    for yi, wi in zip(y, w):
        m, ws, sz = yi, wi, 1
        while means and means[-1] > m:
            pm, pw, ps = means.pop(), wsum.pop(), sizes.pop()
            m = (pm * pw + m * ws) / (pw + ws)
            ws += pw
            sz += ps
        means.append(m)
        wsum.append(ws)
        sizes.append(sz)
    return np.repeat(means, sizes)


@dataclass(frozen=True, eq=False)
class IsotonicFn:
    """Nondecreasing step function plus a strictness slope.

    Evaluates to ``levels[j] + eps * a`` where ``j`` is the last breakpoint
    at or below ``a`` (the first level below the support). ``eps == 0``
    gives the plain, non-strict fit used by IROvA.
    """

    breakpoints: np.ndarray
    levels: np.ndarray
    eps: float = 0.0
    counts: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        bp = np.asarray(self.breakpoints, dtype=float)
        lv = np.asarray(self.levels, dtype=float)
        if bp.ndim != 1 or bp.shape != lv.shape or bp.size == 0:
            raise EmptyData("breakpoints and levels must be non-empty and aligned")
        if np.any(np.diff(bp) <= 0):
            raise NumericError("breakpoints must be strictly increasing")
        if np.any(np.diff(lv) < 0):
            raise NumericError("levels must be nondecreasing")
        if self.eps < 0:
            raise NumericError("eps must be nonnegative")
        for name, val in (("breakpoints", bp), ("levels", lv)):
            val.setflags(write=False)
            object.__setattr__(self, name, val)
        object.__setattr__(self, "eps", float(self.eps))

    def step(self, a) -> np.ndarray:
        a = np.asarray(a, dtype=float)
        idx = np.searchsorted(self.breakpoints, a, side="right") - 1
        return self.levels[np.clip(idx, 0, None)]

    def __call__(self, a):
        a = np.asarray(a, dtype=float)
        return self.step(a) + self.eps * a

    def __eq__(self, other):
        if not isinstance(other, IsotonicFn):
            return NotImplemented
        return (np.array_equal(self.breakpoints, other.breakpoints)
                and np.array_equal(self.levels, other.levels)
                and self.eps == other.eps)


def pava(values, weights=None, keys=None) -> IsotonicFn:
    """Fit an isotonic step function to ``values`` ordered by ``keys``.

    ``keys`` default to ``0, 1, ..., n-1``. Entries sharing a key are
    pooled to their weighted mean before PAVA runs, since a function can
    take only one value per key.
    """
    y = np.asarray(values, dtype=float)
    if y.size == 0:
        raise EmptyData("PAVA needs at least one value")
    w = np.ones_like(y) if weights is None else np.asarray(weights, dtype=float)
    x = np.arange(y.size, dtype=float) if keys is None else np.asarray(keys, dtype=float)
    if np.any(np.diff(x) < 0):
        raise NumericError("keys must be sorted ascending")
    ux, inv = np.unique(x, return_inverse=True)
    wsum = np.bincount(inv, weights=w)
    ysum = np.bincount(inv, weights=w * y)
    return IsotonicFn(ux, pava_levels(ysum / wsum, wsum), 0.0, counts=wsum)


def fit_isotonic(keys, values, eps: float = 0.0) -> IsotonicFn:
    """Stable-sort ``(keys, values)`` by key and run :func:`pava`."""
    keys = np.asarray(keys, dtype=float).ravel()
    values = np.asarray(values, dtype=float).ravel()
    order = np.argsort(keys, kind="stable")
    fn = pava(values[order], keys=keys[order])
    return IsotonicFn(fn.breakpoints, fn.levels, eps, counts=fn.counts)


@dataclass(frozen=True)
class IrmMap:
    """Accuracy-preserving map built from one pooled isotonic function."""

    g: IsotonicFn

    kind = "irm"

    def __call__(self, z) -> np.ndarray:
        return apply_irm(z, self.g)


def fit_irm(data: LabeledDataset, eps: float = DEFAULT_EPS) -> IrmMap:
    """Pool all ``n * L`` prediction/label entries into one isotonic fit."""
    if not eps > 0:
        raise NumericError("IRM needs a positive strictness slope")
    return IrmMap(fit_isotonic(data.probs.ravel(), data.onehot().ravel(), eps))


def apply_irm(z, g) -> np.ndarray:
    if isinstance(g, IrmMap):
        g = g.g
    return apply_accuracy_preserving(g, as_probs(z))


@dataclass(frozen=True)
class IrovaMap:
    per_class: tuple

    kind = "irova"

    def __post_init__(self):
        object.__setattr__(self, "per_class", tuple(self.per_class))
        if len(self.per_class) < 2:
            raise DimensionError("IROvA needs one function per class (L >= 2)")

    @property
    def n_classes(self) -> int:
        return len(self.per_class)

    def __call__(self, z) -> np.ndarray:
        return apply_irova(z, self)


def fit_irova(data: LabeledDataset) -> IrovaMap:
    """Independent isotonic fit of ``y_l`` against ``z_l`` for every class."""
    onehot = data.onehot()
    return IrovaMap(tuple(
        fit_isotonic(data.probs[:, l], onehot[:, l]) for l in range(data.n_classes)
    ))


def apply_irova(z, m: IrovaMap) -> np.ndarray:
    """Per-class isotonic outputs, renormalized; all-zero rows become uniform."""
    z = as_probs(z)
    if z.shape[-1] != m.n_classes:
        raise DimensionError(f"map has {m.n_classes} classes, data has {z.shape[-1]}")
    raw = np.stack([fn(z[..., l]) for l, fn in enumerate(m.per_class)], axis=-1)
    total = raw.sum(axis=-1, keepdims=True)
    L = z.shape[-1]
    with np.errstate(invalid="ignore", divide="ignore"):
        out = raw / total
    return np.where(total > 0, out, 1.0 / L)


@dataclass(frozen=True)
class ComposedMap:
    """``outer(inner(z))``; IROvA-TS when outer is an :class:`IrovaMap`."""

    inner: TemperatureMap
    outer: object

    kind = "irova-ts"

    def __call__(self, z) -> np.ndarray:
        return self.outer(self.inner(z))


def fit_composed(data: LabeledDataset) -> ComposedMap:
    if data.n < 3:
        raise EmptyData("composition fit needs at least three samples")
    inner = fit_temperature(data)
    shifted = data.with_probs(apply_temperature(data.probs, inner.t))
    return ComposedMap(inner, fit_irova(shifted))


@dataclass(frozen=True)
class IdentityMap:
    kind = "identity"

    def __call__(self, z) -> np.ndarray:
        return as_probs(z)
