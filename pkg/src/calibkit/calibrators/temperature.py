"""Temperature scaling and its three-component ensemble (ETS)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import EmptyData, NumericError
from ..simplex import LabeledDataset, as_probs, normalize, squared_loss
from .simplex_ls import simplex_ls

T_MIN = 0.01
T_MAX = 100.0
#: Smallest total weight kept on the order-preserving ETS members.
ETS_MIN_ORDER_WEIGHT = 1e-8
INV_PHI = (math.sqrt(5) - 1) / 2


def golden_section(f, lo: float, hi: float, tol: float = 1e-10, max_iter: int = 200):
    """Minimize a unimodal scalar function on ``[lo, hi]``.

    Returns ``(x, f(x))``. The endpoints are also compared so a minimum
    sitting on the boundary is reported exactly.
    """
    a, b = lo, hi
    x1 = b - INV_PHI * (b - a)
    x2 = a + INV_PHI * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - INV_PHI * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + INV_PHI * (b - a)
            f2 = f(x2)
    x, fx = (x1, f1) if f1 <= f2 else (x2, f2)
    for edge in (lo, hi):
        fe = f(edge)
        if fe < fx:
            x, fx = edge, fe
    return x, fx


def apply_temperature(z, t: float) -> np.ndarray:
    """``z ** (1/t)`` renormalized; zero entries stay zero.

    Evaluated relative to the row maximum in log space so extreme
    temperatures cannot underflow the whole row.
    """
    if not t > 0:
        raise NumericError("temperature must be positive")
    z = np.asarray(z, dtype=float)
    if t == 1.0:
        return normalize(z)
    with np.errstate(divide="ignore"):
        logz = np.log(z)
    top = logz.max(axis=-1, keepdims=True)
    return normalize(np.exp((logz - top) / t))


@dataclass(frozen=True)
class TemperatureMap:
    t: float
    degenerate: bool = field(default=False, compare=False)

    kind = "ts"

    def __post_init__(self):
        if not (self.t > 0 and math.isfinite(self.t)):
            raise NumericError("temperature must be positive and finite")

    def __call__(self, z) -> np.ndarray:
        return apply_temperature(z, self.t)


def _ts_loss(probs, onehot):
    def loss(log_t):
        return float(np.sum(squared_loss(apply_temperature(probs, math.exp(log_t)), onehot)))

    return loss


def fit_temperature(data: LabeledDataset, t_min: float = T_MIN, t_max: float = T_MAX,
                    n_scan: int = 41) -> TemperatureMap:
    """Fit the temperature by minimizing the summed squared error.

    A coarse scan over ``log t`` brackets the best cell, golden-section
    search then refines inside it. Data on which the loss does not depend
    on ``t`` (e.g. all predictions uniform), or whose predictions and
    labels are all identical, yield ``t = 1`` flagged degenerate.
    """
    if data.n < 2:
        raise EmptyData("temperature fit needs at least two samples")
    probs, onehot = data.probs, data.onehot()
    if np.all(probs == probs[0]) and np.all(data.labels == data.labels[0]):
        return TemperatureMap(1.0, degenerate=True)

    loss = _ts_loss(probs, onehot)
    grid = np.linspace(math.log(t_min), math.log(t_max), n_scan)
    values = np.array([loss(g) for g in grid])
    if values.max() - values.min() <= 1e-12 * max(1.0, abs(values.min())):
        return TemperatureMap(1.0, degenerate=True)

    i = int(np.argmin(values))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, n_scan - 1)]
    log_t, _ = golden_section(loss, lo, hi, tol=1e-10)
    return TemperatureMap(math.exp(log_t))


@dataclass(frozen=True)
class EtsMap:
    """``w[0] * TS(z; t) + w[1] * z + w[2] / L``."""

    t: float
    w: tuple
    non_unique: bool = field(default=False, compare=False)

    kind = "ets"

    def __post_init__(self):
        w = tuple(float(v) for v in self.w)
        if not self.t > 0:
            raise NumericError("temperature must be positive")
        if len(w) != 3 or min(w) < 0 or abs(sum(w) - 1.0) > 1e-9:
            raise NumericError("ETS weights must be 3 nonnegative numbers summing to 1")
        object.__setattr__(self, "w", w)

    def components(self, z) -> np.ndarray:
        """Stack the three ensemble members along a new last axis."""
        z = np.asarray(z, dtype=float)
        uniform = np.full_like(z, 1.0 / z.shape[-1])
        return np.stack([apply_temperature(z, self.t), z, uniform], axis=-1)

    def __call__(self, z) -> np.ndarray:
        return apply_ets(z, self)


def apply_ets(z, m: EtsMap) -> np.ndarray:
    z = as_probs(z)
    w1, w2, w3 = m.w
    return w1 * apply_temperature(z, m.t) + w2 * z + w3 / z.shape[-1]


def fit_ets(data: LabeledDataset, **kwargs) -> EtsMap:
    """Two-stage fit: temperature first, then exact simplex weights.

    When the weights land on the uniform vertex, ``ETS_MIN_ORDER_WEIGHT``
    is moved onto the identity member so the map stays strictly
    order-preserving.
    """
    if data.n < 3:
        raise EmptyData("ETS fit needs at least three samples")
    ts = fit_temperature(data, **kwargs)
    comps = EtsMap(ts.t, (1.0, 0.0, 0.0)).components(data.probs)
    res = simplex_ls(comps, data.onehot())
    w = np.array(res.w, dtype=float)
    # an all-uniform fit is a constant map, which ties every class
    short = ETS_MIN_ORDER_WEIGHT - (w[0] + w[1])
    if short > 0:
        w[1] += short
        w[2] -= short
    return EtsMap(ts.t, tuple(w), non_unique=res.non_unique)
