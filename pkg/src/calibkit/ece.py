"""Calibration-error estimators.

Histogram ECE, a kernel (triweight, mirror-corrected) ECE estimator for
one-dimensional reductions, the squared-loss calibration gain, and a
Monte Carlo ground truth for problems with a known calibration function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidBandwidth, NumericError
from .simplex import BinaryReducedDataset, LabeledDataset, squared_loss

KINDS = ("histogram-equal-width", "histogram-data-dependent", "kde", "ground-truth-mc")
TRIWEIGHT_NORM = 35.0 / 32.0


@dataclass(frozen=True)
class EceEstimate:
    value: float
    d: int
    kind: str
    n_e: int
    detail: float | int | None = None
    stderr: float | None = None

    def __post_init__(self):
        if self.d not in (1, 2):
            raise NumericError("norm order d must be 1 or 2")
        if self.kind not in KINDS:
            raise NumericError(f"unknown estimator kind {self.kind!r}")
        if not self.value >= 0:
            raise NumericError("ECE estimate must be nonnegative")

    def __float__(self):
        return float(self.value)


# -- histogram ---------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class HistogramScheme:
    mode: str
    b: int
    edges: np.ndarray = field(repr=False)

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=float)
        if self.b < 1 or edges.shape != (self.b + 1,):
            raise NumericError("need b >= 1 bins and b + 1 edges")
        if edges[0] != 0.0 or edges[-1] != 1.0 or np.any(np.diff(edges) <= 0):
            raise NumericError("edges must increase strictly from 0 to 1")
        object.__setattr__(self, "edges", edges)

    @classmethod
    def equal_width(cls, b: int = 15) -> "HistogramScheme":
        return cls("equal-width", b, np.linspace(0.0, 1.0, b + 1))

    @classmethod
    def equal_frequency(cls, confidences, b: int | None = None) -> "HistogramScheme":
        """Quantile edges; ``b`` defaults to Sturges' ``ceil(1 + log2 n)``.

        Duplicate quantiles (heavily tied data) collapse, so the realised
        bin count can be smaller than requested.
        """
        c = np.sort(np.asarray(confidences, dtype=float))
        if b is None:
            b = math.ceil(1 + math.log2(c.size))
        inner = np.quantile(c, np.arange(1, b) / b) if b > 1 else np.empty(0)
        inner = np.unique(inner[(inner > 0) & (inner < 1)])
        edges = np.concatenate([[0.0], inner, [1.0]])
        return cls("equal-frequency", edges.size - 1, edges)

    def assign(self, confidences) -> np.ndarray:
        """Bin index per sample: half-open ``[e_i, e_{i+1})``, last bin closed."""
        idx = np.searchsorted(self.edges, confidences, side="right") - 1
        return np.clip(idx, 0, self.b - 1)


def histogram_ece(data: BinaryReducedDataset, d: int = 1,
                  scheme: HistogramScheme | None = None) -> EceEstimate:
    if scheme is None:
        scheme = HistogramScheme.equal_width(15)
    c, o = data.confidences, data.outcomes
    idx = scheme.assign(c)
    counts = np.bincount(idx, minlength=scheme.b)
    conf_sum = np.bincount(idx, weights=c, minlength=scheme.b)
    out_sum = np.bincount(idx, weights=o, minlength=scheme.b)
    full = counts > 0
    gap = np.abs(conf_sum[full] - out_sum[full]) / counts[full]
    value = float(np.sum(counts[full] / data.n * gap ** d))
    kind = ("histogram-equal-width" if scheme.mode == "equal-width"
            else "histogram-data-dependent")
    return EceEstimate(value, d, kind, data.n, scheme.b)


# -- kernel estimator --------------------------------------------------------

@dataclass(frozen=True)
class KdeConfig:
    kernel: str = "triweight"
    h: float | None = None
    grid_points: int = 2048
    boundary: str = "mirror"

    def __post_init__(self):
        if self.kernel != "triweight":
            raise NumericError("only the triweight kernel is supported")
        if self.boundary != "mirror":
            raise NumericError("only mirror boundary correction is supported")
        if self.h is not None and not self.h > 0:
            raise InvalidBandwidth("bandwidth must be positive")
        if self.grid_points < 64:
            raise NumericError("integration grid needs at least 64 points")


def triweight(u, h: float = 1.0):
    """``K_h(u) = (35 / 32h) (1 - (u/h)^2)^3`` on ``|u| <= h``, else 0."""
    if not h > 0:
        raise InvalidBandwidth("bandwidth must be positive")
    r = np.asarray(u, dtype=float) / h
    k = np.where(np.abs(r) <= 1.0, (1.0 - r * r) ** 3, 0.0) * (TRIWEIGHT_NORM / h)
    return k if k.ndim else float(k)


def bandwidth_rot(samples) -> float:
    """Rule-of-thumb bandwidth ``1.06 * std * n ** (-1/5)`` (std with n-1)."""
    x = np.asarray(samples, dtype=float)
    if x.size < 2:
        raise InvalidBandwidth("rule-of-thumb bandwidth needs at least two samples")
    sigma = float(np.std(x, ddof=1))
    # constant samples can leave a round-off std instead of an exact zero
    if not sigma > 0 or np.all(x == x.flat[0]):
        raise InvalidBandwidth("samples have zero spread")
    return 1.06 * sigma * x.size ** -0.2


def _resolve_h(samples, cfg: KdeConfig) -> float:
    return bandwidth_rot(samples) if cfg.h is None else float(cfg.h)


def _mirror_sums(query, samples, weights, h, chunk=2048):
    """Kernel sums at each query point, with images reflected at 0 and 1.

    Returns ``(sum_i K_i(q), sum_i w_i K_i(q))`` using the unit triweight
    (no ``1/h`` factor).
    """
    q = np.asarray(query, dtype=float)[:, None]
    den = np.zeros(q.shape[0])
    num = np.zeros(q.shape[0])
    for start in range(0, samples.size, chunk):
        s = samples[start:start + chunk][None, :]
        w = weights[start:start + chunk]
        k = np.zeros((q.shape[0], s.shape[1]))
        for centre in (s, -s, 2.0 - s):
            r = (q - centre) / h
            np.add(k, np.where(np.abs(r) <= 1.0, (1.0 - r * r) ** 3, 0.0), out=k)
        den += k.sum(axis=1)
        num += k @ w
    return TRIWEIGHT_NORM * den, TRIWEIGHT_NORM * num


def _mirror_sums_grid(grid_points, samples, weights, h):
    """Same as :func:`_mirror_sums` on the uniform grid ``linspace(0, 1, G)``.

    Each kernel touches only the grid points within ``h`` of its centre,
    so contributions are scattered onto that window instead of forming
    the dense grid-by-sample matrix.
    """
    G = grid_points
    step = 1.0 / (G - 1)
    centres = np.concatenate([samples, -samples, 2.0 - samples])
    w = np.concatenate([weights, weights, weights])
    lo = np.clip(np.ceil((centres - h) / step), 0, G - 1).astype(np.int64)
    hi = np.clip(np.floor((centres + h) / step), 0, G - 1).astype(np.int64)
    counts = np.maximum(hi - lo + 1, 0)
    keep = (counts > 0) & (centres + h >= 0) & (centres - h <= 1)
    lo, counts, centres, w = lo[keep], counts[keep], centres[keep], w[keep]
    if counts.size == 0:
        return np.zeros(G), np.zeros(G)
    starts = np.cumsum(counts) - counts
    offsets = np.arange(counts.sum()) - np.repeat(starts, counts)
    idx = np.repeat(lo, counts) + offsets
    r = (idx * step - np.repeat(centres, counts)) / h
    k = np.maximum(1.0 - r * r, 0.0) ** 3
    den = np.bincount(idx, weights=k, minlength=G)
    num = np.bincount(idx, weights=k * np.repeat(w, counts), minlength=G)
    return TRIWEIGHT_NORM * den, TRIWEIGHT_NORM * num


def kde_density(query, samples, cfg: KdeConfig | None = None):
    """Mirror-image kernel density estimate on [0, 1]."""
    cfg = cfg or KdeConfig()
    x = np.asarray(samples, dtype=float)
    h = _resolve_h(x, cfg)
    q = np.atleast_1d(np.asarray(query, dtype=float))
    den, _ = _mirror_sums(q, x, np.zeros_like(x), h)
    p = den / (x.size * h)
    return p if np.ndim(query) else float(p[0])


def kde_pi(query, data: BinaryReducedDataset, cfg: KdeConfig | None = None):
    """Nadaraya-Watson estimate of ``P(outcome = 1 | confidence = q)``.

    Where no kernel mass reaches ``q`` the query itself is returned, so
    the ECE integrand vanishes there.
    """
    cfg = cfg or KdeConfig()
    h = _resolve_h(data.confidences, cfg)
    q = np.atleast_1d(np.asarray(query, dtype=float))
    den, num = _mirror_sums(q, data.confidences, data.outcomes, h)
    with np.errstate(invalid="ignore", divide="ignore"):
        pi = np.where(den > 0, num / den, q)
    pi = np.clip(pi, 0.0, 1.0)
    return pi if np.ndim(query) else float(pi[0])


def kde_ece(data: BinaryReducedDataset, d: int = 1, cfg: KdeConfig | None = None) -> EceEstimate:
    """Trapezoidal integral of ``|q - pi(q)|^d p(q)`` over [0, 1]."""
    cfg = cfg or KdeConfig()
    if d not in (1, 2):
        raise NumericError("norm order d must be 1 or 2")
    if data.n < 2 and cfg.h is None:
        raise InvalidBandwidth("automatic bandwidth needs at least two samples")
    h = _resolve_h(data.confidences, cfg)
    q = np.linspace(0.0, 1.0, cfg.grid_points)
    den, num = _mirror_sums_grid(cfg.grid_points, data.confidences, data.outcomes, h)
    with np.errstate(invalid="ignore", divide="ignore"):
        pi = np.where(den > 0, num / den, q)
    density = den / (data.n * h)
    value = float(np.trapezoid(np.abs(q - pi) ** d * density, q))
    return EceEstimate(max(value, 0.0), d, "kde", data.n, h)


# -- calibration gain and ground truth ---------------------------------------

def calibration_gain(data: LabeledDataset, cmap, return_stderr: bool = False):
    """Mean reduction in squared loss after applying ``cmap``.

    Equals the reduction in ECE^2 for injective (e.g. accuracy-preserving)
    maps; for other maps it is a lower bound.
    """
    y = data.onehot()
    diff = squared_loss(data.probs, y) - squared_loss(cmap(data.probs), y)
    gain = float(np.mean(diff))
    if return_stderr:
        se = float(np.std(diff, ddof=1) / math.sqrt(diff.size)) if diff.size > 1 else 0.0
        return gain, se
    return gain


def ground_truth_ece_binary(pi_fn, sampler, d: int = 1, n_mc: int = 10**6,
                            seed=0) -> EceEstimate:
    """Monte Carlo mean of ``|z1 - pi(z1)|^d`` with its standard error.

    ``sampler(n, rng)`` must return ``n`` draws of the first-class
    prediction under the data-generating process.
    """
    if n_mc < 10**4:
        raise NumericError("ground truth needs n_mc >= 10_000")
    rng = np.random.default_rng(seed)
    z1 = np.asarray(sampler(n_mc, rng), dtype=float)
    dev = np.abs(z1 - pi_fn(z1)) ** d
    se = float(np.std(dev, ddof=1) / math.sqrt(n_mc))
    return EceEstimate(float(np.mean(dev)), d, "ground-truth-mc", n_mc, None, se)
