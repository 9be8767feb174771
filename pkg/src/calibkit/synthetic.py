"""Two-Gaussian binary benchmark with a closed-form calibration function.

Labels are a fair coin. Class 0 draws its feature from N(-1, 1), class 1
from N(+1, 1). The classifier under study is the logistic family
``z0 = sigmoid(beta0 + beta1 * x)``; for it the true probability of
class 0 given the prediction is known exactly, so every calibration-error
estimate can be checked against Monte Carlo ground truth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ece import EceEstimate, ground_truth_ece_binary
from .errors import DomainError, NumericError
from .simplex import LabeledDataset

CLAMP = 1e-12

CASE_1 = (0.5, -1.5)  # noticeably miscalibrated
CASE_2 = (0.2, -1.9)  # closer to calibrated
CALIBRATED = (0.0, -2.0)


@dataclass(frozen=True)
class SyntheticClassifier:
    beta0: float
    beta1: float

    def __post_init__(self):
        if self.beta1 == 0 or not math.isfinite(self.beta1):
            raise NumericError("beta1 must be finite and nonzero")


def _sigmoid(s):
    return 0.5 * (1.0 + np.tanh(0.5 * np.asarray(s, dtype=float)))


def predict(x, clf: SyntheticClassifier) -> np.ndarray:
    """Prediction vector(s) ``(z0, 1 - z0)`` for feature value(s) ``x``."""
    z0 = _sigmoid(clf.beta0 + clf.beta1 * np.asarray(x, dtype=float))
    return np.stack([z0, 1.0 - z0], axis=-1)


def posterior(x):
    """Bayes probability of class 0 given the feature: ``1 / (1 + e^{2x})``."""
    return _sigmoid(-2.0 * np.asarray(x, dtype=float))


def canonical_pi(z1, clf: SyntheticClassifier):
    """True probability of class 0 given the classifier reports ``z1``."""
    z1 = np.asarray(z1, dtype=float)
    if np.any(z1 <= 0) or np.any(z1 >= 1):
        raise DomainError("z1 must lie strictly inside (0, 1)")
    # log(1/z - 1) written as log1p(-z) - log(z) for accuracy near 1
    logit_inv = np.log1p(-z1) - np.log(z1)
    out = _sigmoid(2.0 * (clf.beta0 + logit_inv) / clf.beta1)
    return out if out.ndim else float(out)


def sample_features(n: int, rng):
    y = rng.integers(0, 2, size=n)
    x = rng.standard_normal(n) + np.where(y == 0, -1.0, 1.0)
    return x, y


def sample(n: int, clf: SyntheticClassifier, seed=None, return_features: bool = False):
    """Draw ``n`` labelled predictions; deterministic given ``seed``."""
    if n < 1:
        raise NumericError("n must be positive")
    rng = np.random.default_rng(seed)
    x, y = sample_features(n, rng)
    data = LabeledDataset(predict(x, clf), y)
    return (data, x) if return_features else data


def sample_z1(clf: SyntheticClassifier):
    """Sampler of clamped first-class predictions for Monte Carlo use."""

    def draw(n, rng):
        x, _ = sample_features(n, rng)
        return np.clip(predict(x, clf)[:, 0], CLAMP, 1.0 - CLAMP)

    return draw


def ground_truth(clf: SyntheticClassifier, d: int = 1, n_mc: int = 10**6,
                 seed=0) -> EceEstimate:
    """Monte Carlo ``E|z1 - pi(z1)|^d`` under the generative model."""
    return ground_truth_ece_binary(lambda z: canonical_pi(z, clf), sample_z1(clf),
                                   d=d, n_mc=n_mc, seed=seed)


def true_pi(probs, clf: SyntheticClassifier) -> np.ndarray:
    """Full calibration vector ``(pi1, 1 - pi1)`` for binary predictions."""
    z1 = np.clip(np.asarray(probs, dtype=float)[..., 0], CLAMP, 1.0 - CLAMP)
    p = canonical_pi(z1, clf)
    return np.stack([p, 1.0 - p], axis=-1)
