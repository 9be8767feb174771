"""Accuracy-preserving calibration maps and kernel-based calibration-error
estimation for probabilistic classifiers."""

from . import calibrators, ece, simplex, synthetic
from .calibrators import (
    ComposedMap,
    EtsMap,
    IdentityMap,
    IrmMap,
    IrovaMap,
    IsotonicFn,
    TemperatureMap,
    fit_composed,
    fit_ets,
    fit_irm,
    fit_irova,
    fit_temperature,
    pava,
)
from .ece import (
    EceEstimate,
    HistogramScheme,
    KdeConfig,
    bandwidth_rot,
    calibration_gain,
    histogram_ece,
    kde_density,
    kde_ece,
    kde_pi,
    triweight,
)
from .errors import *  # noqa: F401,F403
from .simplex import (
    BinaryReducedDataset,
    LabeledDataset,
    accuracy,
    argmax_class,
    classwise_reduce,
    normalize,
    top_label_reduce,
)

__version__ = "0.1.0"
