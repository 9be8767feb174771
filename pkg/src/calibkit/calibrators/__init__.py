"""Post-hoc calibration maps on the probability simplex."""

from .isotonic import (
    DEFAULT_EPS,
    ComposedMap,
    IdentityMap,
    IrmMap,
    IrovaMap,
    IsotonicFn,
    apply_irm,
    apply_irova,
    fit_composed,
    fit_irm,
    fit_irova,
    fit_isotonic,
    pava,
    pava_levels,
)
from .simplex_ls import SimplexLSResult, simplex_ls
from .temperature import (
    ETS_MIN_ORDER_WEIGHT,
    EtsMap,
    TemperatureMap,
    apply_ets,
    apply_temperature,
    fit_ets,
    fit_temperature,
    golden_section,
)

FITTERS = {
    "ts": fit_temperature,
    "ets": fit_ets,
    "irm": fit_irm,
    "irova": fit_irova,
    "irova-ts": fit_composed,
}

#: Methods whose maps keep the class ordering (and hence accuracy) intact.
ACCURACY_PRESERVING = frozenset({"identity", "ts", "ets", "irm"})


def fit(method: str, data):
    try:
        fitter = FITTERS[method]
    except KeyError:
        raise ValueError(f"unknown method {method!r}; choose from {sorted(FITTERS)}") from None
    return fitter(data)
