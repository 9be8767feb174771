"""Seeded experiment drivers behind the ``bench-estimators`` and
``learning-curve`` subcommands.

Both return long-format rows (one metric per row) sorted deterministically,
so the written CSV depends only on the configuration and seed list.
"""

from __future__ import annotations

import csv
import json
import math
import re
from dataclasses import asdict, dataclass, field

import numpy as np

from . import calibrators, synthetic
from .ece import HistogramScheme, KdeConfig, calibration_gain, histogram_ece, kde_ece
from .errors import ConfigError
from .simplex import LabeledDataset, accuracy, classwise_reduce, top_label_reduce

ESTIMATORS_DEFAULT = ("kde", "hist-eq15", "hist-dd")
METHODS_DEFAULT = ("ts", "ets", "irm", "irova", "irova-ts")
GT_SEED = 20200713
EVAL_SEED = 7


@dataclass
class BenchConfig:
    experiment: str = "estimator-bench"
    seeds: list = field(default_factory=lambda: list(range(200)))
    n_values: list = field(default_factory=lambda: [64, 128, 256, 512, 1024])
    methods: list = field(default_factory=lambda: list(METHODS_DEFAULT))
    estimators: list = field(default_factory=lambda: list(ESTIMATORS_DEFAULT))
    d: int = 1
    beta0: float | None = None
    beta1: float | None = None
    bins: int | None = None
    bandwidth: float | None = None
    grid_points: int = 2048
    n_mc: int = 10**6
    gt_seed: int = GT_SEED
    n_eval: int = 5000
    eval_seed: int = EVAL_SEED
    input: str | None = None
    output: str | None = None

    def __post_init__(self):
        if not self.seeds:
            raise ConfigError("at least one seed is required")
        if any(b <= a for a, b in zip(self.n_values, self.n_values[1:])):
            raise ConfigError("n_values must be strictly increasing")
        if not self.n_values or min(self.n_values) < 1:
            raise ConfigError("n_values must be positive")
        if self.d not in (1, 2):
            raise ConfigError("d must be 1 or 2")

    @property
    def clf(self):
        if self.beta0 is None or self.beta1 is None:
            return None
        return synthetic.SyntheticClassifier(self.beta0, self.beta1)

    def kde(self) -> KdeConfig:
        return KdeConfig(h=self.bandwidth, grid_points=self.grid_points)

    def header(self) -> list[str]:
        doc = asdict(self)
        doc.pop("output", None)
        return [f"# {k}={json.dumps(v)}" for k, v in sorted(doc.items())]


def estimate(name: str, data, d: int, cfg: BenchConfig):
    """Evaluate one named estimator on a reduced dataset."""
    if name == "kde":
        return kde_ece(data, d, cfg.kde())
    if name == "hist-dd":
        return histogram_ece(data, d, HistogramScheme.equal_frequency(data.confidences, cfg.bins))
    m = re.fullmatch(r"hist-eq(\d+)", name)
    if m:
        return histogram_ece(data, d, HistogramScheme.equal_width(int(m.group(1))))
    raise ConfigError(f"unknown estimator {name!r}")


def _seq(*keys) -> np.random.SeedSequence:
    return np.random.SeedSequence([int(k) for k in keys])


def run_estimator_bench(cfg: BenchConfig):
    """Mean absolute ECE estimation error against Monte Carlo ground truth.

    Uses the first-class reduction ``(z_0, y == 0)``, the quantity whose
    ground truth the closed-form calibration function provides.
    Returns ``(header_lines, columns, rows)``.
    """
    clf = cfg.clf
    if clf is None:
        raise ConfigError("estimator bench needs --beta0 and --beta1")
    for name in cfg.estimators:
        if name != "kde" and name != "hist-dd" and not re.fullmatch(r"hist-eq\d+", name):
            raise ConfigError(f"unknown estimator {name!r}")
    gt = synthetic.ground_truth(clf, cfg.d, cfg.n_mc, seed=cfg.gt_seed)

    errors = {(e, n): [] for e in cfg.estimators for n in cfg.n_values}
    values = {(e, n): [] for e in cfg.estimators for n in cfg.n_values}
    for n in cfg.n_values:
        for seed in cfg.seeds:
            data = classwise_reduce(synthetic.sample(n, clf, seed=_seq(seed, n)), 0)
            for name in cfg.estimators:
                v = estimate(name, data, cfg.d, cfg).value
                values[name, n].append(v)
                errors[name, n].append(abs(v - gt.value))

    rows = []
    for name in sorted(cfg.estimators):
        for n in cfg.n_values:
            err = np.array(errors[name, n])
            se = float(np.std(err, ddof=1) / math.sqrt(err.size)) if err.size > 1 else 0.0
            for metric, val in (("mae", float(err.mean())), ("mae_se", se),
                                ("mean_estimate", float(np.mean(values[name, n]))),
                                ("ground_truth", gt.value)):
                rows.append([name, cfg.d, n, len(cfg.seeds), metric, val])
    header = cfg.header() + [f"# ground_truth_stderr={gt.stderr!r}"]
    return header, ["estimator", "d", "n_e", "replications", "metric", "value"], rows


def _learning_data(cfg: BenchConfig, dataset: LabeledDataset | None):
    """Fixed evaluation set plus a sampler of disjoint calibration sets."""
    if dataset is not None:
        if cfg.n_eval + max(cfg.n_values) > dataset.n:
            raise ConfigError(
                f"n_eval + max(n_values) = {cfg.n_eval + max(cfg.n_values)} exceeds "
                f"{dataset.n} available rows")
        perm = np.random.default_rng(cfg.eval_seed).permutation(dataset.n)
        eval_set = dataset.subset(np.sort(perm[:cfg.n_eval]))
        pool = perm[cfg.n_eval:]

        def draw(n, seed):
            pick = np.random.default_rng(_seq(seed, n)).choice(pool, size=n, replace=False)
            return dataset.subset(np.sort(pick))

        return eval_set, draw

    clf = cfg.clf
    if clf is None:
        raise ConfigError("learning curve needs --input or --beta0/--beta1")
    eval_set = synthetic.sample(cfg.n_eval, clf, seed=_seq(cfg.eval_seed, 0, 1))

    def draw(n, seed):
        return synthetic.sample(n, clf, seed=_seq(seed, n, 2))

    return eval_set, draw


def run_learning_curve(cfg: BenchConfig, dataset: LabeledDataset | None = None):
    """Fit every method on growing calibration sets; score on a fixed set.

    Metrics per (method, n_c, seed): top-label KDE ECE (order ``cfg.d``),
    calibration gain and top-1 accuracy. Gain rows of methods that do not
    preserve the class ordering are marked as lower bounds.
    """
    for m in cfg.methods:
        if m not in calibrators.FITTERS:
            raise ConfigError(f"unknown method {m!r}")
    eval_set, draw = _learning_data(cfg, dataset)
    kde = cfg.kde()

    def score(probs):
        red = top_label_reduce(eval_set.with_probs(probs))
        return kde_ece(red, cfg.d, kde).value, accuracy(eval_set, probs)

    rows = []
    ece0, acc0 = score(eval_set.probs)
    rows.append(["uncalibrated", 0, -1, "ece_kde", ece0, ""])
    rows.append(["uncalibrated", 0, -1, "accuracy", acc0, ""])
    for m in cfg.methods:
        bound = "exact" if m in calibrators.ACCURACY_PRESERVING else "lower"
        for n in cfg.n_values:
            for seed in cfg.seeds:
                cmap = calibrators.fit(m, draw(n, seed))
                cal = cmap(eval_set.probs)
                ece, acc = score(cal)
                gain = calibration_gain(eval_set, cmap)
                rows.append([m, n, seed, "ece_kde", ece, ""])
                rows.append([m, n, seed, "gain", gain, bound])
                rows.append([m, n, seed, "accuracy", acc, ""])
    order = {m: i for i, m in enumerate(["uncalibrated", *METHODS_DEFAULT])}
    rows.sort(key=lambda r: (order.get(r[0], 99), r[0], r[1], r[2], r[3]))
    return cfg.header(), ["method", "n_c", "seed", "metric", "value", "bound"], rows


def format_value(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_csv(path_or_fh, header, columns, rows) -> None:
    """Write ``#``-prefixed provenance lines followed by a plain CSV table."""
    own = isinstance(path_or_fh, str)
    fh = open(path_or_fh, "w", newline="", encoding="utf-8") if own else path_or_fh
    try:
        for line in header:
            fh.write(line + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([format_value(v) for v in r])
    finally:
        if own:
            fh.close()


def summarize(rows):
    """Collapse learning-curve rows to ``{(method, n_c, metric): (mean, se)}``."""
    acc = {}
    for r in rows:
        acc.setdefault((r[0], r[1], r[3]), []).append(r[4])
    out = {}
    for k, v in acc.items():
        v = np.asarray(v, dtype=float)
        se = float(np.std(v, ddof=1) / math.sqrt(v.size)) if v.size > 1 else 0.0
        out[k] = (float(v.mean()), se)
    return out
