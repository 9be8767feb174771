"""Command-line entry point: ``calibkit <subcommand> [flags]``.

Subcommands: synth, calibrate, evaluate, bench-estimators, learning-curve.
Exit codes: 0 success, 2 configuration error, 3 ingest error,
4 numeric/degenerate error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import fields

import numpy as np

from . import calibrators, io, synthetic
from .bench import (
    ESTIMATORS_DEFAULT,
    BenchConfig,
    estimate,
    run_estimator_bench,
    run_learning_curve,
    write_csv,
)
from .ece import EceEstimate, calibration_gain
from .errors import CalibkitError, ConfigError, DimensionError
from .simplex import accuracy, classwise_reduce, squared_loss, top_label_reduce


def _int_list(text):
    out = []
    for part in filter(None, (p.strip() for p in str(text).split(","))):
        lo, sep, hi = part.partition("-")
        try:
            out.extend(range(int(lo), int(hi) + 1) if sep else [int(part)])
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad integer list {text!r}") from None
    return out


def _str_list(values):
    out = []
    for v in values or []:
        out.extend(s.strip() for s in v.split(",") if s.strip())
    return out


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="calibkit", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, *names):
        sp.add_argument("--config", help="JSON file of defaults; flags override it")
        opts = {
            "input": dict(help="prediction CSV"),
            "output": dict(help="output path (stdout when omitted)"),
            "method": dict(action="append", help="calibration method(s), repeatable or comma-separated"),
            "estimator": dict(action="append", help="estimator(s): kde, hist-eq15, hist-dd"),
            "d": dict(type=int, choices=(1, 2)),
            "beta0": dict(type=float),
            "beta1": dict(type=float),
            "n": dict(type=int),
            "n-values": dict(type=_int_list, help="e.g. 64,128,256 or 64-70"),
            "seeds": dict(type=_int_list, help="e.g. 0-199 or 1,5,9"),
            "replications": dict(type=int, help="shorthand for --seeds 0-(N-1)"),
            "bins": dict(type=int),
            "bandwidth": dict(type=float),
            "grid-points": dict(type=int),
            "n-mc": dict(type=int),
            "n-eval": dict(type=int),
            "map": dict(help="fitted map JSON"),
        }
        for name in names:
            sp.add_argument(f"--{name}", **opts[name])

    common(sub.add_parser("synth", help="export a synthetic prediction file"),
           "output", "beta0", "beta1", "n", "seeds")
    common(sub.add_parser("calibrate", help="fit a calibration map"),
           "input", "output", "method")
    common(sub.add_parser("evaluate", help="estimate calibration error"),
           "input", "output", "map", "estimator", "d", "bins", "bandwidth",
           "grid-points", "beta0", "beta1")
    common(sub.add_parser("bench-estimators", help="ECE estimator accuracy benchmark"),
           "output", "estimator", "d", "beta0", "beta1", "n-values", "seeds",
           "replications", "bins", "bandwidth", "grid-points", "n-mc")
    common(sub.add_parser("learning-curve", help="calibration learning curves"),
           "input", "output", "method", "d", "beta0", "beta1", "n-values", "seeds",
           "replications", "bandwidth", "grid-points", "n-eval")
    return p


def _merged(args) -> dict:
    """Config-file values overridden by explicitly given flags."""
    conf = {}
    if getattr(args, "config", None):
        try:
            with open(args.config, encoding="utf-8") as fh:
                conf = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(conf, dict):
            raise ConfigError("config file must hold a JSON object")
    for k, v in vars(args).items():
        if k in ("command", "config") or v is None:
            continue
        conf[k] = v
    if "method" in conf:
        conf["methods"] = _str_list(conf.pop("method")) if isinstance(conf["method"], list) \
            else _str_list([conf.pop("method")])
    if "estimator" in conf:
        est = conf.pop("estimator")
        conf["estimators"] = _str_list(est if isinstance(est, list) else [est])
    if "replications" in conf:
        reps = conf.pop("replications")
        if "seeds" not in conf or args.replications is not None:
            conf["seeds"] = list(range(int(reps)))
    return conf


def _bench_config(experiment, conf) -> BenchConfig:
    known = {f.name for f in fields(BenchConfig)}
    unknown = set(conf) - known - {"map", "n"}
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    kwargs = {k: v for k, v in conf.items() if k in known}
    if isinstance(kwargs.get("seeds"), str):
        kwargs["seeds"] = _int_list(kwargs["seeds"])
    if isinstance(kwargs.get("n_values"), str):
        kwargs["n_values"] = _int_list(kwargs["n_values"])
    if experiment == "learning-curve" and "n_values" not in kwargs:
        kwargs["n_values"] = [128, 256, 512, 1024, 2048, 4096]
    if experiment == "learning-curve" and "seeds" not in kwargs:
        kwargs["seeds"] = list(range(10))
    return BenchConfig(experiment=experiment, **kwargs)


def _emit_text(text, output):
    if output:
        with open(output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_synth(conf):
    if conf.get("beta0") is None or conf.get("beta1") is None or conf.get("n") is None:
        raise ConfigError("synth needs --beta0, --beta1 and --n")
    seeds = conf.get("seeds") or [0]
    clf = synthetic.SyntheticClassifier(conf["beta0"], conf["beta1"])
    data = synthetic.sample(int(conf["n"]), clf, seed=seeds[0])
    io.write_predictions(conf.get("output") or sys.stdout, data)
    return 0


def cmd_calibrate(conf):
    if not conf.get("input"):
        raise ConfigError("calibrate needs --input")
    methods = conf.get("methods") or []
    if len(methods) != 1:
        raise ConfigError("calibrate needs exactly one --method")
    method = methods[0]
    if method not in calibrators.FITTERS:
        raise ConfigError(f"unknown method {method!r}; choose from {sorted(calibrators.FITTERS)}")
    data = io.read_predictions(conf["input"])
    cmap = calibrators.fit(method, data)
    y = data.onehot()
    before = float(np.mean(squared_loss(data.probs, y)))
    after = float(np.mean(squared_loss(cmap(data.probs), y)))
    if getattr(cmap, "degenerate", False):
        print("warning: temperature fit is degenerate; using t=1", file=sys.stderr)
    doc = json.dumps(io.map_to_dict(cmap), indent=2) + "\n"
    if conf.get("output"):
        _emit_text(doc, conf["output"])
    else:
        sys.stdout.write(doc)
    stream = sys.stderr if not conf.get("output") else sys.stdout
    print(f"method={method} n={data.n} squared_loss_before={before:.12g} "
          f"squared_loss_after={after:.12g}", file=stream)
    if hasattr(cmap, "t"):
        print(f"t={cmap.t:.12g}", file=stream)
    return 0


def _reductions(data):
    """Top-label always; binary files also get the class-0 reduction, the
    quantity the synthetic ground truth describes."""
    out = [("top-label", top_label_reduce(data))]
    if data.n_classes == 2:
        out.append(("class-0", classwise_reduce(data, 0)))
    return out


def _estimates(data, names, ds, cfg):
    """``[(reduction, estimator name, EceEstimate), ...]``."""
    return [(red_name, name, estimate(name, red, d, cfg))
            for red_name, red in _reductions(data) for name in names for d in ds]


def _est_doc(red: str, name: str, est: EceEstimate) -> dict:
    return {"reduction": red, "estimator": name, "kind": est.kind, "d": est.d, "n_e": est.n_e,
            "detail": est.detail, "value": est.value, "stderr": est.stderr}


def cmd_evaluate(conf):
    if not conf.get("input"):
        raise ConfigError("evaluate needs --input")
    data = io.read_predictions(conf["input"])
    names = conf.get("estimators") or list(ESTIMATORS_DEFAULT)
    ds = [conf["d"]] if conf.get("d") else [1, 2]
    cfg = BenchConfig(experiment="evaluate", estimators=names, bins=conf.get("bins"),
                      bandwidth=conf.get("bandwidth"),
                      grid_points=conf.get("grid_points", 2048))
    report = {"input": conf["input"], "n": data.n, "n_classes": data.n_classes,
              "accuracy": accuracy(data)}
    raw = _estimates(data, names, ds, cfg)
    report["estimates"] = [_est_doc(*r) for r in raw]
    csv_rows = [["raw", red, name] + io.estimate_row(e) for red, name, e in raw]

    if conf.get("map"):
        cmap = io.load_map(conf["map"])
        if isinstance(cmap, calibrators.IrovaMap) and cmap.n_classes != data.n_classes:
            raise DimensionError(f"map has {cmap.n_classes} classes, file has {data.n_classes}")
        if isinstance(cmap, calibrators.ComposedMap) and cmap.outer.n_classes != data.n_classes:
            raise DimensionError(f"map has {cmap.outer.n_classes} classes, file has {data.n_classes}")
        cal = data.with_probs(cmap(data.probs))
        gain, se = calibration_gain(data, cmap, return_stderr=True)
        after = _estimates(cal, names, ds, cfg)
        report["map"] = {
            "kind": cmap.kind,
            "gain": gain,
            "gain_stderr": se,
            "gain_bound": "exact" if cmap.kind in calibrators.ACCURACY_PRESERVING else "lower",
            "accuracy_after": accuracy(cal),
            "accuracy_delta": accuracy(cal) - accuracy(data),
            "estimates": [_est_doc(*r) for r in after],
        }
        csv_rows += [["calibrated", red, name] + io.estimate_row(e) for red, name, e in after]

    if conf.get("beta0") is not None and conf.get("beta1") is not None:
        if data.n_classes != 2:
            raise DimensionError("ground-truth evaluation needs a binary file")
        clf = synthetic.SyntheticClassifier(conf["beta0"], conf["beta1"])
        dev = data.probs - synthetic.true_pi(data.probs, clf)
        e1 = float(np.mean(np.abs(dev).sum(axis=1)))
        e2 = float(np.mean((dev * dev).sum(axis=1)))
        report["ground_truth_pi"] = {
            "ece1": e1, "ece2": e2,
            "sandwich": bool(np.sqrt(e2) <= e1 <= np.sqrt(2 * e2) + 1e-12),
        }

    out = conf.get("output")
    if out and out.endswith(".csv"):
        with open(out, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["predictions", "reduction", "name", *io.ESTIMATE_COLUMNS])
            w.writerows(csv_rows)
    else:
        _emit_text(json.dumps(report, indent=2) + "\n", out)
    return 0


def _run_bench(experiment, conf, runner, **kw):
    cfg = _bench_config(experiment, conf)
    header, cols, rows = runner(cfg, **kw)
    if cfg.output:
        write_csv(cfg.output, header, cols, rows)
    else:
        write_csv(sys.stdout, header, cols, rows)
    return 0


def cmd_bench(conf):
    conf.pop("input", None)
    return _run_bench("estimator-bench", conf, run_estimator_bench)


def cmd_learning(conf):
    dataset = io.read_predictions(conf["input"]) if conf.get("input") else None
    return _run_bench("learning-curve", conf, run_learning_curve, dataset=dataset)


COMMANDS = {
    "synth": cmd_synth,
    "calibrate": cmd_calibrate,
    "evaluate": cmd_evaluate,
    "bench-estimators": cmd_bench,
    "learning-curve": cmd_learning,
}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        conf = _merged(args)
        conf = {k.replace("-", "_"): v for k, v in conf.items()}
        return COMMANDS[args.command](conf)
    except CalibkitError as exc:
        print(f"calibkit {args.command}: error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
