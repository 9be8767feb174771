"""File formats: prediction CSV, fitted-map JSON, estimate CSV rows.

Prediction CSV
    Header ``z_0,...,z_{L-1},label`` where ``label`` is a 0-based class
    index. A one-hot layout ``z_0,...,z_{L-1},y_0,...,y_{L-1}`` is also
    accepted on input. Floats are written with ``repr`` (shortest string
    that round-trips, at most 17 significant digits).

Fitted-map JSON
    ``{"kind": "identity"}``
    ``{"kind": "ts", "t": ...}``
    ``{"kind": "ets", "t": ..., "w": [w1, w2, w3]}``
    ``{"kind": "irm", "breakpoints": [...], "levels": [...], "eps": ...}``
    ``{"kind": "irova", "per_class": [{"breakpoints", "levels", "eps"}, ...]}``
    ``{"kind": "irova-ts", "t": ..., "per_class": [...]}``
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from .calibrators import (
    ComposedMap,
    EtsMap,
    IdentityMap,
    IrmMap,
    IrovaMap,
    IsotonicFn,
    TemperatureMap,
)
from .ece import EceEstimate
from .errors import CalibkitError, IngestError
from .simplex import SIMPLEX_TOL, LabeledDataset, normalize

ESTIMATE_COLUMNS = ("estimator", "d", "n_e", "detail", "value", "stderr")


# -- prediction files ----------------------------------------------------------

def _parse_header(header):
    header = [h.strip() for h in header]
    zs = [h for h in header if h.startswith("z_")]
    L = len(zs)
    if L < 2 or zs != [f"z_{i}" for i in range(L)] or header[:L] != zs:
        raise IngestError("header must start with z_0,...,z_{L-1} (L >= 2)", row=1)
    rest = header[L:]
    if rest == ["label"]:
        return L, False
    if rest == [f"y_{i}" for i in range(L)]:
        return L, True
    raise IngestError("header must end with 'label' or y_0,...,y_{L-1}", row=1)


def read_predictions(path) -> LabeledDataset:
    """Load and validate a prediction CSV.

    Row numbers in errors count the header as row 1.
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise IngestError(f"cannot read {path}: {exc}") from exc
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise IngestError("file is empty", row=1) from None
    L, onehot = _parse_header(header)
    width = 2 * L if onehot else L + 1

    probs, labels = [], []
    for rowno, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != width:
            raise IngestError(f"expected {width} fields, got {len(row)}", row=rowno)
        try:
            vals = [float(cell) for cell in row]
        except ValueError:
            raise IngestError("non-numeric field", row=rowno) from None
        z = np.array(vals[:L])
        if not np.all(np.isfinite(z)) or np.any(z < 0) or np.any(z > 1):
            raise IngestError("probabilities must be finite and in [0, 1]", row=rowno)
        if abs(z.sum() - 1.0) > SIMPLEX_TOL:
            raise IngestError(f"probabilities sum to {z.sum():.6g}, not 1", row=rowno)
        if onehot:
            y = vals[L:]
            if sorted(y) != [0.0] * (L - 1) + [1.0]:
                raise IngestError("one-hot label must contain a single 1", row=rowno)
            label = y.index(1.0)
        else:
            label = vals[L]
            if label != int(label) or not 0 <= label < L:
                raise IngestError(f"label must be an integer in [0, {L})", row=rowno)
        probs.append(normalize(z))
        labels.append(int(label))
    if not probs:
        raise IngestError("file has no data rows", row=2)
    return LabeledDataset(np.array(probs), np.array(labels))


def write_predictions(path_or_fh, data: LabeledDataset) -> None:
    own = not hasattr(path_or_fh, "write")
    fh = open(path_or_fh, "w", newline="", encoding="utf-8") if own else path_or_fh
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"z_{i}" for i in range(data.n_classes)] + ["label"])
        for z, y in zip(data.probs, data.labels):
            w.writerow([repr(float(v)) for v in z] + [int(y)])
    finally:
        if own:
            fh.close()


# -- fitted maps -----------------------------------------------------------------

def _iso_to_dict(fn: IsotonicFn) -> dict:
    return {
        "breakpoints": [float(v) for v in fn.breakpoints],
        "levels": [float(v) for v in fn.levels],
        "eps": fn.eps,
    }


def _iso_from_dict(doc) -> IsotonicFn:
    return IsotonicFn(doc["breakpoints"], doc["levels"], doc.get("eps", 0.0))


def map_to_dict(cmap) -> dict:
    if isinstance(cmap, IdentityMap):
        return {"kind": "identity"}
    if isinstance(cmap, TemperatureMap):
        return {"kind": "ts", "t": cmap.t}
    if isinstance(cmap, EtsMap):
        return {"kind": "ets", "t": cmap.t, "w": list(cmap.w)}
    if isinstance(cmap, IrmMap):
        return {"kind": "irm", **_iso_to_dict(cmap.g)}
    if isinstance(cmap, IrovaMap):
        return {"kind": "irova", "per_class": [_iso_to_dict(f) for f in cmap.per_class]}
    if isinstance(cmap, ComposedMap) and isinstance(cmap.outer, IrovaMap):
        return {"kind": "irova-ts", "t": cmap.inner.t,
                "per_class": [_iso_to_dict(f) for f in cmap.outer.per_class]}
    raise TypeError(f"cannot serialize {type(cmap).__name__}")


def map_from_dict(doc: dict):
    try:
        kind = doc["kind"]
        if kind == "identity":
            return IdentityMap()
        if kind == "ts":
            return TemperatureMap(float(doc["t"]))
        if kind == "ets":
            return EtsMap(float(doc["t"]), tuple(doc["w"]))
        if kind == "irm":
            return IrmMap(_iso_from_dict(doc))
        if kind == "irova":
            return IrovaMap(tuple(_iso_from_dict(d) for d in doc["per_class"]))
        if kind == "irova-ts":
            return ComposedMap(TemperatureMap(float(doc["t"])),
                               IrovaMap(tuple(_iso_from_dict(d) for d in doc["per_class"])))
    except (KeyError, TypeError, ValueError, CalibkitError) as exc:
        raise IngestError(f"malformed map document: {exc}") from exc
    raise IngestError(f"unknown map kind {doc.get('kind')!r}")


def dump_map(cmap, path) -> None:
    Path(path).write_text(json.dumps(map_to_dict(cmap), indent=2) + "\n", encoding="utf-8")


def load_map(path):
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise IngestError(f"cannot read map {path}: {exc}") from exc
    return map_from_dict(doc)


# -- estimates -------------------------------------------------------------------

def _g12(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.12g}" if math.isfinite(v) else str(v)


def estimate_row(est: EceEstimate) -> list[str]:
    """One CSV row in :data:`ESTIMATE_COLUMNS` order, 12 significant digits."""
    return [est.kind, str(est.d), str(est.n_e), _g12(est.detail), _g12(est.value),
            _g12(est.stderr)]
