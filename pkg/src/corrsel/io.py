"""Scene and result files (JSON) and the evaluation / bench CSV tables.

Floats go through ``repr`` (via :mod:`json`), the shortest string that reads
back to the same double, so files round-trip bit-exactly.  Readers reject
unknown fields.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from .exceptions import InvalidInput
from .model import CorrespondenceSet, Fundamental, Homography, SelectionResult
from .synthgen import GroundTruth

SCENE_FIELDS = {"name", "image1_size", "image2_size", "correspondences", "ground_truth"}
ITEM_FIELDS = {"x", "xp", "quality", "affine", "label"}
RESULT_FIELDS = {"method", "params", "seed", "selected", "confidence", "model",
                 "iterations_used", "runtime_ms", "flags"}
EVAL_HEADER = ["method", "tau", "precision", "recall", "f_measure", "n_selected",
               "n_correct", "n_gt", "runtime_ms", "flags"]
BENCH_HEADER = ["method", "n", "mean_ms", "stddev_ms", "failures"]


def _check_keys(obj, allowed: set, required: set, where: str) -> None:
    if not isinstance(obj, dict):
        raise InvalidInput(f"{where}: expected an object")
    extra = set(obj) - allowed
    if extra:
        raise InvalidInput(f"{where}: unknown field(s) {sorted(extra)}")
    missing = required - set(obj)
    if missing:
        raise InvalidInput(f"{where}: missing field(s) {sorted(missing)}")


def _floats(values, n: int, where: str) -> list[float]:
    if not isinstance(values, list) or len(values) != n:
        raise InvalidInput(f"{where}: expected {n} numbers")
    out = []
    for v in values:
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            raise InvalidInput(f"{where}: {v!r} is not a finite number")
        out.append(float(v))
    return out


def scene_to_dict(cs: CorrespondenceSet, gt: GroundTruth | None = None, name: str = "scene") -> dict:
    items = []
    for i in range(len(cs)):
        item = {"x": [float(v) for v in cs.p[i]], "xp": [float(v) for v in cs.q[i]]}
        if cs.quality is not None and not np.isnan(cs.quality[i]):
            item["quality"] = float(cs.quality[i])
        if cs.affine is not None and not np.isnan(cs.affine[i]).any():
            item["affine"] = [float(v) for v in cs.affine[i].ravel()]
        if cs.labels is not None and cs.labels[i] >= 0:
            item["label"] = int(cs.labels[i])
        items.append(item)
    out = {"name": name, "image1_size": list(cs.image1_size), "image2_size": list(cs.image2_size),
           "correspondences": items}
    if gt is not None:
        if gt.kind == "homography":
            out["ground_truth"] = {"type": "homography", "H": list(gt.H.m)}
        else:
            out["ground_truth"] = {"type": "labels"}
    return out


def dumps_scene(cs: CorrespondenceSet, gt: GroundTruth | None = None, name: str = "scene") -> str:
    """Serialize with one correspondence per line."""
    d = scene_to_dict(cs, gt, name)
    lines = ["{"]
    lines.append(f'  "name": {json.dumps(d["name"])},')
    lines.append(f'  "image1_size": {json.dumps(d["image1_size"])},')
    lines.append(f'  "image2_size": {json.dumps(d["image2_size"])},')
    if "ground_truth" in d:
        lines.append(f'  "ground_truth": {json.dumps(d["ground_truth"])},')
    items = d["correspondences"]
    if items:
        lines.append('  "correspondences": [')
        body = [f"    {json.dumps(it)}" for it in items]
        lines.append(",\n".join(body))
        lines.append("  ]")
    else:
        lines.append('  "correspondences": []')
    lines.append("}")
    return "\n".join(lines) + "\n"


def scene_from_dict(d: dict) -> tuple[CorrespondenceSet, GroundTruth | None, str]:
    _check_keys(d, SCENE_FIELDS, {"image1_size", "image2_size", "correspondences"}, "scene")
    size1 = _floats(d["image1_size"], 2, "image1_size")
    size2 = _floats(d["image2_size"], 2, "image2_size")
    items = d["correspondences"]
    if not isinstance(items, list):
        raise InvalidInput("correspondences must be a list")
    n = len(items)
    p = np.zeros((n, 2))
    q = np.zeros((n, 2))
    quality = np.full(n, np.nan)
    affine = np.full((n, 2, 2), np.nan)
    labels = np.full(n, -1, dtype=np.int8)
    any_q = any_a = any_l = False
    for i, it in enumerate(items):
        where = f"correspondences[{i}]"
        _check_keys(it, ITEM_FIELDS, {"x", "xp"}, where)
        p[i] = _floats(it["x"], 2, where + ".x")
        q[i] = _floats(it["xp"], 2, where + ".xp")
        if "quality" in it:
            quality[i] = _floats([it["quality"]], 1, where + ".quality")[0]
            any_q = True
        if "affine" in it:
            affine[i] = np.reshape(_floats(it["affine"], 4, where + ".affine"), (2, 2))
            any_a = True
        if "label" in it:
            if it["label"] not in (0, 1) or isinstance(it["label"], bool):
                raise InvalidInput(f"{where}.label must be 0 or 1")
            labels[i] = it["label"]
            any_l = True
    cs = CorrespondenceSet(p, q, quality if any_q else None, affine if any_a else None,
                           labels if any_l else None, size1, size2, margin=None)
    gt = None
    if "ground_truth" in d:
        g = d["ground_truth"]
        if not isinstance(g, dict) or g.get("type") not in ("homography", "labels"):
            raise InvalidInput("ground_truth.type must be 'homography' or 'labels'")
        if g["type"] == "homography":
            _check_keys(g, {"type", "H"}, {"type", "H"}, "ground_truth")
            h = Homography(tuple(_floats(g["H"], 9, "ground_truth.H")))
            gt = GroundTruth("homography", labels == 1, h)
        else:
            _check_keys(g, {"type"}, {"type"}, "ground_truth")
            if not any_l or (labels < 0).any():
                raise InvalidInput("label ground truth needs a label on every correspondence")
            gt = GroundTruth("labels", labels == 1)
    name = d.get("name", "scene")
    if not isinstance(name, str):
        raise InvalidInput("name must be a string")
    return cs, gt, name


def loads_scene(text: str):
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidInput(f"scene file is not valid JSON: {exc}") from exc
    return scene_from_dict(d)


def write_scene(path, cs, gt=None, name: str = "scene") -> None:
    Path(path).write_text(dumps_scene(cs, gt, name))


def read_scene(path):
    return loads_scene(Path(path).read_text())


def result_to_dict(result: SelectionResult, params=None, seed: int | None = None) -> dict:
    model = None
    if isinstance(result.model, (Homography, Fundamental)):
        model = {"type": result.model.kind, "m": list(result.model.m)}
    return {
        "method": result.method,
        "params": params or {},
        "seed": seed,
        "selected": [int(i) for i in result.selected],
        "confidence": None if result.confidence is None else [float(c) for c in result.confidence],
        "model": model,
        "iterations_used": int(result.iterations_used),
        "runtime_ms": result.runtime * 1000.0,
        "flags": list(result.flags),
    }


def dumps_result(result: SelectionResult, params=None, seed: int | None = None) -> str:
    return json.dumps(result_to_dict(result, params, seed), indent=1) + "\n"


def result_from_dict(d: dict) -> tuple[SelectionResult, dict]:
    _check_keys(d, RESULT_FIELDS, {"method", "selected"}, "result")
    sel = d["selected"]
    if not isinstance(sel, list) or not all(isinstance(i, int) and not isinstance(i, bool) for i in sel):
        raise InvalidInput("selected must be a list of integers")
    if len(set(sel)) != len(sel):
        raise InvalidInput("selected contains duplicate indices")
    conf = d.get("confidence")
    if conf is not None:
        conf = np.asarray(_floats(conf, len(conf), "confidence"))
    model = None
    if d.get("model") is not None:
        m = d["model"]
        _check_keys(m, {"type", "m"}, {"type", "m"}, "model")
        vals = tuple(_floats(m["m"], 9, "model.m"))
        if m["type"] == "homography":
            model = Homography(vals)
        elif m["type"] == "fundamental":
            model = Fundamental(vals)
        else:
            raise InvalidInput(f"unknown model type {m['type']!r}")
    result = SelectionResult(
        np.asarray(sel, dtype=np.int64), conf, model,
        int(d.get("iterations_used", 0)), float(d.get("runtime_ms", 0.0)) / 1000.0,
        tuple(d.get("flags", ())), str(d["method"]),
    )
    return result, d.get("params") or {}


def read_result(path):
    try:
        d = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InvalidInput(f"result file is not valid JSON: {exc}") from exc
    return result_from_dict(d)


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def eval_csv(report) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(EVAL_HEADER)
    for row in report.rows:
        w.writerow([report.method, _fmt(row.tau), _fmt(row.precision), _fmt(row.recall),
                    _fmt(row.f_measure), row.n_selected, row.n_correct, row.n_gt,
                    _fmt(report.runtime * 1000.0), ";".join(report.flags)])
    return buf.getvalue()


def bench_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(BENCH_HEADER)
    for r in rows:
        mean = None if r.mean is None else r.mean * 1000.0
        std = None if r.std is None else r.std * 1000.0
        w.writerow([r.method, r.n, _fmt(mean), _fmt(std), r.failures])
    return buf.getvalue()
