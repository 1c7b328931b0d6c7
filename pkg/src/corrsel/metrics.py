"""Precision / recall / F-measure over a tolerance sweep, and runtime benchmarking."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .exceptions import CorrselError, InvalidInput, MissingGroundTruth
from .geometry import transfer_errors
from .model import CorrespondenceSet, SelectionResult
from .synthgen import GroundTruth, SceneSpec, generate_scene

log = logging.getLogger(__name__)

DEFAULT_TAUS = tuple(float(t) for t in range(1, 11))


@dataclass(frozen=True)
class EvalRow:
    tau: float | None
    precision: float
    recall: float
    f_measure: float
    n_selected: int
    n_correct: int
    n_gt: int


@dataclass
class EvaluationReport:
    method: str
    rows: list[EvalRow]
    runtime: float = 0.0
    flags: list[str] = field(default_factory=list)

    def at(self, tau: float) -> EvalRow:
        for row in self.rows:
            if row.tau is None or row.tau == tau:
                return row
        raise KeyError(f"no row for tau={tau}")


def precision_recall_f(n_correct: int, n_selected: int, n_gt: int) -> tuple[float, float, float]:
    precision = n_correct / n_selected if n_selected else 0.0
    recall = n_correct / n_gt if n_gt else 0.0
    f = 2.0 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return precision, recall, f


def evaluate(cs: CorrespondenceSet, result: SelectionResult, gt: GroundTruth | None,
             t_gt: float = 10.0, taus=DEFAULT_TAUS) -> EvaluationReport:
    """Score a selection against homography or label ground truth.

    With a homography, a match belongs to the ground-truth set when its
    transfer error is at most ``t_gt`` and a selected match is correct at
    tolerance ``tau`` when its error is at most ``tau``; one row per ``tau``.
    Label ground truth yields a single row with ``tau=None``.
    """
    if gt is None:
        raise MissingGroundTruth("evaluation needs ground truth")
    n = len(cs)
    selected = result.mask(n)
    n_sel = int(selected.sum())
    flags = []
    if n_sel == 0:
        flags.append("empty-selection")

    if gt.kind == "homography":
        err = transfer_errors(gt.H.matrix, cs.p, cs.q)
        if np.isinf(err).any():
            flags.append("point-at-infinity")
        in_gt = err <= t_gt
        thresholds = [float(t) for t in taus]
        correct_counts = [int((selected & (err <= t)).sum()) for t in thresholds]
    else:
        labels = np.asarray(gt.labels, dtype=bool)
        if labels.shape != (n,):
            raise InvalidInput("label ground truth does not match the correspondence set")
        in_gt = labels
        thresholds = [None]
        correct_counts = [int((selected & labels).sum())]

    n_gt = int(in_gt.sum())
    if n_gt == 0:
        flags.append("empty-ground-truth")
    rows = []
    for tau, n_corr in zip(thresholds, correct_counts):
        pr, rc, f = precision_recall_f(n_corr, n_sel, n_gt)
        rows.append(EvalRow(tau, pr, rc, f, n_sel, n_corr, n_gt))
    return EvaluationReport(result.method, rows, result.runtime, flags)


@dataclass(frozen=True)
class BenchRow:
    method: str
    n: int
    mean: float | None
    std: float | None
    failures: int
    times: tuple[float, ...] = ()


def derive_seed(seed: int, *keys: int) -> int:
    return int(np.random.SeedSequence([seed, *keys]).generate_state(1)[0])


def bench(methods, sizes, repeats: int, scene_template: SceneSpec, seed: int = 0,
          params: dict | None = None) -> list[BenchRow]:
    """Time each method on ``repeats`` generated scenes per size.

    Scenes depend only on ``(seed, n, rep)``, so every method sees the same
    inputs.  Only the selector call is timed.  A rep that raises is counted
    as a failure and left out of the statistics.
    """
    from .selectors import run_selector

    sizes = sorted(int(s) for s in sizes)
    if not sizes:
        raise InvalidInput("bench needs at least one size")
    if repeats < 1:
        raise InvalidInput("repeats must be at least 1")
    params = params or {}
    scenes = {}
    for n in sizes:
        for rep in range(repeats):
            spec = replace(scene_template, n=n, seed=derive_seed(seed, n, rep))
            scenes[n, rep] = generate_scene(spec)[0]

    rows = []
    for method in methods:
        for n in sizes:
            times, failures = [], 0
            for rep in range(repeats):
                cs = scenes[n, rep]
                t0 = time.perf_counter()
                try:
                    run_selector(method, cs, params.get(method), derive_seed(seed, n, rep, 1))
                except CorrselError as exc:
                    failures += 1
                    log.info("%s failed at n=%d rep=%d: %s", method, n, rep, exc)
                    continue
                times.append(time.perf_counter() - t0)
            if times:
                rows.append(BenchRow(method, n, float(np.mean(times)), float(np.std(times)),
                                     failures, tuple(times)))
            else:
                rows.append(BenchRow(method, n, None, None, failures))
    return rows
