"""Grid-based motion statistics."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace

import numpy as np

from ..exceptions import InvalidInput
from ..model import CorrespondenceSet, SelectionResult
from ..params import GmsParams

_OFFSETS = [(dx, dy) for dy in (-1, 0, 1) for dx in (-1, 0, 1)]


@dataclass(frozen=True)
class GmsStatModel:
    """Binomial model of the match count around a true or false match.

    ``p_t``/``p_f`` and ``score`` are derived; pass the other fields to
    :func:`gms_distribution` to fill them.
    """

    K: int
    n: int
    delta: float
    zeta: float
    m: int
    M: int
    p_t: float = math.nan
    p_f: float = math.nan
    score: float = math.nan


def gms_distribution(model: GmsStatModel) -> GmsStatModel:
    """Fill in ``p_t``, ``p_f`` and the separation ``(mean_t - mean_f) / (std_t + std_f)``."""
    if model.M <= 0:
        raise InvalidInput("M (keypoints in image 2) must be positive")
    if not 0.0 <= model.delta <= 1.0:
        raise InvalidInput("delta must lie in [0, 1]")
    if model.m > model.M or model.K < 1 or model.n < 1:
        raise InvalidInput("need m <= M and K, n >= 1")
    ratio = model.m / model.M
    p_t = model.delta + (1.0 - model.delta) * model.zeta * ratio
    p_f = model.zeta * (1.0 - model.delta) * ratio
    trials = model.K * model.n
    spread = math.sqrt(trials * p_t * (1.0 - p_t)) + math.sqrt(trials * p_f * (1.0 - p_f))
    gap = trials * p_t - trials * p_f
    if spread == 0.0:
        score = 0.0 if gap == 0.0 else math.inf
    else:
        score = gap / spread
    return replace(model, p_t=p_t, p_f=p_f, score=score)


def _cells(pts: np.ndarray, size, g: int) -> tuple[np.ndarray, np.ndarray]:
    w, h = size
    cx = np.clip(np.floor(pts[:, 0] / w * g), 0, g - 1).astype(np.int64)
    cy = np.clip(np.floor(pts[:, 1] / h * g), 0, g - 1).astype(np.int64)
    return cx, cy


def gms_scores(cs: CorrespondenceSet, grid: int = 20):
    """Per-cell statistics of the fast grid estimator.

    Returns ``(cell1, cell2, best, score, mean_count)`` where ``cell1``/``cell2``
    are the flat cell ids of every match, ``best[i]`` the image-2 cell paired
    with image-1 cell ``i``, ``score[i]`` the neighbourhood match count and
    ``mean_count[i]`` the mean image-1 cell occupancy over the same available
    neighbourhood.
    """
    g = grid
    ncell = g * g
    x1, y1 = _cells(cs.p, cs.image1_size, g)
    x2, y2 = _cells(cs.q, cs.image2_size, g)
    cell1 = y1 * g + x1
    cell2 = y2 * g + x2
    pair_counts = np.bincount(cell1 * ncell + cell2, minlength=ncell * ncell).reshape(ncell, ncell)
    occupancy = np.bincount(cell1, minlength=ncell)
    best = np.argmax(pair_counts, axis=1)

    ix, iy = np.arange(ncell) % g, np.arange(ncell) // g
    jx, jy = best % g, best // g
    score = np.zeros(ncell, dtype=np.int64)
    occupied = np.zeros(ncell, dtype=np.int64)
    available = np.zeros(ncell, dtype=np.int64)
    for dx, dy in _OFFSETS:
        ax, ay, bx, by = ix + dx, iy + dy, jx + dx, jy + dy
        ok = ((ax >= 0) & (ax < g) & (ay >= 0) & (ay < g)
              & (bx >= 0) & (bx < g) & (by >= 0) & (by < g))
        a = np.where(ok, ay * g + ax, 0)
        b = np.where(ok, by * g + bx, 0)
        score += np.where(ok, pair_counts[a, b], 0)
        occupied += np.where(ok, occupancy[a], 0)
        available += ok
    mean_count = occupied / np.maximum(available, 1)
    return cell1, cell2, best, score, mean_count


def select_gms(cs: CorrespondenceSet, params: GmsParams | None = None, seed: int = 0) -> SelectionResult:
    """Accept every match of a cell pair whose neighbourhood count beats ``alpha * sqrt(n_i)``.

    Each occupied image-1 cell is paired with the image-2 cell receiving most
    of its matches (lowest id on ties).  The score sums match counts over the
    3x3 block of cell pairs obtained by shifting both cells by the same
    offset; offsets leaving either grid are dropped.  ``n_i`` is the mean
    number of matches in the image-1 cells of that block.
    """
    params = params or GmsParams()
    start = time.perf_counter()
    if len(cs) == 0:
        return SelectionResult([], np.zeros(0), method="gms", runtime=time.perf_counter() - start)
    cell1, cell2, best, score, mean_count = gms_scores(cs, params.grid)
    accepted_cell = score > params.alpha * np.sqrt(mean_count)
    keep = accepted_cell[cell1] & (cell2 == best[cell1])
    selected = np.flatnonzero(keep)
    confidence = score[cell1] / np.maximum(params.alpha * np.sqrt(mean_count[cell1]), 1e-12)
    confidence = np.where(cell2 == best[cell1], confidence, 0.0)
    flags = () if len(selected) else ("empty-selection",)
    return SelectionResult(selected, confidence, iterations_used=1, flags=flags, method="gms",
                           runtime=time.perf_counter() - start)
