"""Locality preserving matching (single pass, distance-sum cost)."""

from __future__ import annotations

import time

import numpy as np
from scipy.spatial import cKDTree

from ..exceptions import TooFewMatches
from ..model import CorrespondenceSet, SelectionResult
from ..params import LpmParams

# Extra candidates fetched from the KD-tree so that distance ties at the k-th
# neighbour can be resolved by index.
_TIE_SLACK = 4


def _unit_box(pts: np.ndarray) -> np.ndarray:
    """Shift to the origin and scale by the larger extent (aspect preserved)."""
    lo = pts.min(axis=0)
    extent = float((pts.max(axis=0) - lo).max())
    return (pts - lo) / extent if extent > 0 else pts - lo


def knn_indices(pts: np.ndarray, k: int) -> np.ndarray:
    """``k`` nearest neighbours of every point, excluding itself; ties go to the lower index."""
    n = len(pts)
    if n <= k:
        raise TooFewMatches(f"need more than k={k} matches, got {n}")
    want = min(n, k + 1 + _TIE_SLACK)
    dist, idx = cKDTree(pts).query(pts, k=want)
    dist = dist.reshape(n, want)
    idx = idx.reshape(n, want)
    dist = np.where(idx == np.arange(n)[:, None], np.inf, dist)
    order = np.lexsort((idx, dist), axis=-1)[:, :k]
    return np.take_along_axis(idx, order, axis=1).astype(np.int64)


def _prepare(cs: CorrespondenceSet, normalize: bool):
    if normalize:
        return _unit_box(cs.p), _unit_box(cs.q)
    return np.asarray(cs.p), np.asarray(cs.q)


def lpm_costs(cs: CorrespondenceSet, k: int = 4, normalize: bool = True) -> np.ndarray:
    """Neighbourhood-structure cost ``l_i`` of every correspondence.

    ``l_i`` sums the image-2 distances from ``x'_i`` to the partners of the k
    image-1 neighbours of ``x_i``, plus the image-1 distances from ``x_i`` to
    the partners of the k image-2 neighbours of ``x'_i``.
    """
    p, q = _prepare(cs, normalize)
    nn1 = knn_indices(p, k)
    nn2 = knn_indices(q, k)
    d_q = np.hypot(*(q[:, None, :] - q[nn1]).transpose(2, 0, 1)).sum(axis=1)
    d_p = np.hypot(*(p[:, None, :] - p[nn2]).transpose(2, 0, 1)).sum(axis=1)
    return d_q + d_p


def lpm_cost(cs: CorrespondenceSet, i: int, k: int = 4, normalize: bool = True) -> float:
    return float(lpm_costs(cs, k, normalize)[i])


def lpm_total_cost(cs: CorrespondenceSet, selection, lambda_lpm: float = 6.0, k: int = 4,
                   normalize: bool = True) -> float:
    """``sum_i w_i (l_i - lambda) + lambda * N`` for an indicator vector or index list.

    A 2-D boolean array is read as one indicator vector per row and gives an
    array of totals.
    """
    n = len(cs)
    costs = lpm_costs(cs, k, normalize)
    sel = np.asarray(selection)
    if sel.dtype == bool:
        w = sel.astype(float)
    else:
        w = np.zeros(n)
        w[sel.astype(int)] = 1.0
    total = w @ (costs - lambda_lpm) + lambda_lpm * n
    return total if np.ndim(total) else float(total)


def select_lpm(cs: CorrespondenceSet, params: LpmParams | None = None, seed: int = 0) -> SelectionResult:
    params = params or LpmParams()
    start = time.perf_counter()
    costs = lpm_costs(cs, params.k, params.normalize_coords)
    selected = np.flatnonzero(costs <= params.lambda_lpm)
    confidence = np.maximum(params.lambda_lpm - costs, 0.0)
    flags = () if len(selected) else ("empty-selection",)
    return SelectionResult(selected, confidence, iterations_used=1, flags=flags, method="lpm",
                           runtime=time.perf_counter() - start, stats={"costs": costs})
