from __future__ import annotations

import time

import numpy as np

from ..exceptions import TooFewMatches, ZeroMatrix
from ..geometry import principal_eigenvector
from ..model import CorrespondenceSet, SelectionResult
from ..params import StParams

_BLOCK = 512


def _pairwise_dist(a: np.ndarray, rows: slice) -> np.ndarray:
    d = a[rows, None, :] - a[None, :, :]
    return np.sqrt(d[..., 0] ** 2 + d[..., 1] ** 2)


def st_affinity(cs: CorrespondenceSet) -> np.ndarray:
    """Pairwise length-ratio affinity ``min(|x_i-x_j|/|x'_i-x'_j|, inverse)``.

    Pairs with a zero distance in either image get affinity 0, and so does
    the diagonal.
    """
    n = len(cs)
    if n < 2:
        raise TooFewMatches("the spectral technique needs at least 2 matches")
    a = np.empty((n, n))
    for s in range(0, n, _BLOCK):
        rows = slice(s, min(s + _BLOCK, n))
        d1 = _pairwise_dist(cs.p, rows)
        d2 = _pairwise_dist(cs.q, rows)
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.minimum(d1, d2) / np.maximum(d1, d2)
        r[(d1 == 0.0) | (d2 == 0.0)] = 0.0
        a[rows] = r
    np.fill_diagonal(a, 0.0)
    return a


def select_st(cs: CorrespondenceSet, params: StParams | None = None, seed: int = 0) -> SelectionResult:
    params = params or StParams()
    start = time.perf_counter()
    a = st_affinity(cs)
    try:
        v, converged = principal_eigenvector(a)
    except ZeroMatrix:
        return SelectionResult([], np.zeros(len(cs)), flags=("zero-affinity", "empty-selection"),
                               method="st", runtime=time.perf_counter() - start)
    flags = () if converged else ("unconverged",)

    work = v.copy()
    selected = []
    while True:
        i = int(np.argmax(work))
        if work[i] <= 0.0:
            break
        selected.append(i)
        work[i] = 0.0
        work[a[i] <= params.t_st] = 0.0
    return SelectionResult(selected, v, iterations_used=len(selected), flags=flags, method="st",
                           runtime=time.perf_counter() - start)
