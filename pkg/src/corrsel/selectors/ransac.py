from __future__ import annotations

import time

import numpy as np

from ..exceptions import DegenerateSample, NoModel, TooFewMatches
from ..model import CorrespondenceSet, SelectionResult
from ..params import RansacParams
from ._sampling import ModelKind, adaptive_bound, draw_sample


def select_ransac(cs: CorrespondenceSet, params: RansacParams | None = None, seed: int = 0) -> SelectionResult:
    """Plain hypothesize-and-verify with uniform minimal samples.

    The best hypothesis is the one with the largest consensus.  Sampling stops
    after ``n_ransac`` draws or once the usual ``log(1-conf)/log(1-w^m)``
    bound for the current best inlier ratio ``w`` has been met.  For
    fundamental matrices ``t_ransac`` bounds the square root of the epipolar
    quotient.
    """
    params = params or RansacParams()
    start = time.perf_counter()
    kind = ModelKind(params.model_kind, params.t_ransac)
    n, m = len(cs), kind.sample_size
    if n < m:
        raise TooFewMatches(f"{params.model_kind} RANSAC needs at least {m} matches, got {n}")
    p, q = cs.p, cs.q
    rng = np.random.default_rng(seed)

    best_model, best_count = None, -1
    history = []
    limit = float(params.n_ransac)
    drawn = 0
    while drawn < limit:
        drawn += 1
        sample = draw_sample(rng, n, m)
        try:
            model = kind.fit(p[sample], q[sample])
        except (DegenerateSample, np.linalg.LinAlgError):
            continue
        inl = kind.inliers(model, p, q)
        count = int(inl.sum())
        if count > best_count:
            best_model, best_count = model, count
            history.append((drawn, np.flatnonzero(inl)))
            limit = min(float(params.n_ransac), adaptive_bound(count / n, m, params.confidence))

    if best_model is None:
        raise NoModel(f"all {drawn} samples were degenerate")
    model = kind.wrap(best_model)
    selected = np.flatnonzero(kind.inliers(model.matrix, p, q))
    flags = () if len(selected) else ("empty-selection",)
    return SelectionResult(selected, model=model, iterations_used=drawn, flags=flags, method="ransac",
                           runtime=time.perf_counter() - start, history=history)
