"""Game-theoretic matching: replicator dynamics over an affine-consistency payoff."""

from __future__ import annotations

import time

import numpy as np

from ..exceptions import MissingAffine, NoSeparation
from ..geometry import otsu_threshold
from ..model import Correspondence, CorrespondenceSet, SelectionResult
from ..params import GtmParams

_BLOCK = 256
_STALL = 1e-9


def _local_map(c: Correspondence, x: np.ndarray) -> np.ndarray:
    return c.q.as_array() + c.affine.matrix @ (x - c.p.as_array())


def gtm_payoff(ci: Correspondence, cj: Correspondence, lambda_gtm: float) -> float:
    """Payoff ``exp(-lambda * max(|T_i(x_i) - T_j(x_i)|_1, |T_i(x_j) - T_j(x_j)|_1))``.

    ``T_i`` is the first-order local map ``x -> q_i + A_i (x - p_i)`` of
    correspondence ``i``.
    """
    if ci.affine is None or cj.affine is None:
        raise MissingAffine("GTM payoff needs a local affine frame on both correspondences")
    xi, xj = ci.p.as_array(), cj.p.as_array()
    di = np.abs(_local_map(ci, xi) - _local_map(cj, xi)).sum()
    dj = np.abs(_local_map(ci, xj) - _local_map(cj, xj)).sum()
    return float(np.exp(-lambda_gtm * max(di, dj)))


def gtm_payoff_matrix(cs: CorrespondenceSet, lambda_gtm: float) -> np.ndarray:
    """Dense payoff matrix with a zero diagonal."""
    if not cs.has_affine:
        raise MissingAffine("GTM needs a local affine frame on every correspondence")
    p, q, aff = cs.p, cs.q, cs.affine
    n = len(cs)
    out = np.empty((n, n))
    for s in range(0, n, _BLOCK):
        rows = slice(s, min(s + _BLOCK, n))
        dp = p[rows, None, :] - p[None, :, :]          # x_i - x_j
        dq = q[rows, None, :] - q[None, :, :]          # q_i - q_j
        # T_i(x_i) - T_j(x_i) = (q_i - q_j) - A_j (x_i - x_j)
        dx, dy = dp[..., 0], dp[..., 1]
        ex, ey = dq[..., 0], dq[..., 1]
        aj = aff[None, :]
        e1 = (np.abs(ex - aj[..., 0, 0] * dx - aj[..., 0, 1] * dy)
              + np.abs(ey - aj[..., 1, 0] * dx - aj[..., 1, 1] * dy))
        # T_i(x_j) - T_j(x_j) = (q_i - q_j) - A_i (x_i - x_j)
        ai = aff[rows, None]
        e2 = (np.abs(ex - ai[..., 0, 0] * dx - ai[..., 0, 1] * dy)
              + np.abs(ey - ai[..., 1, 0] * dx - ai[..., 1, 1] * dy))
        worst = np.maximum(e1, e2)
        out[rows] = np.exp(-lambda_gtm * worst)
    np.fill_diagonal(out, 0.0)
    return out


def replicator_dynamics(payoff: np.ndarray, n_iter: int, q0=None) -> tuple[np.ndarray, int, bool]:
    """Iterate ``q_i <- q_i (P q)_i / (q^T P q)`` from the barycenter.

    Returns ``(q, iterations, ok)``; ``ok`` is False when the average payoff
    vanished and the population could not be updated.
    """
    n = payoff.shape[0]
    q = np.full(n, 1.0 / n) if q0 is None else np.asarray(q0, dtype=float).copy()
    for k in range(n_iter):
        pq = payoff @ q
        mean = q @ pq
        if not mean > 0.0:
            return q, k, False
        nxt = q * pq / mean
        if np.max(np.abs(nxt - q)) < _STALL:
            return nxt, k + 1, True
        q = nxt
    return q, n_iter, True


def select_gtm(cs: CorrespondenceSet, params: GtmParams | None = None, seed: int = 0) -> SelectionResult:
    params = params or GtmParams()
    start = time.perf_counter()
    n = len(cs)
    if n and not cs.has_affine:
        raise MissingAffine("GTM needs a local affine frame on every correspondence")
    if n == 0:
        return SelectionResult([], np.zeros(0), flags=("empty-selection",), method="gtm",
                               runtime=time.perf_counter() - start)
    if n == 1:
        return SelectionResult([0], np.ones(1), flags=("degenerate",), method="gtm",
                               runtime=time.perf_counter() - start)

    payoff = gtm_payoff_matrix(cs, params.lambda_gtm)
    q, iters, ok = replicator_dynamics(payoff, params.n_gtm)
    if not ok:
        return SelectionResult([], q, iterations_used=iters, flags=("zero-payoff", "empty-selection"),
                               method="gtm", runtime=time.perf_counter() - start)
    flags = []
    threshold = params.t_gtm
    if threshold is None:
        try:
            threshold = otsu_threshold(q)
        except NoSeparation:
            threshold = -np.inf
            flags.append("no-separation")
    selected = np.flatnonzero(q > threshold)
    if not len(selected):
        flags.append("empty-selection")
    return SelectionResult(selected, q, iterations_used=iters, flags=tuple(flags), method="gtm",
                           runtime=time.perf_counter() - start)
