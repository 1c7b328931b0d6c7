"""Vector field consensus.

Matches become samples ``(u, v) = (x, x' - x)`` of a motion field.  EM fits a
Gaussian-kernel field under a Gaussian-inlier / uniform-outlier mixture; the
posterior inlier probability of every sample is the selection score.
"""

from __future__ import annotations

import time

import numpy as np
import scipy.linalg

from ..exceptions import SolveFailure, TooFewMatches
from ..model import CorrespondenceSet, SelectionResult
from ..params import VfcParams

DIM = 2
SIGMA2_FLOOR = 1e-8


def _normalize(a: np.ndarray) -> np.ndarray:
    centered = a - a.mean(axis=0)
    scale = np.hypot(centered[:, 0], centered[:, 1]).mean()
    return centered / scale if scale > 0 else centered


def gaussian_kernel(a: np.ndarray, b: np.ndarray, beta: float) -> np.ndarray:
    d2 = ((a[:, None, :] - b[None, :, :]) ** 2).sum(axis=2)
    return np.exp(-beta * d2)


def vfc_e_step(r2: np.ndarray, gamma: float, sigma2: float, a: float) -> np.ndarray:
    """Posterior inlier probabilities given squared residuals ``r2``."""
    g = gamma * np.exp(-r2 / (2.0 * sigma2))
    outlier = (1.0 - gamma) * (2.0 * np.pi * sigma2) ** (DIM / 2) / a
    with np.errstate(invalid="ignore"):
        p = g / (g + outlier)
    return np.nan_to_num(p, nan=0.0)


def vfc_gamma(p: np.ndarray) -> float:
    return float(np.sum(p) / len(p))


def vfc_sigma2(p: np.ndarray, r2: np.ndarray) -> float:
    tr = np.sum(p)
    if tr <= 0:
        return SIGMA2_FLOOR
    return max(float(p @ r2) / (DIM * tr), SIGMA2_FLOOR)


def _uniform_area(v: np.ndarray) -> float:
    extent = (v.max(axis=0) - v.min(axis=0)) * 1.1
    area = float(extent[0] * extent[1])
    return area if area > 0 else 1.0


def _control_points(u: np.ndarray, m: int) -> np.ndarray:
    """Deterministic farthest-point subset of ``u`` of size ``m``."""
    chosen = [0]
    dist = ((u - u[0]) ** 2).sum(axis=1)
    for _ in range(1, min(m, len(u))):
        i = int(np.argmax(dist))
        chosen.append(i)
        dist = np.minimum(dist, ((u - u[i]) ** 2).sum(axis=1))
    return u[chosen]


class _DenseField:
    def __init__(self, u, beta):
        self.k = gaussian_kernel(u, u, beta)

    def fit(self, p, v, reg):
        # (P K + reg I) C = P V, which avoids inverting P
        lhs = p[:, None] * self.k
        lhs[np.diag_indices_from(lhs)] += reg
        try:
            c = scipy.linalg.solve(lhs, p[:, None] * v, check_finite=False)
        except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
            raise SolveFailure(str(exc)) from exc
        return self.k @ c


class _SparseField:
    def __init__(self, u, beta, n_control):
        ctrl = _control_points(u, n_control)
        self.u_basis = gaussian_kernel(u, ctrl, beta)
        self.gram = gaussian_kernel(ctrl, ctrl, beta)

    def fit(self, p, v, reg):
        # (U^T P U + reg G) C = U^T P V
        up = self.u_basis.T * p
        lhs = up @ self.u_basis + reg * self.gram
        # a wide kernel makes the Gram matrix numerically rank deficient, so
        # the small system is solved in the least-squares sense
        try:
            c = scipy.linalg.lstsq(lhs, up @ v, check_finite=False)[0]
        except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
            raise SolveFailure(str(exc)) from exc
        return self.u_basis @ c


def select_vfc(cs: CorrespondenceSet, params: VfcParams | None = None, seed: int = 0) -> SelectionResult:
    params = params or VfcParams()
    start = time.perf_counter()
    n = len(cs)
    if n < 2:
        raise TooFewMatches("VFC needs at least 2 matches")
    u = _normalize(cs.p)
    v = _normalize(cs.q - cs.p)
    a = _uniform_area(v)
    flags = []
    if n <= params.max_dense:
        field = _DenseField(u, params.beta)
    else:
        field = _SparseField(u, params.beta, params.n_control)
        flags.append("sparse-field")

    f = np.zeros_like(v)
    gamma = params.gamma0
    r2 = ((v - f) ** 2).sum(axis=1)
    sigma2 = max(float(r2.sum()) / (DIM * n), SIGMA2_FLOOR)
    converged = False
    it = 0
    for it in range(1, params.max_em_iters + 1):
        p = vfc_e_step(r2, gamma, sigma2, a)
        f = field.fit(p, v, params.lambda_vfc * sigma2)
        r2 = ((v - f) ** 2).sum(axis=1)
        new_sigma2 = vfc_sigma2(p, r2)
        new_gamma = vfc_gamma(p)
        done = abs(new_gamma - gamma) < params.tol and abs(new_sigma2 - sigma2) < params.tol * sigma2
        gamma, sigma2 = new_gamma, new_sigma2
        if done:
            converged = True
            break
    if not converged:
        flags.append("unconverged")
    p = vfc_e_step(r2, gamma, sigma2, a)
    selected = np.flatnonzero(p > params.t_vfc)
    if not len(selected):
        flags.append("empty-selection")
    return SelectionResult(selected, p, iterations_used=it, flags=tuple(flags), method="vfc",
                           runtime=time.perf_counter() - start,
                           stats={"gamma": gamma, "sigma2": sigma2, "converged": converged})
