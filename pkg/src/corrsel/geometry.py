"""Projective estimation primitives and the small numeric helpers the selectors share.

Scalar entry points (``project``, ``homography_residual``...) work on the
value types; the ``*_errors`` functions are their vectorized counterparts over
``(N, 2)`` coordinate arrays and are what the selectors call in inner loops.
"""

from __future__ import annotations

import itertools

import numpy as np

from .exceptions import DegenerateSample, NoSeparation, PointAtInfinity, ZeroMatrix
from .model import Correspondence, Fundamental, Homography, Point2

EPS_PROJ = 1e-12

# Smallest accepted ratio between the 8th and 1st singular value of a DLT
# design matrix (normalized coordinates); below it the null space is not 1-D.
_RANK_TOL = 1e-9
# Twice-area of a normalized triangle below which three points count as collinear.
_COLLINEAR_TOL = 1e-6


def _as_matrix(model) -> np.ndarray:
    if isinstance(model, (Homography, Fundamental)):
        return model.matrix
    return np.asarray(model, dtype=float).reshape(3, 3)


def project(h, p: Point2) -> Point2:
    m = _as_matrix(h)
    x, y, w = m @ np.array([p.x, p.y, 1.0])
    if abs(w) <= EPS_PROJ:
        raise PointAtInfinity(f"point ({p.x}, {p.y}) maps to infinity")
    return Point2(float(x / w), float(y / w))


def project_points(h, pts) -> np.ndarray:
    """Map an ``(N, 2)`` array through ``h``; points sent to infinity become NaN."""
    m = _as_matrix(h)
    pts = np.asarray(pts, dtype=float).reshape(-1, 2)
    hx = pts @ m[:, :2].T + m[:, 2]
    w = hx[:, 2]
    bad = np.abs(w) <= EPS_PROJ
    w = np.where(bad, np.nan, w)
    return hx[:, :2] / w[:, None]


def homography_residual(h, c: Correspondence) -> float:
    proj = project(h, c.p)
    return float(np.hypot(c.q.x - proj.x, c.q.y - proj.y))


def transfer_errors(h, p, q) -> np.ndarray:
    """One-sided transfer error ``|q - rho(H p)|`` per row; ``inf`` at infinity."""
    d = np.asarray(q, dtype=float) - project_points(h, p)
    err = np.hypot(d[:, 0], d[:, 1])
    return np.where(np.isnan(err), np.inf, err)


def sampson_like_residual(f, c: Correspondence) -> float:
    """Squared epipolar distance quotient ``(y'^T F y)^2 / (|F y|_12^2 + |F^T y'|_12^2)``."""
    m = _as_matrix(f)
    y = np.array([c.p.x, c.p.y, 1.0])
    yp = np.array([c.q.x, c.q.y, 1.0])
    fy = m @ y
    fty = m.T @ yp
    den = fy[0] ** 2 + fy[1] ** 2 + fty[0] ** 2 + fty[1] ** 2
    if den <= EPS_PROJ ** 2:
        raise PointAtInfinity("epipolar residual denominator vanishes")
    return float((yp @ fy) ** 2 / den)


def sampson_errors(f, p, q) -> np.ndarray:
    m = _as_matrix(f)
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    fy = p @ m[:, :2].T + m[:, 2]
    fty = q @ m[:2, :] + m[2, :]
    num = (q[:, 0] * fy[:, 0] + q[:, 1] * fy[:, 1] + fy[:, 2]) ** 2
    den = fy[:, 0] ** 2 + fy[:, 1] ** 2 + fty[:, 0] ** 2 + fty[:, 1] ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        out = num / den
    return np.where(den <= EPS_PROJ ** 2, np.inf, out)


def hartley_normalization(pts) -> tuple[np.ndarray, np.ndarray]:
    """Similarity moving the centroid to the origin at mean distance sqrt(2).

    Returns the transform ``T`` and the transformed points.
    """
    pts = np.asarray(pts, dtype=float)
    c = pts.mean(axis=0)
    d = np.hypot(*(pts - c).T).mean()
    if not d > 1e-12 * max(1.0, np.abs(c).max()):
        raise DegenerateSample("points are coincident")
    s = np.sqrt(2.0) / d
    t = np.array([[s, 0.0, -s * c[0]], [0.0, s, -s * c[1]], [0.0, 0.0, 1.0]])
    return t, (pts - c) * s


def _pairs_arrays(pairs):
    if isinstance(pairs, tuple) and len(pairs) == 2:
        p, q = pairs
        return np.asarray(p, dtype=float).reshape(-1, 2), np.asarray(q, dtype=float).reshape(-1, 2)
    pairs = list(pairs)
    p = np.array([[c.p.x, c.p.y] for c in pairs], dtype=float).reshape(-1, 2)
    q = np.array([[c.q.x, c.q.y] for c in pairs], dtype=float).reshape(-1, 2)
    return p, q


def _has_collinear_triplet(pts: np.ndarray) -> bool:
    for i, j, k in itertools.combinations(range(len(pts)), 3):
        a = pts[j] - pts[i]
        b = pts[k] - pts[i]
        if abs(a[0] * b[1] - a[1] * b[0]) < _COLLINEAR_TOL:
            return True
    return False


def homography_dlt(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Normalized DLT on coordinate arrays; returns an uncanonicalized 3x3 matrix."""
    if len(p) < 4:
        raise DegenerateSample("a homography needs at least 4 correspondences")
    t1, pn = hartley_normalization(p)
    t2, qn = hartley_normalization(q)
    if len(p) == 4 and (_has_collinear_triplet(pn) or _has_collinear_triplet(qn)):
        raise DegenerateSample("three of the four points are collinear")
    n = len(p)
    x, y = pn[:, 0], pn[:, 1]
    u, v = qn[:, 0], qn[:, 1]
    zero, one = np.zeros(n), np.ones(n)
    a = np.empty((2 * n, 9))
    a[0::2] = np.column_stack([x, y, one, zero, zero, zero, -u * x, -u * y, -u])
    a[1::2] = np.column_stack([zero, zero, zero, x, y, one, -v * x, -v * y, -v])
    _, s, vt = np.linalg.svd(a, full_matrices=len(a) < 9)
    if len(s) < 8 or s[7] < _RANK_TOL * s[0]:
        raise DegenerateSample("design matrix is rank deficient")
    hn = vt[-1].reshape(3, 3)
    h = np.linalg.solve(t2, hn @ t1)
    if not np.isfinite(h).all() or not np.any(h):
        raise DegenerateSample("homography estimate is not finite")
    return h


def estimate_homography(pairs) -> Homography:
    """Least-squares homography from four or more correspondences.

    ``pairs`` is a sequence of :class:`Correspondence` or a ``(p, q)`` tuple of
    coordinate arrays.
    """
    p, q = _pairs_arrays(pairs)
    return Homography.from_matrix(homography_dlt(p, q))


def fundamental_8point(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    if len(p) < 8:
        raise DegenerateSample("the 8-point algorithm needs at least 8 correspondences")
    t1, pn = hartley_normalization(p)
    t2, qn = hartley_normalization(q)
    x, y = pn[:, 0], pn[:, 1]
    u, v = qn[:, 0], qn[:, 1]
    a = np.column_stack([u * x, u * y, u, v * x, v * y, v, x, y, np.ones(len(p))])
    _, s, vt = np.linalg.svd(a, full_matrices=len(a) < 9)
    if len(s) < 8 or s[7] < _RANK_TOL * s[0]:
        raise DegenerateSample("design matrix is rank deficient")
    fn = vt[-1].reshape(3, 3)
    uu, ss, vv = np.linalg.svd(fn)
    ss[2] = 0.0
    fn = uu @ np.diag(ss) @ vv
    f = t2.T @ fn @ t1
    if not np.isfinite(f).all() or not np.any(f):
        raise DegenerateSample("fundamental estimate is not finite")
    return f


def estimate_fundamental(pairs) -> Fundamental:
    """Normalized 8-point fundamental matrix with rank-2 enforcement."""
    p, q = _pairs_arrays(pairs)
    return Fundamental.from_matrix(fundamental_8point(p, q))


def _otsu_bins(values: np.ndarray) -> tuple[np.ndarray, float, float]:
    lo, hi = float(values.min()), float(values.max())
    if not hi > lo:
        raise NoSeparation("all values are equal")
    idx = np.floor((values - lo) / (hi - lo) * 256.0).astype(np.int64)
    return np.clip(idx, 0, 255), lo, hi


def otsu_threshold(values) -> float:
    """Otsu split of ``values`` over 256 equal-width bins spanning [min, max].

    Class means are measured in bin-index units so every between-class
    variance is computed from exact integer sums; ties go to the lowest
    boundary.  Returns the boundary value ``lo + k * (hi - lo) / 256``.
    """
    values = np.asarray(values, dtype=float).reshape(-1)
    if len(values) < 2:
        raise NoSeparation("need at least two values")
    idx, lo, hi = _otsu_bins(values)
    counts = np.bincount(idx, minlength=256).astype(np.float64)
    weighted = counts * np.arange(256)
    n0 = np.cumsum(counts)[:-1]
    s0 = np.cumsum(weighted)[:-1]
    n1 = counts.sum() - n0
    s1 = weighted.sum() - s0
    valid = (n0 > 0) & (n1 > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        between = (n1 * s0 - n0 * s1) ** 2 / (n0 * n1)
    between = np.where(valid, between, -1.0)
    k = int(np.argmax(between)) + 1
    return lo + k * (hi - lo) / 256.0


def principal_eigenvector(a, tol: float = 1e-8, max_iter: int = 1000) -> tuple[np.ndarray, bool]:
    """Dominant eigenvector of a symmetric nonnegative matrix by power iteration.

    Starts from the uniform unit vector.  Returns ``(v, converged)``; when the
    iteration budget runs out the last iterate is returned with
    ``converged=False``.
    """
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    if n == 0 or not np.any(a):
        raise ZeroMatrix("power iteration on a zero matrix")
    v = np.full(n, 1.0 / np.sqrt(n))
    for _ in range(max_iter):
        w = a @ v
        norm = np.linalg.norm(w)
        if norm == 0.0:
            raise ZeroMatrix("iterate vanished (start vector in the null space)")
        w /= norm
        if np.linalg.norm(w - v) < tol:
            return w, True
        v = w
    return v, False
