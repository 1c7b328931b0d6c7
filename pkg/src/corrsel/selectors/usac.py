"""USAC-style pipeline: PROSAC sampling, SPRT verification, degeneracy test, local optimization."""

from __future__ import annotations

import itertools
import math
import time

import numpy as np

from ..exceptions import DegenerateSample, NoModel, TooFewMatches
from ..geometry import homography_dlt, transfer_errors
from ..model import CorrespondenceSet, SelectionResult
from ..params import UsacParams
from ._sampling import ModelKind, adaptive_bound

# Cost of one model fit, measured in single-point verifications, and the
# number of models a minimal sample yields.  Both feed the SPRT threshold.
_T_MODEL = 200.0
_MODELS_PER_SAMPLE = 1.0
# Relative drift of the observed bad-model consistency rate before delta is re-estimated.
_DELTA_DRIFT = 0.05


def sprt_threshold(eps: float, delta: float) -> float:
    """Decision threshold ``A`` of the sequential test.

    Solves ``A = K + 1 + log(A)`` by fixed-point iteration, with
    ``K = t_M * C / m_S`` and ``C`` the Kullback-Leibler divergence between
    the bad- and good-model Bernoulli distributions.
    """
    c = (1.0 - delta) * math.log((1.0 - delta) / (1.0 - eps)) + delta * math.log(delta / eps)
    k = _T_MODEL * c / _MODELS_PER_SAMPLE
    a = k + 1.0
    for _ in range(100):
        nxt = k + 1.0 + math.log(a)
        if abs(nxt - a) < 1e-10:
            break
        a = nxt
    return a


def sprt_decision(consistent: np.ndarray, eps: float, delta: float, threshold: float) -> tuple[bool, int]:
    """Run the likelihood-ratio test over ``consistent`` in order.

    Returns ``(accepted, n_tested)``.  The ratio multiplies ``delta/eps`` for a
    consistent point and ``(1-delta)/(1-eps)`` otherwise; the model is rejected
    the first time it exceeds ``threshold``.
    """
    step = np.where(consistent, math.log(delta / eps), math.log((1.0 - delta) / (1.0 - eps)))
    over = np.flatnonzero(np.cumsum(step) > math.log(threshold))
    if len(over):
        return False, int(over[0]) + 1
    return True, len(consistent)


class ProsacSampler:
    """Progressive sampler over correspondences sorted best-first.

    The pool starts at the minimal sample size and grows following the
    growth function of the original scheme with ``T_N = max_samples``: each
    draw takes ``m - 1`` points from the first ``n - 1`` and always includes
    the ``n``-th, until the pool has been used up, after which draws are
    uniform within the pool.
    """

    def __init__(self, order: np.ndarray, m: int, max_samples: int, rng: np.random.Generator):
        self.order = order
        self.m = m
        self.size = len(order)
        self.rng = rng
        self.n = m
        self.t = 0
        # T_n for n = m, proportional to C(n, m) / C(N, m)
        tn = float(max_samples)
        for i in range(m):
            tn *= (m - i) / (self.size - i)
        self._tn = tn
        self._tn_prime = 1

    def _grow(self):
        n, m = self.n, self.m
        tn_next = self._tn * (n + 1) / (n + 1 - m)
        self._tn_prime += math.ceil(tn_next - self._tn)
        self._tn = tn_next
        self.n += 1

    def draw(self) -> np.ndarray:
        self.t += 1
        if self.t > self._tn_prime and self.n < self.size:
            self._grow()
        if self._tn_prime < self.t or self.n == self.m:
            pos = self._distinct(self.n, self.m)
        else:
            pos = np.append(self._distinct(self.n - 1, self.m - 1), self.n - 1)
        return self.order[pos]

    def _distinct(self, n: int, k: int) -> np.ndarray:
        while True:
            s = self.rng.integers(0, n, size=k)
            if len(set(s.tolist())) == k:
                return s


def _is_planar_degenerate(p: np.ndarray, q: np.ndarray, t_h: float) -> bool:
    """True when five or more of the sampled pairs agree with one homography."""
    for quad in itertools.combinations(range(len(p)), 4):
        quad = list(quad)
        try:
            h = homography_dlt(p[quad], q[quad])
        except (DegenerateSample, np.linalg.LinAlgError):
            continue
        if int((transfer_errors(h, p, q) <= t_h).sum()) >= 5:
            return True
    return False


def select_usac(cs: CorrespondenceSet, params: UsacParams | None = None, seed: int = 0) -> SelectionResult:
    """Hypothesize-and-verify with progressive sampling and early model rejection.

    Homographies are scored by transfer error against ``t_H``; fundamental
    matrices by the epipolar quotient against ``t_F ** 2``.  An empty flagged
    selection is a legitimate outcome when every hypothesis was rejected.
    """
    params = params or UsacParams()
    start = time.perf_counter()
    threshold = params.t_H if params.model_kind == "homography" else params.t_F
    kind = ModelKind(params.model_kind, threshold)
    n, m = len(cs), kind.sample_size
    if n < m:
        raise TooFewMatches(f"{params.model_kind} USAC needs at least {m} matches, got {n}")
    p, q = cs.p, cs.q
    rng = np.random.default_rng(seed)
    flags = []
    if cs.has_quality:
        order = np.argsort(cs.quality, kind="stable")
    else:
        order = np.arange(n)
        flags.append("input-order")
    sampler = ProsacSampler(order, m, params.n_usac, rng)
    verify_order = rng.permutation(n)

    eps, delta = params.sprt_eps0, params.sprt_delta0
    sprt_a = sprt_threshold(eps, delta)
    rejected_rates = []

    best_model, best_inl, best_count = None, None, -1
    history = []
    fitted_any = False
    limit = float(params.n_usac)
    drawn = 0
    while drawn < limit:
        drawn += 1
        sample = sampler.draw()
        try:
            model = kind.fit(p[sample], q[sample])
        except (DegenerateSample, np.linalg.LinAlgError):
            continue
        fitted_any = True

        offset = int(rng.integers(n))
        perm = np.roll(verify_order, offset)
        consistent = kind.residuals(model, p[perm], q[perm]) <= kind.threshold
        accepted, tested = sprt_decision(consistent, eps, delta, sprt_a)
        if not accepted:
            rejected_rates.append(consistent[:tested].mean())
            observed = float(np.mean(rejected_rates))
            if abs(observed - delta) > _DELTA_DRIFT * delta and 0.0 < observed < eps:
                delta = observed
                sprt_a = sprt_threshold(eps, delta)
            continue

        count = int(consistent.sum())
        if count <= best_count:
            continue
        if kind.kind == "fundamental" and _is_planar_degenerate(p[sample], q[sample], params.t_H):
            continue
        inl = kind.inliers(model, p, q)
        model, inl = _local_optimization(kind, model, inl, p, q, params.lo_inner_rounds)
        count = int(inl.sum())
        if count <= best_count:
            continue
        best_model, best_inl, best_count = model, inl, count
        history.append((drawn, np.flatnonzero(inl)))
        ratio = count / n
        if delta < ratio < 1.0:
            eps = ratio
            sprt_a = sprt_threshold(eps, delta)
        limit = min(float(params.n_usac), adaptive_bound(ratio, m, params.confidence))

    if not fitted_any:
        raise NoModel(f"all {drawn} samples were degenerate")
    if best_model is None:
        flags.append("empty-selection")
        return SelectionResult([], iterations_used=drawn, flags=tuple(flags), method="usac",
                               runtime=time.perf_counter() - start, history=history)
    wrapped = kind.wrap(best_model)
    selected = np.flatnonzero(kind.inliers(wrapped.matrix, p, q))
    if not len(selected):
        flags.append("empty-selection")
    return SelectionResult(selected, model=wrapped, iterations_used=drawn, flags=tuple(flags),
                           method="usac", runtime=time.perf_counter() - start, history=history)


def _local_optimization(kind: ModelKind, model, inl, p, q, rounds: int):
    for _ in range(rounds):
        if inl.sum() < kind.sample_size:
            break
        try:
            refit = kind.fit(p[inl], q[inl])
        except (DegenerateSample, np.linalg.LinAlgError):
            break
        new_inl = kind.inliers(refit, p, q)
        if new_inl.sum() <= inl.sum():
            break
        model, inl = refit, new_inl
    return model, inl
