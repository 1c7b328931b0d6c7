"""Model plumbing shared by the hypothesize-and-verify selectors."""

from __future__ import annotations

import math

import numpy as np

from ..geometry import fundamental_8point, homography_dlt, sampson_errors, transfer_errors
from ..model import Fundamental, Homography


class ModelKind:
    """Fit/score functions for one model family.

    ``threshold`` is already expressed in the units the residual returns:
    pixels for homographies, squared pixels for the epipolar quotient.
    """

    def __init__(self, kind: str, threshold: float):
        self.kind = kind
        if kind == "homography":
            self.sample_size = 4
            self.fit = homography_dlt
            self.residuals = transfer_errors
            self.wrap = Homography.from_matrix
            self.threshold = threshold
        else:
            self.sample_size = 8
            self.fit = fundamental_8point
            self.residuals = sampson_errors
            self.wrap = Fundamental.from_matrix
            self.threshold = threshold * threshold

    def inliers(self, model, p, q) -> np.ndarray:
        return self.residuals(model, p, q) <= self.threshold


def draw_sample(rng: np.random.Generator, n: int, m: int) -> np.ndarray:
    """``m`` distinct indices from ``range(n)``, rejection-sampled."""
    while True:
        s = rng.integers(0, n, size=m)
        if len(set(s.tolist())) == m:
            return s


def adaptive_bound(inlier_ratio: float, m: int, confidence: float) -> float:
    """Hypotheses needed to draw one all-inlier sample with probability ``confidence``."""
    if inlier_ratio <= 0.0:
        return math.inf
    good = inlier_ratio ** m
    if good >= 1.0:
        return 1.0
    return math.log(1.0 - confidence) / math.log(1.0 - good)
