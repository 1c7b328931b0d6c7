"""Scikit-learn style wrappers around the selectors.

``fit(X)`` runs the selector on ``X`` (an ``(N, 4)`` array or a
:class:`CorrespondenceSet`) and stores the outcome; ``predict`` returns the
inlier mask of the fitted set, ``fit_predict`` returns +1 for inliers and -1
for outliers like the outlier detectors in scikit-learn.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, OutlierMixin
from sklearn.utils.validation import check_is_fitted

from .params import (GmsParams, GtmParams, LpmParams, NnsrParams, RansacParams, StParams,
                     UsacParams, VfcParams)
from .selectors import SELECTORS
from .validation import check_correspondences


class BaseSelector(OutlierMixin, BaseEstimator):
    method: str = ""
    params_class: type = type(None)

    def _params(self):
        names = self.params_class.__dataclass_fields__
        return self.params_class(**{k: getattr(self, k) for k in names})

    def fit(self, X, y=None, quality=None, affine=None):
        cs = check_correspondences(X, quality=quality, affine=affine)
        self.result_ = SELECTORS[self.method](cs, self._params(), self.random_state)
        n = len(cs)
        self.n_features_in_ = 4
        self.inlier_mask_ = self.result_.mask(n)
        self.selected_ = self.result_.selected
        self.confidence_ = self.result_.confidence
        self.model_ = self.result_.model
        self.flags_ = self.result_.flags
        return self

    def predict(self, X=None):
        check_is_fitted(self, "inlier_mask_")
        return self.inlier_mask_.copy()

    def fit_predict(self, X, y=None, **fit_params):
        mask = self.fit(X, **fit_params).inlier_mask_
        return np.where(mask, 1, -1)


class NNSR(BaseSelector):
    method, params_class = "nnsr", NnsrParams

    def __init__(self, t_nnsr=None, random_state=0):
        self.t_nnsr = t_nnsr
        self.random_state = random_state


class RANSAC(BaseSelector):
    method, params_class = "ransac", RansacParams

    def __init__(self, t_ransac=10.0, n_ransac=2000, confidence=0.99, model_kind="homography",
                 random_state=0):
        self.t_ransac = t_ransac
        self.n_ransac = n_ransac
        self.confidence = confidence
        self.model_kind = model_kind
        self.random_state = random_state


class SpectralTechnique(BaseSelector):
    method, params_class = "st", StParams

    def __init__(self, t_st=0.3, random_state=0):
        self.t_st = t_st
        self.random_state = random_state


class GTM(BaseSelector):
    method, params_class = "gtm", GtmParams

    def __init__(self, lambda_gtm=1e-4, n_gtm=100, t_gtm=None, random_state=0):
        self.lambda_gtm = lambda_gtm
        self.n_gtm = n_gtm
        self.t_gtm = t_gtm
        self.random_state = random_state


class USAC(BaseSelector):
    method, params_class = "usac", UsacParams

    def __init__(self, n_usac=850000, t_H=10.0, t_F=1.5, model_kind="homography", sprt_eps0=0.2,
                 sprt_delta0=0.05, lo_inner_rounds=10, confidence=0.99, random_state=0):
        self.n_usac = n_usac
        self.t_H = t_H
        self.t_F = t_F
        self.model_kind = model_kind
        self.sprt_eps0 = sprt_eps0
        self.sprt_delta0 = sprt_delta0
        self.lo_inner_rounds = lo_inner_rounds
        self.confidence = confidence
        self.random_state = random_state


class VFC(BaseSelector):
    method, params_class = "vfc", VfcParams

    def __init__(self, beta=0.1, lambda_vfc=3.0, t_vfc=0.75, gamma0=0.9, max_em_iters=500,
                 tol=1e-5, max_dense=1000, n_control=100, random_state=0):
        self.beta = beta
        self.lambda_vfc = lambda_vfc
        self.t_vfc = t_vfc
        self.gamma0 = gamma0
        self.max_em_iters = max_em_iters
        self.tol = tol
        self.max_dense = max_dense
        self.n_control = n_control
        self.random_state = random_state


class GMS(BaseSelector):
    method, params_class = "gms", GmsParams

    def __init__(self, alpha=4.0, grid=20, random_state=0):
        self.alpha = alpha
        self.grid = grid
        self.random_state = random_state


class LPM(BaseSelector):
    method, params_class = "lpm", LpmParams

    def __init__(self, lambda_lpm=6.0, k=4, normalize_coords=True, random_state=0):
        self.lambda_lpm = lambda_lpm
        self.k = k
        self.normalize_coords = normalize_coords
        self.random_state = random_state


ESTIMATORS = {cls.method: cls for cls in (NNSR, RANSAC, SpectralTechnique, GTM, USAC, VFC, GMS, LPM)}
