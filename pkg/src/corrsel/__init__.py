"""Correspondence selection: eight selectors, a synthetic scene generator and metrics."""

from .estimators import ESTIMATORS, GMS, GTM, LPM, NNSR, RANSAC, USAC, VFC, SpectralTechnique
from .exceptions import *  # noqa: F401,F403
from .geometry import (estimate_fundamental, estimate_homography, otsu_threshold,
                       principal_eigenvector, sampson_errors, transfer_errors)
from .metrics import EvaluationReport, bench, evaluate
from .model import (Correspondence, CorrespondenceSet, Fundamental, Homography, LocalAffine,
                    Point2, SelectionResult)
from .params import PARAMS_BY_METHOD
from .selectors import METHODS, run_selector
from .synthgen import GroundTruth, SceneSpec, generate_scene, label_against_homography
from .validation import check_correspondences

__version__ = "0.1.0"
