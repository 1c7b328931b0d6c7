"""Input checking for the estimator front end."""

from __future__ import annotations

import numpy as np
from sklearn.utils import check_array

from .exceptions import InvalidInput
from .model import CorrespondenceSet


def check_correspondences(X, quality=None, affine=None, image1_size=None, image2_size=None,
                          margin=None) -> CorrespondenceSet:
    """Turn ``X`` into a :class:`CorrespondenceSet`.

    ``X`` is either a set already (returned unchanged) or an ``(N, 4)`` array
    of rows ``x, y, x', y'``.  ``quality`` is an optional ``(N,)`` array and
    ``affine`` an optional ``(N, 2, 2)`` or ``(N, 4)`` array.
    """
    if isinstance(X, CorrespondenceSet):
        return X
    try:
        arr = check_array(X, dtype=np.float64, ensure_min_samples=0)
    except ValueError as exc:
        raise InvalidInput(str(exc)) from exc
    if arr.shape[1] != 4:
        raise InvalidInput(f"expected 4 columns (x, y, x', y'), got {arr.shape[1]}")
    n = len(arr)
    if quality is not None:
        quality = np.asarray(quality, dtype=float).reshape(-1)
        if quality.shape != (n,):
            raise InvalidInput("quality must have one entry per row")
    if affine is not None:
        affine = np.asarray(affine, dtype=float)
        if affine.shape in ((n, 4), (n, 2, 2)):
            affine = affine.reshape(n, 2, 2)
        else:
            raise InvalidInput("affine must have shape (N, 4) or (N, 2, 2)")
    return CorrespondenceSet(arr[:, :2], arr[:, 2:], quality, affine, None,
                             image1_size, image2_size, margin=margin)
