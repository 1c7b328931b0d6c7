import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from corrsel.exceptions import DegenerateModel, InvalidInput
from corrsel.model import (Correspondence, CorrespondenceSet, Fundamental, Homography, LocalAffine,
                           Point2, SelectionResult, canonicalize_model)

finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)


def test_point_rejects_nonfinite():
    with pytest.raises(InvalidInput):
        Point2(float("nan"), 0.0)


def test_affine_needs_nonzero_determinant():
    with pytest.raises(InvalidInput):
        LocalAffine(1.0, 2.0, 2.0, 4.0)


def test_quality_range_checked():
    with pytest.raises(InvalidInput):
        Correspondence(Point2(0, 0), Point2(1, 1), quality=1.5)


def test_canonical_identity():
    h = canonicalize_model(np.eye(3))
    assert np.allclose(np.diag(h), 1 / math.sqrt(3))
    assert np.array_equal(canonicalize_model(2 * np.eye(3)), h)
    assert np.array_equal(canonicalize_model(-np.eye(3)), h)


def test_zero_model_rejected():
    with pytest.raises(DegenerateModel):
        canonicalize_model(np.zeros(9))


@given(arrays(np.float64, 9, elements=finite), st.floats(0.01, 100) | st.floats(-100, -0.01))
def test_canonical_scale_invariant_and_idempotent(m, k):
    if np.linalg.norm(m) < 1e-3:
        return
    c = canonicalize_model(m)
    assert np.allclose(canonicalize_model(k * m), c, atol=1e-12)
    assert np.allclose(canonicalize_model(c), c, atol=1e-15)
    assert math.isclose(np.linalg.norm(c), 1.0, rel_tol=1e-12)
    assert c.ravel()[np.flatnonzero(np.abs(c.ravel()) > 1e-12)[-1]] > 0


def test_fundamental_rank_two(rng):
    f = Fundamental.from_matrix(rng.normal(size=(3, 3)))
    s = np.linalg.svd(f.matrix, compute_uv=False)
    assert s[2] < 1e-12


def test_set_items_round_trip():
    items = [Correspondence(Point2(1, 2), Point2(3, 4), quality=0.5, affine=LocalAffine(1, 0, 0, 1),
                            gt_label=True),
             Correspondence(Point2(5, 6), Point2(7, 8))]
    cs = CorrespondenceSet.from_items(items, image1_size=(10, 10), image2_size=(10, 10))
    assert len(cs) == 2
    assert cs[0] == items[0]
    assert cs[1].quality is None and cs[1].affine is None
    assert list(cs) == items


def test_set_margin_enforced():
    with pytest.raises(InvalidInput):
        CorrespondenceSet([[500.0, 0.0]], [[0.0, 0.0]], image1_size=(100, 100), image2_size=(100, 100))
    cs = CorrespondenceSet([[105.0, 0.0]], [[0.0, 0.0]], image1_size=(100, 100), image2_size=(100, 100))
    assert len(cs) == 1


def test_set_arrays_read_only():
    cs = CorrespondenceSet([[1.0, 1.0]], [[2.0, 2.0]], image1_size=(10, 10), image2_size=(10, 10))
    with pytest.raises(ValueError):
        cs.p[0, 0] = 3.0


def test_selection_result_unique_sorted_and_mask():
    r = SelectionResult([3, 1, 3])
    assert r.selected.tolist() == [1, 3]
    assert r.mask(5).tolist() == [False, True, False, True, False]
    with pytest.raises(InvalidInput):
        r.mask(3)


def test_homography_from_matrix_canonical():
    h = Homography.from_matrix(3 * np.eye(3))
    assert np.allclose(h.matrix, np.eye(3) / math.sqrt(3))
