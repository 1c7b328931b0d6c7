import math

import numpy as np
import pytest

from corrsel.exceptions import GenerationFailure, InvalidInput
from corrsel.geometry import transfer_errors
from corrsel.model import Homography
from corrsel.synthgen import (MultiStructure, RandomPerspective, Rotation, SceneSpec, Translation,
                              Zoom, generate_scene, label_against_homography, parse_transform,
                              rotation_homography)

from conftest import make_set


def test_exact_scene_zero_residual():
    cs, gt = generate_scene(SceneSpec(300, 1.0, 0.0, transform=RandomPerspective(), seed=3))
    assert transfer_errors(gt.H.matrix, cs.p, cs.q).max() < 1e-9


def test_inlier_count():
    cs, gt = generate_scene(SceneSpec(1000, 0.5, seed=1))
    assert int(gt.labels.sum()) == 500 and int((cs.labels == 1).sum()) == 500
    cs, gt = generate_scene(SceneSpec(7, 0.5, seed=1))
    assert int(gt.labels.sum()) == 4


def test_rotation_ground_truth():
    cs, gt = generate_scene(SceneSpec(200, 1.0, 0.0, transform=Rotation(90), seed=2))
    h = np.array([[0, -1, 560], [1, 0, -80], [0, 0, 1.0]])
    assert np.allclose(gt.H.matrix, Homography.from_matrix(h).matrix, atol=1e-15)
    assert np.allclose(rotation_homography(90, (640, 480)), h)
    assert transfer_errors(gt.H.matrix, cs.p, cs.q).max() < 1e-9


def test_deterministic():
    spec = SceneSpec(400, 0.3, 1.0, transform=RandomPerspective(), quality_model="uncorrelated",
                     affine_frames=True, seed=9)
    a, ga = generate_scene(spec)
    b, gb = generate_scene(spec)
    assert a == b and ga.H == gb.H
    c, _ = generate_scene(SceneSpec(400, 0.3, 1.0, transform=RandomPerspective(), seed=10))
    assert not np.array_equal(a.p, c.p)


def test_quality_ranges():
    cs, gt = generate_scene(SceneSpec(2000, 0.5, seed=4))
    qi, qo = cs.quality[gt.labels], cs.quality[~gt.labels]
    assert qi.min() >= 0.3 and qi.max() <= 0.75
    assert qo.min() >= 0.6 and qo.max() <= 1.0
    cs, _ = generate_scene(SceneSpec(50, 0.5, quality_model=None, seed=4))
    assert not cs.has_quality


def test_affine_frames_match_jacobian():
    cs, gt = generate_scene(SceneSpec(50, 1.0, 0.0, transform=RandomPerspective(), affine_frames=True, seed=5))
    h = gt.H.matrix
    eps = 1e-4
    for i in range(5):
        p = cs.p[i]
        num = np.empty((2, 2))
        for k in range(2):
            d = np.zeros(2)
            d[k] = eps
            a = np.append(p + d, 1) @ h.T
            b = np.append(p - d, 1) @ h.T
            num[:, k] = (a[:2] / a[2] - b[:2] / b[2]) / (2 * eps)
        assert np.allclose(cs.affine[i], num, atol=1e-6)


def test_multi_structure_labels_only():
    cs, gt = generate_scene(SceneSpec(400, 0.5, 1.0, transform=MultiStructure(), seed=6))
    assert gt.kind == "labels" and gt.H is None and gt.labels.sum() == 200


def test_label_against_homography_boundaries():
    cs = make_set([[0, 0], [0, 0], [0, 0]], [[0, 0], [10, 0], [10.001, 0]])
    assert label_against_homography(cs, np.eye(3), 10.0).tolist() == [True, True, False]


def test_label_consistency_noise_free():
    for seed in range(5):
        cs, gt = generate_scene(SceneSpec(1000, 0.5, 0.0, seed=seed))
        lab = label_against_homography(cs, gt.H, 10.0)
        # every generator inlier is recovered; disagreements can only be
        # uniform outliers landing on the model by chance
        assert np.all(lab[gt.labels])
        assert (lab & ~gt.labels).sum() <= 5


def test_outlier_incoherence_bound():
    hits = total = 0
    for seed in range(10):
        cs, gt = generate_scene(SceneSpec(2000, 0.2, 1.0, seed=seed))
        err = transfer_errors(gt.H.matrix, cs.p[~gt.labels], cs.q[~gt.labels])
        hits += int((err <= 10).sum())
        total += int((~gt.labels).sum())
    bound = math.pi * 100 * 1.2 ** 2 / (640 * 480)
    # allow three binomial standard deviations of sampling slack
    assert hits / total <= bound + 3 * math.sqrt(bound / total)


def test_noise_tail():
    cs, gt = generate_scene(SceneSpec(5000, 1.0, 1.0, seed=7))
    err = transfer_errors(gt.H.matrix, cs.p, cs.q)
    # P(|N2(0, 1)| > 4) = exp(-8)
    assert (err > 4).mean() < 10 * math.exp(-8)


def test_generation_failure():
    with pytest.raises(GenerationFailure):
        generate_scene(SceneSpec(20, 1.0, 0.0, transform=Translation(5000, 0), seed=0))


def test_spec_validation_and_parsing():
    with pytest.raises(InvalidInput):
        SceneSpec(0)
    with pytest.raises(InvalidInput):
        SceneSpec(10, transform=MultiStructure((None, None), (0.3, 0.3)))
    assert parse_transform("translation:30,10") == Translation(30, 10)
    assert parse_transform("rotation:45") == Rotation(45)
    assert parse_transform("zoom:1.5") == Zoom(1.5)
    assert parse_transform("homography") == RandomPerspective()
    assert len(parse_transform("multi:3").homographies) == 3
    with pytest.raises(InvalidInput):
        parse_transform("shear:2")
