import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from corrsel.exceptions import InvalidInput, MissingAffine, MissingQuality, TooFewMatches
from corrsel.geometry import otsu_threshold, project_points, sampson_errors, transfer_errors
from corrsel.metrics import evaluate
from corrsel.model import Correspondence, LocalAffine, Point2
from corrsel.params import GtmParams, LpmParams, NnsrParams, RansacParams, StParams, UsacParams
from corrsel.selectors import (METHODS, GmsStatModel, gms_distribution, gtm_payoff,
                               gtm_payoff_matrix, lpm_cost, lpm_total_cost, replicator_dynamics,
                               run_selector, select_gms, select_gtm, select_lpm, select_nnsr,
                               select_ransac, select_st, select_usac, select_vfc, st_affinity)
from corrsel.selectors.usac import ProsacSampler, sprt_decision, sprt_threshold
from corrsel.selectors.vfc import vfc_e_step, vfc_gamma
from corrsel.synthgen import SceneSpec, Translation, generate_scene

from conftest import make_set, random_homography


def scene_80_20(rng, exact=True):
    h = random_homography(rng, strength=0.1)
    p = rng.uniform(50, 590, size=(100, 2))
    q = project_points(h, p)
    out = np.arange(80, 100)
    # outliers displaced by more than 50 px
    ang = rng.uniform(0, 2 * np.pi, 20)
    q[out] += np.column_stack([np.cos(ang), np.sin(ang)]) * rng.uniform(60, 200, (20, 1))
    quality = np.concatenate([rng.uniform(0.3, 0.75, 80), rng.uniform(0.6, 1.0, 20)])
    return make_set(p, q, quality=quality), h


# NNSR

def test_nnsr_adaptive_split():
    cs = make_set(np.zeros((4, 2)), np.zeros((4, 2)), quality=[0.2, 0.3, 0.8, 0.9])
    assert select_nnsr(cs).selected.tolist() == [0, 1]


def test_nnsr_fixed_inclusive():
    cs = make_set(np.zeros((3, 2)), np.zeros((3, 2)), quality=[0.5, 0.49, 0.51])
    assert select_nnsr(cs, NnsrParams(0.5)).selected.tolist() == [0, 1]


def test_nnsr_empty_missing_and_flat():
    empty = make_set(np.zeros((0, 2)), np.zeros((0, 2)), image1_size=(1, 1), image2_size=(1, 1))
    assert len(select_nnsr(empty).selected) == 0
    with pytest.raises(MissingQuality):
        select_nnsr(make_set(np.zeros((2, 2)), np.zeros((2, 2))))
    flat = make_set(np.zeros((3, 2)), np.zeros((3, 2)), quality=[0.4] * 3)
    r = select_nnsr(flat)
    assert r.selected.tolist() == [0, 1, 2] and "no-separation" in r.flags


@given(st.lists(st.floats(0, 1), min_size=1, max_size=30), st.floats(0, 1), st.floats(0, 1))
def test_nnsr_threshold_monotone(q, t1, t2):
    lo, hi = sorted((t1, t2))
    cs = make_set(np.zeros((len(q), 2)), np.zeros((len(q), 2)), quality=q)
    a = set(select_nnsr(cs, NnsrParams(lo)).selected.tolist())
    b = set(select_nnsr(cs, NnsrParams(hi)).selected.tolist())
    assert a <= b


# RANSAC

def test_ransac_80_20(rng):
    cs, h = scene_80_20(rng)
    r = select_ransac(cs, seed=3)
    assert r.selected.tolist() == list(range(80))


def test_ransac_total_consensus(rng):
    h = random_homography(rng)
    p = rng.uniform(0, 640, size=(30, 2))
    cs = make_set(p, project_points(h, p))
    r = select_ransac(cs)
    assert len(r.selected) == 30
    assert np.allclose(r.model.matrix, h / np.linalg.norm(h) * np.sign(h[2, 2]), atol=1e-8)


def test_ransac_too_few():
    with pytest.raises(TooFewMatches):
        select_ransac(make_set(np.zeros((3, 2)), np.zeros((3, 2))))


def test_ransac_fundamental_mode(rng):
    from test_geometry import _two_views
    p, q = _two_views(rng, 120)
    q[100:] = rng.uniform(0, 640, size=(20, 2))
    cs = make_set(p, q)
    r = select_ransac(cs, RansacParams(t_ransac=1.0, model_kind="fundamental"), seed=1)
    assert r.model.kind == "fundamental"
    assert set(range(100)) <= set(r.selected.tolist())
    assert (sampson_errors(r.model.matrix, p[r.selected], q[r.selected]) <= 1.0).all()


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10_000), st.floats(1.0, 20.0))
def test_ransac_soundness(seed, t):
    cs, _ = generate_scene(SceneSpec(200, 0.5, 1.0, seed=seed))
    r = select_ransac(cs, RansacParams(t_ransac=t), seed=seed)
    assert (transfer_errors(r.model.matrix, cs.p[r.selected], cs.q[r.selected]) <= t).all()


# ST

def test_st_affinity_examples():
    cs = make_set([[0, 0], [3, 4], [0, 0]], [[0, 0], [0, 5], [0, 0]])
    a = st_affinity(cs)
    assert a[0, 1] == 1.0 and np.all(np.diag(a) == 0)
    assert a[0, 2] == 0.0
    cs = make_set([[0, 0], [2, 0]], [[0, 0], [4, 0]])
    assert st_affinity(cs)[0, 1] == 0.5


def test_st_clique():
    p = np.array([[0, 0], [10, 0], [0, 10], [10, 10], [5, 5.0]])
    q = p + 5.0
    q[4] = [600, 600]
    cs = make_set(p, q)
    a = st_affinity(cs)
    assert (a[4, :4] <= 0.3).all()
    assert select_st(cs).selected.tolist() == [0, 1, 2, 3]


def test_st_pairs():
    cs = make_set([[0, 0], [10, 0]], [[0, 0], [10, 0]])
    assert select_st(cs).selected.tolist() == [0, 1]
    cs = make_set([[0, 0], [10, 0]], [[0, 0], [2, 0]])
    assert select_st(cs).selected.tolist() == [0]


def test_st_zero_affinity():
    cs = make_set(np.zeros((3, 2)), np.zeros((3, 2)))
    r = select_st(cs)
    assert len(r.selected) == 0 and "empty-selection" in r.flags


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000))
def test_st_conflict_free(seed):
    cs, _ = generate_scene(SceneSpec(60, 0.5, 1.0, seed=seed))
    r = select_st(cs)
    a = st_affinity(cs)
    for i, j in itertools.combinations(r.selected, 2):
        assert a[i, j] > 0.3


# GTM

def _with_affine(p, q, aff):
    return make_set(p, q, affine=np.asarray(aff, float).reshape(-1, 2, 2))


def test_gtm_payoff_examples():
    c = Correspondence(Point2(0, 0), Point2(1, 1), affine=LocalAffine(1, 0, 0, 1))
    d = Correspondence(Point2(5, 5), Point2(6, 6), affine=LocalAffine(1, 0, 0, 1))
    assert gtm_payoff(c, d, 1e-4) == 1.0
    e = Correspondence(Point2(5, 5), Point2(16, 6), affine=LocalAffine(1, 0, 0, 1))
    assert gtm_payoff(c, e, 1e-4) == pytest.approx(math.exp(-0.001), rel=1e-12)
    assert gtm_payoff(c, e, 1e-4) == gtm_payoff(e, c, 1e-4)
    with pytest.raises(MissingAffine):
        gtm_payoff(c, Correspondence(Point2(0, 0), Point2(0, 0)), 1e-4)


def test_gtm_matrix_matches_scalar(rng):
    cs, _ = generate_scene(SceneSpec(30, 0.5, 1.0, affine_frames=True, seed=4))
    m = gtm_payoff_matrix(cs, 1e-3)
    for i, j in [(0, 1), (3, 17), (29, 2)]:
        assert m[i, j] == pytest.approx(gtm_payoff(cs[i], cs[j], 1e-3), rel=1e-12)
    assert np.allclose(m, m.T) and np.all(np.diag(m) == 0)


def test_replicator_constant_fixed_point():
    p = np.full((5, 5), 0.7)
    np.fill_diagonal(p, 0)
    q, _, ok = replicator_dynamics(p, 50)
    assert ok and np.allclose(q, 0.2, atol=1e-15)


def test_replicator_concentrates():
    p = np.full((6, 6), math.exp(-10))
    p[:4, :4] = 1.0
    np.fill_diagonal(p, 0)
    q, _, _ = replicator_dynamics(p, 100)
    # oracle: scripted plain-python iteration
    ref = [1 / 6] * 6
    for _ in range(100):
        pq = [sum(p[i][j] * ref[j] for j in range(6)) for i in range(6)]
        mean = sum(ref[i] * pq[i] for i in range(6))
        nxt = [ref[i] * pq[i] / mean for i in range(6)]
        if max(abs(a - b) for a, b in zip(nxt, ref)) < 1e-9:
            ref = nxt
            break
        ref = nxt
    assert np.allclose(q, ref, atol=1e-12)
    assert q[:4].sum() > 0.99


def test_gtm_scale_invariance():
    rng = np.random.default_rng(0)
    p = rng.uniform(0, 1, (8, 8))
    p = p + p.T
    np.fill_diagonal(p, 0)
    a, _, _ = replicator_dynamics(p, 30)
    b, _, _ = replicator_dynamics(3.5 * p, 30)
    assert np.allclose(a, b, rtol=1e-10)


def test_gtm_selects_consistent_group():
    cs, gt = generate_scene(SceneSpec(200, 0.6, 0.5, affine_frames=True, seed=2))
    r = select_gtm(cs)
    row = evaluate(cs, r, gt).at(5.0)
    assert row.precision > 0.9 and row.recall > 0.8


def test_gtm_edge_cases():
    one = _with_affine([[1, 1]], [[2, 2]], [1, 0, 0, 1])
    r = select_gtm(one)
    assert r.selected.tolist() == [0] and "degenerate" in r.flags
    with pytest.raises(MissingAffine):
        select_gtm(make_set([[0, 0], [1, 1]], [[0, 0], [1, 1]]))


# USAC

def test_sprt_threshold_fixed_point():
    a = sprt_threshold(0.2, 0.05)
    c = 0.95 * math.log(0.95 / 0.8) + 0.05 * math.log(0.05 / 0.2)
    assert a == pytest.approx(200 * c + 1 + math.log(a), rel=1e-9)


def test_sprt_decision():
    a = sprt_threshold(0.5, 0.05)
    ok, n = sprt_decision(np.ones(100, bool), 0.5, 0.05, a)
    assert ok and n == 100
    ok, n = sprt_decision(np.zeros(100, bool), 0.5, 0.05, a)
    assert not ok and n < 100


def test_prosac_prefers_top_ranked():
    rng = np.random.default_rng(0)
    order = np.arange(1000)
    s = ProsacSampler(order, 4, 850000, rng)
    first = np.concatenate([s.draw() for _ in range(100)])
    # the pool grows roughly one point per draw early on, far below N
    assert first.max() < 100


def test_usac_80_20_vs_ransac(rng):
    cs, _ = scene_80_20(rng)
    u = select_usac(cs, seed=3)
    r = select_ransac(cs, seed=3)
    assert u.selected.tolist() == list(range(80))
    assert u.history[-1][0] <= r.history[-1][0]


def test_usac_total_consensus(rng):
    h = random_homography(rng)
    p = rng.uniform(0, 640, size=(50, 2))
    r = select_usac(make_set(p, project_points(h, p), quality=np.linspace(0, 1, 50)))
    assert len(r.selected) == 50 and r.history[0][0] == 1


def test_usac_input_order_flag(rng):
    cs, _ = scene_80_20(rng)
    plain = make_set(cs.p, cs.q)
    assert "input-order" in select_usac(plain).flags


def test_usac_low_inlier_ratio():
    cs, gt = generate_scene(SceneSpec(1000, 0.2, 1.0, seed=5))
    r = select_usac(cs, UsacParams(n_usac=100_000), seed=5)
    assert evaluate(cs, r, gt).at(10.0).recall >= 0.9


@settings(max_examples=8, deadline=None)
@given(st.integers(0, 10_000))
def test_usac_soundness(seed):
    cs, _ = generate_scene(SceneSpec(200, 0.5, 1.0, seed=seed))
    r = select_usac(cs, seed=seed)
    if r.model is not None:
        assert (transfer_errors(r.model.matrix, cs.p[r.selected], cs.q[r.selected]) <= 10).all()


# VFC

def test_vfc_gamma_and_estep():
    assert vfc_gamma(np.ones(7)) == 1.0
    assert np.all(vfc_e_step(np.array([0.0, 4.0, 100.0]), 1.0, 1.0, 3.0) == 1.0)


@settings(max_examples=30)
@given(st.lists(st.floats(0, 1e4), min_size=1, max_size=20), st.floats(0.01, 0.99),
       st.floats(1e-8, 1e3), st.floats(1e-3, 1e3))
def test_vfc_estep_bounded(r2, gamma, sigma2, a):
    p = vfc_e_step(np.asarray(r2), gamma, sigma2, a)
    assert np.all((p >= 0) & (p <= 1))


def test_vfc_translation_scene():
    cs, gt = generate_scene(SceneSpec(500, 0.7, 1.0, seed=11))
    r = select_vfc(cs)
    assert abs(r.stats["gamma"] - 0.7) <= 0.1
    assert np.all(r.confidence[gt.labels] > 0.75)


def test_vfc_sparse_path():
    cs, gt = generate_scene(SceneSpec(1500, 0.5, 1.0, seed=1))
    r = select_vfc(cs)
    assert "sparse-field" in r.flags
    assert evaluate(cs, r, gt).at(5.0).f_measure > 0.95


# GMS

def test_gms_distribution_examples():
    m = gms_distribution(GmsStatModel(K=9, n=4, delta=1.0, zeta=0.5, m=10, M=50))
    assert m.p_t == 1.0 and m.p_f == 0.0
    m = gms_distribution(GmsStatModel(K=9, n=4, delta=0.0, zeta=1.0, m=10, M=50))
    assert m.p_t == m.p_f == 0.2 and m.score == 0.0
    m = gms_distribution(GmsStatModel(K=9, n=4, delta=0.5, zeta=1.0, m=10, M=50))
    assert m.p_t == pytest.approx(0.6) and m.p_f == pytest.approx(0.1)
    expected = (36 * 0.6 - 36 * 0.1) / (math.sqrt(36 * 0.6 * 0.4) + math.sqrt(36 * 0.1 * 0.9))
    assert m.score == pytest.approx(expected, rel=1e-12)
    assert m.score == pytest.approx(3.798, abs=1e-3)
    with pytest.raises(InvalidInput):
        gms_distribution(GmsStatModel(K=9, n=4, delta=0.5, zeta=1.0, m=0, M=0))


def test_gms_separation_grows_with_support():
    scores = [gms_distribution(GmsStatModel(9, n, 0.5, 1.0, 10, 50)).score for n in (1, 4, 9, 16)]
    assert all(b > a for a, b in zip(scores, scores[1:]))
    assert scores[3] / scores[0] == pytest.approx(4.0, rel=1e-12)


def test_gms_nine_cell_block():
    centers = [(55 + 10 * i, 55 + 10 * j) for j in range(3) for i in range(3)]
    p = np.array(centers, float)
    cs = make_set(p, p, image1_size=(200, 200), image2_size=(200, 200))
    assert select_gms(cs).selected.tolist() == list(range(9))


def test_gms_isolated_rejected():
    cs = make_set([[105.0, 105.0]], [[105.0, 105.0]], image1_size=(200, 200), image2_size=(200, 200))
    assert len(select_gms(cs).selected) == 0


def test_gms_translation_precision():
    cs, gt = generate_scene(SceneSpec(5000, 0.8, 1.0, transform=Translation(64, 48), seed=0))
    r = select_gms(cs)
    assert evaluate(cs, r, gt).at(10.0).precision >= 0.9


# LPM

def test_lpm_identity_scene(rng):
    p = rng.uniform(0, 100, (10, 2))
    cs = make_set(p, p)
    from corrsel.selectors.lpm import knn_indices
    nn = knn_indices(p, 4)
    ref = 2 * np.linalg.norm(p[nn[0]] - p[0], axis=1).sum()
    assert lpm_cost(cs, 0, 4, normalize=False) == pytest.approx(ref, rel=1e-12)


def test_lpm_rigid_invariance(rng):
    p = rng.uniform(0, 100, (6, 2))
    t = 0.7
    r = np.array([[math.cos(t), -math.sin(t)], [math.sin(t), math.cos(t)]])
    a = lpm_cost(make_set(p, p), 0, 4, normalize=False)
    b = lpm_cost(make_set(p, p @ r.T + 30), 0, 4, normalize=False)
    assert a == pytest.approx(b, rel=1e-12)


def test_lpm_scrambled_larger(rng):
    p = rng.uniform(0, 100, (10, 2))
    q = p.copy()
    far = int(np.argmax(np.linalg.norm(p - p[0], axis=1)))
    q[[0, far]] = q[[far, 0]]
    assert lpm_cost(make_set(p, q), 0, 4, False) > lpm_cost(make_set(p, p), 0, 4, False)


def test_lpm_threshold_and_totals(rng):
    p = rng.uniform(0, 100, (10, 2))
    cs = make_set(p, p + 1)
    costs = [lpm_cost(cs, i, 4, False) for i in range(10)]
    lam = costs[3]
    r = select_lpm(cs, LpmParams(lambda_lpm=lam, normalize_coords=False))
    assert 3 in r.selected
    assert lpm_total_cost(cs, np.zeros(10, bool), lam, 4, False) == pytest.approx(10 * lam)
    one = np.zeros(10, bool)
    one[int(np.argmin(costs))] = True
    assert lpm_total_cost(cs, one, lam, 4, False) == pytest.approx(10 * lam + min(costs) - lam)
    with pytest.raises(TooFewMatches):
        select_lpm(make_set(p[:4], p[:4]))


@settings(max_examples=15, deadline=None)
@given(st.integers(5, 10), st.integers(1, 3), st.integers(0, 2**31), st.floats(0.1, 3.0))
def test_lpm_brute_force_optimal(n, k, seed, lam):
    r = np.random.default_rng(seed)
    cs = make_set(r.uniform(0, 100, (n, 2)), r.uniform(0, 100, (n, 2)))
    sel = select_lpm(cs, LpmParams(lambda_lpm=lam, k=k)).mask(n)
    best = min(lpm_total_cost(cs, np.array(w, bool), lam, k)
               for w in itertools.product([0, 1], repeat=n))
    assert lpm_total_cost(cs, sel, lam, k) <= best + 1e-12


# shared

@pytest.mark.parametrize("method", METHODS)
def test_determinism(method):
    cs, _ = generate_scene(SceneSpec(300, 0.5, 1.0, affine_frames=True, seed=8))
    a = run_selector(method, cs, None, seed=4)
    b = run_selector(method, cs, None, seed=4)
    assert np.array_equal(a.selected, b.selected)
    if a.confidence is not None:
        assert np.array_equal(a.confidence, b.confidence)


def test_run_selector_unknown():
    with pytest.raises(KeyError):
        run_selector("nope", None)
