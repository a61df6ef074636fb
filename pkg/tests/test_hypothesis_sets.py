import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hssbench.core import ABSOLUTE_LOSS, SQUARED_LOSS, LabeledSample, SeededRng, constant_hypothesis, \
    linear_hypothesis
from hssbench.hypothesis_sets import (BallAroundCenter, EmptyHypothesisSetError, FeatureMapSet, FiniteSet,
                                      L1MixSet, LinearBallSet, pooled)


def anchors(K):
    return [constant_hypothesis(float(j)) for j in range(K)]


def test_finite_set_basics():
    hs = FiniteSet([constant_hypothesis(0.2), constant_hypothesis(0.6)])
    S = LabeledSample(np.zeros((3, 1)), np.zeros(3))
    L = hs.loss_matrix(S, ABSOLUTE_LOSS)
    assert L.shape == (2, 3) and np.allclose(L[1], 0.6)
    v, exact = hs.sup_weighted(S, np.array([1.0, 1.0, -1.0]), ABSOLUTE_LOSS)
    assert exact and v == pytest.approx(0.6)
    lo, hi, exact = hs.loss_range(S, ABSOLUTE_LOSS)
    assert exact and np.allclose(lo, 0.2) and np.allclose(hi, 0.6)
    with pytest.raises(EmptyHypothesisSetError):
        FiniteSet([])


def test_pooled_union_keeps_all_members():
    a = FiniteSet([constant_hypothesis(0.0)])
    b = FiniteSet([constant_hypothesis(1.0), constant_hypothesis(0.5)])
    assert pooled([a, b]).n_candidates == 3


VECTORS = st.lists(st.floats(-5, 5, allow_nan=False), min_size=2, max_size=7)


@given(v=VECTORS, data=st.data())
@settings(max_examples=150, deadline=None)
def test_linear_max_closed_forms_agree_with_lp(v, data):
    v = np.array(v)
    K = v.size
    kind = data.draw(st.sampled_from(["l1", "simplex", "capped", "ball", "capped-ball"]))
    if kind == "l1":
        hs = L1MixSet(anchors(K), simplex=False, l1_bound=data.draw(st.floats(0, 3)))
    elif kind == "simplex":
        hs = L1MixSet(anchors(K))
    elif kind == "capped":
        cap = data.draw(st.floats(1.0 / K, 1.0))
        hs = L1MixSet(anchors(K), cap=cap)
    else:
        center = np.full(K, 1.0 / K)
        radius = data.draw(st.floats(0, 2.5))
        cap = data.draw(st.floats(1.0 / K, 1.0)) if kind == "capped-ball" else None
        hs = L1MixSet(anchors(K), center=center, radius=radius, cap=cap)
    val, alpha = hs.linear_max(v)
    lp_val, _ = hs.linear_max_lp(v)
    assert val == pytest.approx(lp_val, abs=1e-7)
    assert hs.contains(alpha, tol=1e-7)
    assert float(alpha @ v) == pytest.approx(val, abs=1e-9)


def test_capped_simplex_empty_is_rejected():
    with pytest.raises(EmptyHypothesisSetError):
        L1MixSet(anchors(3), cap=0.2)


def test_l1mix_raw_sup_is_exact_and_loss_sup_is_flagged():
    X = np.linspace(-1, 1, 4)[:, None]
    hs = L1MixSet([linear_hypothesis([1.0]), linear_hypothesis([-1.0]), constant_hypothesis(0.3)])
    S = LabeledSample(X, np.zeros(4))
    w = np.array([1.0, -1.0, 1.0, -1.0])
    v_raw, ex_raw = hs.sup_weighted(S, w, None)
    assert ex_raw
    brute = max(float(hs.mixture(a)(X) @ w) for a in np.eye(3))
    assert v_raw == pytest.approx(brute)
    v_loss, ex_loss = hs.sup_weighted(S, w, ABSOLUTE_LOSS)
    assert not ex_loss


def test_l1mix_loss_range_is_exact_for_quasiconvex_losses():
    gen = SeededRng(0).generator()
    X = gen.standard_normal((5, 2))
    anchors_ = [linear_hypothesis(w) for w in gen.standard_normal((3, 2))]
    hs = L1MixSet(anchors_, center=np.full(3, 1 / 3), radius=0.4)
    S = LabeledSample(X, gen.random(5))
    lo, hi, exact = hs.loss_range(S, SQUARED_LOSS)
    assert exact
    # dense sampling of the weight polytope never leaves the reported range
    for _ in range(2000):
        a = gen.dirichlet(np.ones(3))
        if hs.contains(a):
            L = SQUARED_LOSS(hs.mixture(a)(X), S.y)
            assert np.all(L >= lo - 1e-12) and np.all(L <= hi + 1e-12)


def test_linear_ball_sup_matches_dual_norm():
    gen = SeededRng(1).generator()
    A = gen.standard_normal((2, 4))
    hs = LinearBallSet(A, 0.7)
    S = LabeledSample(gen.standard_normal((6, 4)), np.zeros(6))
    w = gen.standard_normal(6)
    v, exact = hs.sup_weighted(S, w)
    assert exact
    # sampled directions in the row space never beat the closed form
    basis = hs.basis
    for _ in range(500):
        c = gen.standard_normal(basis.shape[0])
        u = 0.7 * (c @ basis) / np.linalg.norm(c @ basis)
        assert float(S.X @ u @ w) <= v + 1e-9
    P = hs.projector
    assert np.allclose(P @ P, P) and np.allclose(P, P.T)


def test_ball_around_center_filters_and_raises_when_empty():
    grid = [constant_hypothesis(c) for c in np.linspace(0, 1, 11)]
    probe = np.zeros((3, 1))
    hs = BallAroundCenter(constant_hypothesis(0.5), 0.1, grid, probe)
    vals = sorted(float(h(probe)[0]) for h in hs.candidates())
    assert vals == pytest.approx([0.4, 0.5, 0.6])
    single = BallAroundCenter(constant_hypothesis(0.5), 0.0, grid, probe)
    assert single.n_candidates == 1
    with pytest.raises(EmptyHypothesisSetError):
        BallAroundCenter(constant_hypothesis(0.55), 0.01, grid, probe)


def test_ball_around_center_anti_mode_uses_training_points():
    grid = [linear_hypothesis([s]) for s in (0.0, 0.5, 1.0)]
    probe = np.array([[0.0], [1.0]])
    hs = BallAroundCenter(linear_hypothesis([0.5]), 1.0, grid, probe, anti_radius=0.1, sample_X=np.array([[1.0]]))
    assert hs.n_candidates == 1


def test_feature_map_set_composes_heads():
    hs = FeatureMapSet(lambda X: 2 * X, [lambda Z: Z[:, 0], lambda Z: -Z[:, 0]], gamma=1.0)
    P = hs.predict_matrix(np.array([[1.0], [2.0]]))
    assert np.allclose(P, [[2, 4], [-2, -4]])
