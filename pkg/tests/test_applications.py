import math

import numpy as np
import pytest
from sklearn.base import clone

from hssbench.applications import (BaggingHypothesisSet, ConvergenceError, DistillationHypothesisSet, EigengapError,
                                   FeatureMapHypothesisSet, KernelRidgeRegressor, LabelMeanRegressor, PCAProjection,
                                   PCRHypothesisSet, ProjectedSGDRegressor, RidgeRegressor, SCOMixtureHypothesisSet,
                                   SensitivityError, anti_distillation_bound, auto_radius, bagging_rademacher_envelope,
                                   certified_coefficients, draw_subsamples, feature_map_stability, jacobi_eigh,
                                   make_family, max_multiplicity, multiplicity_bound, pca_stability_curve,
                                   pcr_rademacher_certificate, principal_projector, sco_bound,
                                   sco_diameter_certificate)
from hssbench.core import ABSOLUTE_LOSS, LabeledSample, SeededRng
from hssbench.stability import estimate_beta

from corpus import random_distribution, unit_ball_points


def data(seed, m=20, d=3):
    gen = SeededRng(seed).generator()
    return unit_ball_points(gen, m, d), gen.random(m)


# -- bagging ---------------------------------------------------------------

def test_multiplicity_threshold_and_envelope():
    assert multiplicity_bound(100, 10, 100, 0.01) == pytest.approx(10 + math.sqrt(2000 * math.log(1e4) / 100))
    assert multiplicity_bound(100, 10, 100, 0.01) == pytest.approx(23.572, abs=1e-3)
    assert bagging_rademacher_envelope(1.0, 4, 100) == pytest.approx(math.sqrt(8 * math.log(400) / 100))
    assert bagging_rademacher_envelope(1.0, 4, 100) == pytest.approx(0.69233, abs=1e-5)


def test_subsamples_are_distinct_indices_and_seeded():
    A = draw_subsamples(50, 7, 30, SeededRng(1))
    assert A.shape == (50, 7)
    assert all(len(set(row)) == 7 for row in A.tolist())
    assert np.array_equal(A, draw_subsamples(50, 7, 30, SeededRng(1)))
    assert max_multiplicity(np.array([[0, 1], [1, 2]]), 3) == 2
    with pytest.raises(ValueError):
        draw_subsamples(2, 5, 3, 0)


@pytest.mark.parametrize("C", [1.0, 2.0, 3.0, 6.0])
def test_finite_weights_respect_the_cap(C):
    est = BaggingHypothesisSet(k=6, p=3, C=C, weights="finite")
    W = est.finite_weight_vectors()
    assert np.allclose(W.sum(axis=1), 1.0) and np.all(W <= C / 6 + 1e-12)


def test_full_cap_is_the_simplex():
    X, y = data(0)
    hs = BaggingHypothesisSet(k=5, p=3, C=5.0, weights="capped-simplex", random_state=0).fit(X, y).hypothesis_set_
    val, alpha = hs.linear_max(np.array([0.0, 0.0, 3.0, 1.0, 0.0]))
    assert val == pytest.approx(3.0) and alpha[2] == pytest.approx(1.0)


def test_bagging_certificate_dominates_measured_beta():
    D = random_distribution(2, n_atoms=4)
    est = BaggingHypothesisSet(k=6, p=3, C=2.0, weights="finite", random_state=3)
    S = D.support.take([0, 1, 2, 3, 0, 1, 2, 3])
    est.fit(S.X, S.y)
    beta = estimate_beta(est.as_family(), S, D, exhaustive=True)
    assert beta <= est.stability_certificate_ + 1e-12


def test_ridge_base_learner_and_params():
    X, y = data(1)
    est = BaggingHypothesisSet(k=4, p=5, C=2.0, base_learner="ridge", weights="finite", random_state=0)
    assert clone(est).get_params() == est.get_params()
    est.fit(X, y)
    assert est.hypothesis_set_.n_candidates >= 1


# -- learners --------------------------------------------------------------

def test_label_mean_and_ridge():
    X, y = data(2)
    lm = LabelMeanRegressor().fit(X, y)
    assert np.allclose(lm.predict(X), y.mean()) and lm.stability_ == pytest.approx(1 / 20)
    r = RidgeRegressor(reg=0.5).fit(X, y)
    w = np.linalg.solve(X.T @ X / 20 + 0.5 * np.eye(3), X.T @ y / 20)
    assert np.allclose(r.coef_, w)
    assert KernelRidgeRegressor(reg=1.0).fit(X, y).predict(X).shape == (20,)


def test_sgd_converges_near_the_ridge_solution_and_is_seeded():
    X, y = data(3, m=40)
    a = ProjectedSGDRegressor(reg=1.0, n_steps=4000, random_state=0).fit(X, y)
    b = ProjectedSGDRegressor(reg=1.0, n_steps=4000, random_state=0).fit(X, y)
    assert np.array_equal(a.coef_, b.coef_)
    ridge = RidgeRegressor(reg=1.0).fit(X, y).coef_
    assert np.linalg.norm(a.coef_ - ridge) < 0.05
    with pytest.raises(ConvergenceError):
        ProjectedSGDRegressor(reg=1.0, norm_cap=np.inf, step_size=1e6, n_steps=200).fit(X * 1e3, y)


def test_jacobi_matches_lapack():
    gen = SeededRng(4).generator()
    for _ in range(10):
        B = gen.standard_normal((5, 5))
        A = B @ B.T
        vals, V = jacobi_eigh(A)
        ref = np.linalg.eigvalsh(A)[::-1]
        assert np.allclose(vals, ref, atol=1e-9)
        assert np.allclose(V @ np.diag(vals) @ V.T, A, atol=1e-8)
        assert np.allclose(V.T @ V, np.eye(5), atol=1e-9)


def test_projector_identities_and_eigengap():
    X, _ = data(5, m=30, d=4)
    P, Vk, gap = principal_projector(X, 2)
    assert np.allclose(P @ P, P) and np.allclose(P, P.T) and np.trace(P) == pytest.approx(2) and gap > 0
    Z = np.zeros((10, 3))
    Z[:, :2] = SeededRng(0).generator().standard_normal((10, 2))
    P, _, _ = principal_projector(Z, 2)
    assert np.allclose(P, np.diag([1.0, 1.0, 0.0]), atol=1e-9)
    with pytest.raises(EigengapError):
        principal_projector(np.ones((5, 2)) / 2, 2)
    assert PCAProjection(n_components=2).fit(X).transform(X).shape == X.shape


def test_pca_stability_exponent_is_near_minus_one():
    def sampler(gen, size):
        return gen.standard_normal((size, 3)) * np.array([2.0, 1.0, 0.5])
    out = pca_stability_curve(sampler, [50, 100, 200], 1, 20, SeededRng(0))
    assert -1.3 <= out["exponent"] <= -0.7


# -- SCO, feature map, distillation, PCR ------------------------------------

def test_sco_certificates():
    assert auto_radius(1.0, 1.0, 100) == pytest.approx(0.05)
    assert sco_diameter_certificate(1.0, 0.05, 1.0) == pytest.approx(0.1)
    assert math.sqrt(math.e / 100) == pytest.approx(0.16487, abs=1e-5)
    assert sco_bound(100, 1.0, 0.0, 0.1) == pytest.approx(math.sqrt(math.e / 100) + 4 * math.sqrt(0.01 * math.log(60)))


def test_sco_measured_diameter_within_certificate():
    X, y = data(6, m=30)
    est = SCOMixtureHypothesisSet(K=3, sgd_steps=100, random_state=0).fit(X, y)
    assert est.measured_diameter(X, y, ABSOLUTE_LOSS) <= est.diameter_certificate_ + 1e-12
    zero = SCOMixtureHypothesisSet(K=3, radius=0.0, sgd_steps=50, random_state=0).fit(X, y)
    assert zero.measured_diameter(X, y, ABSOLUTE_LOSS) == pytest.approx(0.0, abs=1e-12)


def test_feature_map():
    assert feature_map_stability(1.0, 2.0, 0.01) == pytest.approx(0.02)
    X, y = data(7)
    fixed = FeatureMapHypothesisSet(map_kind="fixed-random", n_components=2, gamma=1.0, sensitivity=0.0).fit(X, y)
    assert fixed.beta_ == 0.0
    with pytest.raises(SensitivityError):
        FeatureMapHypothesisSet(map_kind="pca", n_components=1, sensitivity=1e-9, n_probe=3).fit(X, y)


def test_distillation():
    X = np.zeros((50, 1))
    y = np.tile([0.0, 1.0], 25)  # teacher 0.5 sits on the grid
    est = DistillationHypothesisSet(gamma=0.0, student_grid=None, n_grid=11).fit(X, y)
    assert est.teacher_stability_ == pytest.approx(0.02)
    assert est.stability_display_ == pytest.approx(0.02)
    assert est.stability_certificate_ == pytest.approx(0.02 + 0.1)
    assert est.filter_holds() and est.hypothesis_set_.n_candidates == 1
    assert anti_distillation_bound(1.0, 0.1, 0.01, 100, 0.1) - 4 * math.sqrt(0.03 * math.log(60)) == \
        pytest.approx(0.18136, abs=1e-5)


def test_pcr():
    assert pcr_rademacher_certificate(1.0, 1.0, 100) == pytest.approx(0.1)
    X, y = data(8, m=20, d=3)
    est = PCRHypothesisSet(n_components=2, gamma=1.0).fit(X, y)
    assert est.hypothesis_set_.projector.shape == (3, 3)


def test_registry():
    for name in ("finite-constant", "label-mean", "bagging", "distillation", "pcr"):
        make_family(name, {})
    with pytest.raises(ValueError):
        make_family("nope", {})
    assert certified_coefficients("finite-constant", {}, 30, 0.1, 1.0) == {"beta": 0.0}
