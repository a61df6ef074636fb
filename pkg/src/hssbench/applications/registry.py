"""Named family constructors used by experiment configs."""

from __future__ import annotations

import numpy as np

from ..core import constant_hypothesis
from ..hypothesis_sets import FiniteSet
from .bagging import BaggingHypothesisSet, bagging_rademacher_envelope, bagging_stability
from .distillation import DistillationHypothesisSet
from .feature_map import FeatureMapHypothesisSet
from .learners import LabelMeanRegressor
from .pcr import PCRHypothesisSet, pcr_rademacher_certificate
from .sco import SCOMixtureHypothesisSet


def _finite_constant(values=(0.0, 0.5, 1.0)):
    hs = FiniteSet([constant_hypothesis(float(v)) for v in values])
    return lambda S: hs


def _label_mean():
    return lambda S: FiniteSet([LabelMeanRegressor().fit(S.X, S.y).as_hypothesis()])


_ESTIMATORS = {
    "bagging": BaggingHypothesisSet,
    "sco-mixture": SCOMixtureHypothesisSet,
    "feature-map": FeatureMapHypothesisSet,
    "distillation": DistillationHypothesisSet,
    "pcr": PCRHypothesisSet,
}

FAMILY_NAMES = ("finite-constant", "label-mean", *_ESTIMATORS)


def make_estimator(name: str, params: dict):
    if name not in _ESTIMATORS:
        raise ValueError(f"{name!r} has no estimator form")
    return _ESTIMATORS[name](**params)


def make_family(name: str, params: dict | None = None):
    """Family callable ``S -> HypothesisSet`` for a registered name."""
    params = dict(params or {})
    if name == "finite-constant":
        return _finite_constant(**params)
    if name == "label-mean":
        if params:
            raise ValueError("label-mean takes no parameters")
        return _label_mean()
    if name in _ESTIMATORS:
        return make_estimator(name, params).as_family()
    raise ValueError(f"unknown family {name!r}; choose from {', '.join(FAMILY_NAMES)}")


def certified_coefficients(name: str, params: dict, m: int, delta: float, mu: float) -> dict:
    """Closed-form bound coefficients a family guarantees without estimation."""
    if name == "finite-constant":
        return {"beta": 0.0}
    if name == "bagging":
        est = make_estimator(name, params)
        beta_A = est.beta_A if est.beta_A is not None else (1.0 / est.p if est.base_learner == "label-mean" else None)
        if beta_A is None:
            return {}
        return {"beta": bagging_stability(est.k, est.p, m, est.C, mu, beta_A, est.delta),
                "rad": bagging_rademacher_envelope(mu, est.p, m)}
    if name == "pcr":
        est = make_estimator(name, params)
        return {"rad": mu * pcr_rademacher_certificate(est.gamma, est.feature_radius, m)}
    return {}
