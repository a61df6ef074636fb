"""Mixtures of K stochastic-convex-optimization runs, with weights near a fixed center."""

from __future__ import annotations

import math
from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted, check_X_y

from ..core import LabeledSample, linear_hypothesis
from ..hypothesis_sets import L1MixSet
from .learners import ProjectedSGDRegressor


def auto_radius(mu: float, norm_cap: float, m: int) -> float:
    """Radius ``1/(2 mu D sqrt(m))`` that makes the diameter certificate ``1/sqrt(m)``."""
    return 1.0 / (2 * mu * norm_cap * math.sqrt(m))


def sco_diameter_certificate(mu: float, radius: float, norm_cap: float) -> float:
    return 2 * mu * radius * norm_cap


def sco_bound(m: int, mu: float, beta: float, delta: float) -> float:
    """``sqrt(e/m) + sqrt(e) mu beta + 4 sqrt((1/m + 2 mu beta) ln(6/delta))``."""
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    return (math.sqrt(math.e / m) + math.sqrt(math.e) * mu * beta
            + 4 * math.sqrt((1 / m + 2 * mu * beta) * math.log(6 / delta)))


class SCOMixtureHypothesisSet(BaseEstimator):
    """K projected-SGD ridge runs (seeds ``random_state + j``) mixed over the simplex within L1 radius of ``alpha0``.

    ``radius=None`` uses :func:`auto_radius`. Features are assumed to lie
    in the unit ball and labels in [0, 1].
    """

    def __init__(self, K: int = 3, alpha0=None, radius: Optional[float] = None, norm_cap: float = 1.0,
                 reg: float = 1.0, sgd_steps: int = 500, step_size: Optional[float] = None, mu: float = 1.0,
                 random_state: int = 0):
        self.K = K
        self.alpha0 = alpha0
        self.radius = radius
        self.norm_cap = norm_cap
        self.reg = reg
        self.sgd_steps = sgd_steps
        self.step_size = step_size
        self.mu = mu
        self.random_state = random_state

    def fit(self, X, y):
        X, y = check_X_y(X, y, y_numeric=True)
        m = X.shape[0]
        if self.K < 1:
            raise ValueError("K must be positive")
        center = np.full(self.K, 1.0 / self.K) if self.alpha0 is None else np.asarray(self.alpha0, float)
        self.radius_ = auto_radius(self.mu, self.norm_cap, m) if self.radius is None else float(self.radius)
        self.runs_ = [
            ProjectedSGDRegressor(reg=self.reg, norm_cap=self.norm_cap, n_steps=self.sgd_steps,
                                  step_size=self.step_size, random_state=self.random_state + j).fit(X, y)
            for j in range(self.K)
        ]
        W = np.stack([r.coef_ for r in self.runs_])
        self.weights_ = W
        self.hypothesis_set_ = L1MixSet([linear_hypothesis(w) for w in W], simplex=True, center=center,
                                        radius=self.radius_, anchor_evaluator=lambda Xq: W @ np.atleast_2d(Xq).T)
        self.m_ = m
        return self

    @property
    def diameter_certificate_(self) -> float:
        check_is_fitted(self)
        return sco_diameter_certificate(self.mu, self.radius_, self.norm_cap)

    def measured_diameter(self, X, y, loss) -> float:
        """Average per-point loss spread of the fitted set on (X, y)."""
        lo, hi, _ = self.hypothesis_set_.loss_range(LabeledSample(X, y), loss)
        return float(np.mean(hi - lo))

    @property
    def beta_(self) -> float:
        check_is_fitted(self)
        return self.runs_[0].stability_bound(self.m_)

    def as_family(self):
        params = self.get_params()
        return lambda S: SCOMixtureHypothesisSet(**params).fit(S.X, S.y).hypothesis_set_


def sco_mixture_family(config: dict, S: LabeledSample, rng=None):
    """Fitted L1MixSet for ``S`` under a config dict of estimator parameters."""
    cfg = dict(config)
    if rng is not None and "random_state" not in cfg:
        cfg["random_state"] = int(rng) if not hasattr(rng, "generator") else int(rng.generator().integers(2**31))
    return SCOMixtureHypothesisSet(**cfg).fit(S.X, S.y).hypothesis_set_
