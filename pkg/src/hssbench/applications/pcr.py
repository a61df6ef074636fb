"""Principal components regression: norm-bounded linear heads on the top-k projection."""

from __future__ import annotations

import math

from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from ..core import LabeledSample
from ..hypothesis_sets import LinearBallSet
from .learners import principal_projector


def pcr_rademacher_certificate(gamma: float, r: float, m: int) -> float:
    return gamma * r / math.sqrt(m)


class PCRHypothesisSet(BaseEstimator):
    """``{x -> w . (P_S x) : ||w|| <= gamma}`` with ``P_S`` the top-k principal projector of the sample."""

    def __init__(self, n_components: int = 1, gamma: float = 1.0, feature_radius: float = 1.0,
                 gap_tol: float = 1e-10):
        self.n_components = n_components
        self.gamma = gamma
        self.feature_radius = feature_radius
        self.gap_tol = gap_tol

    def fit(self, X, y=None):
        X = check_array(X)
        self.projector_, self.components_, self.eigengap_ = principal_projector(X, self.n_components, self.gap_tol)
        self.hypothesis_set_ = LinearBallSet(self.components_.T, self.gamma)
        self.m_ = X.shape[0]
        return self

    @property
    def rademacher_certificate_(self) -> float:
        check_is_fitted(self)
        return pcr_rademacher_certificate(self.gamma, self.feature_radius, self.m_)

    def as_family(self):
        params = self.get_params()
        return lambda S: PCRHypothesisSet(**params).fit(S.X, S.y).hypothesis_set_


def pcr_family(config: dict, S: LabeledSample):
    return PCRHypothesisSet(**config).fit(S.X, S.y).hypothesis_set_
