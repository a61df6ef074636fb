"""Finite heads on top of a sample-dependent feature map."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from ..core import LabeledSample, as_rng
from ..hypothesis_sets import FeatureMapSet
from .learners import PCAProjection


class SensitivityError(ValueError):
    """A declared feature-map sensitivity was exceeded on a probe perturbation."""


def linear_heads(dim: int, gamma: float, n_heads: int, seed: int = 0) -> list:
    """``n_heads`` linear heads ``z -> w.z`` with ``||w|| = gamma`` (gamma-Lipschitz), plus the zero head."""
    gen = as_rng(seed).generator()
    W = gen.standard_normal((n_heads, dim))
    W *= gamma / np.linalg.norm(W, axis=1, keepdims=True)
    return [lambda Z: np.zeros(np.atleast_2d(Z).shape[0])] + [lambda Z, w=w: np.atleast_2d(Z) @ w for w in W]


def projector_change(X, X_prime, k: int) -> float:
    """Spectral norm of the difference of the top-k projectors of two design matrices."""
    P = PCAProjection(k).fit(X).projector_
    Q = PCAProjection(k).fit(X_prime).projector_
    return float(np.linalg.norm(P - Q, 2))


class FeatureMapHypothesisSet(BaseEstimator):
    """Heads composed with a map ``x -> Phi_S(x)``.

    ``map_kind="pca"`` projects onto the top-k principal subspace of the
    sample; ``"fixed-random"`` applies a fixed orthogonal matrix and does
    not depend on the sample. ``sensitivity`` is the declared sup-norm
    change of the map under one replacement (measured when ``None``).
    Features are assumed to have norm at most ``feature_radius``.
    """

    def __init__(self, map_kind: str = "pca", n_components: int = 1, gamma: float = 1.0, n_heads: int = 8,
                 sensitivity=None, feature_radius: float = 1.0, mu: float = 1.0, n_probe: int = 20,
                 random_state: int = 0):
        self.map_kind = map_kind
        self.n_components = n_components
        self.gamma = gamma
        self.n_heads = n_heads
        self.sensitivity = sensitivity
        self.feature_radius = feature_radius
        self.mu = mu
        self.n_probe = n_probe
        self.random_state = random_state

    def fit(self, X, y=None):
        X = check_array(X)
        m, d = X.shape
        if self.map_kind == "pca":
            proj = PCAProjection(self.n_components).fit(X).projector_
        elif self.map_kind == "fixed-random":
            Q, _ = np.linalg.qr(as_rng(self.random_state).child(1).generator().standard_normal((d, d)))
            proj = Q
        else:
            raise ValueError(f"unknown map kind {self.map_kind!r}")
        self.map_matrix_ = proj
        self.heads_ = linear_heads(d, self.gamma, self.n_heads, self.random_state)
        self.hypothesis_set_ = FeatureMapSet(lambda Z, M=proj: np.atleast_2d(Z) @ M.T, self.heads_, self.gamma)
        self.measured_sensitivity_ = self._probe_sensitivity(X, y)
        declared = self.measured_sensitivity_ if self.sensitivity is None else float(self.sensitivity)
        if self.measured_sensitivity_ > declared + 1e-12:
            raise SensitivityError(f"measured sensitivity {self.measured_sensitivity_:.3g} exceeds declared {declared:.3g}")
        self.sensitivity_ = declared
        return self

    def _probe_sensitivity(self, X, y) -> float:
        if self.map_kind == "fixed-random":
            return 0.0
        gen = as_rng(self.random_state).child(2).generator()
        m = X.shape[0]
        worst = 0.0
        for _ in range(self.n_probe):
            i, j = int(gen.integers(m)), int(gen.integers(m))
            Xp = X.copy()
            Xp[i] = X[j]
            worst = max(worst, projector_change(X, Xp, self.n_components) * self.feature_radius)
        return worst

    @property
    def beta_(self) -> float:
        """Hypothesis-set stability ``mu gamma Delta``."""
        check_is_fitted(self)
        return feature_map_stability(self.mu, self.gamma, self.sensitivity_)

    def as_family(self):
        params = self.get_params()
        return lambda S: FeatureMapHypothesisSet(**params).fit(S.X, S.y).hypothesis_set_


def feature_map_stability(mu: float, gamma: float, sensitivity: float) -> float:
    return mu * gamma * sensitivity


def feature_map_family(config: dict, S: LabeledSample):
    return FeatureMapHypothesisSet(**config).fit(S.X, S.y).hypothesis_set_


def pca_stability_curve(sampler, ms, k: int, n_trials: int, rng) -> dict:
    """Mean projector change under one replacement, per sample size, and the fitted log-log slope.

    ``sampler(gen, size)`` returns a (size, d) array of features.
    """
    rng = as_rng(rng)
    means = []
    for a, m in enumerate(ms):
        gen = rng.child(a).generator()
        vals = []
        for _ in range(n_trials):
            X = sampler(gen, m + 1)
            S, z = X[:m], X[m]
            Xp = S.copy()
            Xp[int(gen.integers(m))] = z
            vals.append(projector_change(S, Xp, k))
        means.append(float(np.mean(vals)))
    slope = float(np.polyfit(np.log(ms), np.log(means), 1)[0])
    return {"m": list(ms), "mean_change": means, "exponent": slope}
