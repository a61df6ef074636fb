"""Bagged ensembles whose mixing weights are capped at C/k."""

from __future__ import annotations

import math
from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator, clone
from sklearn.utils.validation import check_is_fitted, check_X_y

from ..core import Hypothesis, LabeledSample, SeededRng, as_rng, constant_hypothesis
from ..hypothesis_sets import FiniteSet, L1MixSet
from .learners import RidgeRegressor


def multiplicity_bound(k: int, p: int, m: int, delta: float) -> float:
    """High-probability cap on how many of k size-p subsamples contain any single index."""
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    return k * p / m + math.sqrt(2 * k * p * math.log(m / delta) / m)


def bagging_rademacher_envelope(mu: float, p: int, m: int) -> float:
    return mu * math.sqrt(2 * p * math.log(4 * m) / m)


def bagging_stability(k: int, p: int, m: int, C: float, mu: float, beta_A: float, delta: float) -> float:
    """Hypothesis-set stability ``(p/m + sqrt(2p ln(1/delta)/(km))) C mu beta_A``."""
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    return (p / m + math.sqrt(2 * p * math.log(1 / delta) / (k * m))) * C * mu * beta_A


def bagging_bound(k: int, p: int, m: int, C: float, mu: float, beta_A: float, delta: float) -> float:
    """Gap bound ``2 mu sqrt(2p ln(4m)/m) + [1 + 2(p + sqrt(2pm ln(1/delta)/k)) C mu beta_A] sqrt(ln(2/delta)/(2m))``."""
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    lead = 2 * bagging_rademacher_envelope(mu, p, m)
    stab = 1 + 2 * (p + math.sqrt(2 * p * m * math.log(1 / delta) / k)) * C * mu * beta_A
    return lead + stab * math.sqrt(math.log(2 / delta) / (2 * m))


def draw_subsamples(k: int, p: int, m: int, seed) -> np.ndarray:
    """(k, p) index sets, each drawn without replacement from range(m)."""
    if p > m:
        raise ValueError("subsample size p exceeds m")
    gen = as_rng(seed).generator()
    return np.argsort(gen.random((k, m)), axis=1, kind="stable")[:, :p]


def max_multiplicity(subsamples: np.ndarray, m: int) -> int:
    return int(np.bincount(subsamples.ravel(), minlength=m).max())


def _base_learner(name: str, reg: float):
    if name == "ridge":
        return RidgeRegressor(reg=reg)
    raise ValueError(f"unknown base learner {name!r}")


class BaggingHypothesisSet(BaseEstimator):
    """Fit k base learners on fixed subsamples; the hypothesis set mixes them with weights <= C/k.

    Subsample positions are drawn once from ``random_state``, so the map
    from training sample to hypothesis set is deterministic given the
    seed. ``weights="capped-simplex"`` gives the full polytope;
    ``weights="finite"`` keeps the uniform mixture plus the weight vectors
    that put C/k on a cyclic block of consecutive learners.
    """

    def __init__(self, k: int = 10, p: int = 5, C: float = 2.0, base_learner: str = "label-mean",
                 reg: float = 1.0, beta_A: Optional[float] = None, mu: float = 1.0, delta: float = 0.05,
                 weights: str = "capped-simplex", random_state: int = 0):
        self.k = k
        self.p = p
        self.C = C
        self.base_learner = base_learner
        self.reg = reg
        self.beta_A = beta_A
        self.mu = mu
        self.delta = delta
        self.weights = weights
        self.random_state = random_state

    def _validate(self, m: int):
        if self.k < 1 or self.p < 1:
            raise ValueError("k and p must be positive")
        if self.p > m:
            raise ValueError(f"subsample size p={self.p} exceeds m={m}")
        if self.C < 1 or self.C > self.k:
            raise ValueError("C must lie in [1, k]")
        if self.base_learner not in ("label-mean", "ridge"):
            raise ValueError(f"unknown base learner {self.base_learner!r}")
        if self.weights not in ("capped-simplex", "finite"):
            raise ValueError("weights is 'capped-simplex' or 'finite'")

    def finite_weight_vectors(self) -> np.ndarray:
        """Uniform weights plus, for each start, cap C/k on floor(k/C) consecutive learners (cyclically)."""
        k, cap = self.k, self.C / self.k
        block = int(math.floor(k / self.C + 1e-12))
        rows = [np.full(k, 1.0 / k)]
        for start in range(k):
            w = np.zeros(k)
            w[[(start + j) % k for j in range(block)]] = cap
            rest = 1.0 - cap * block
            if rest > 1e-12:
                w[(start + block) % k] += rest
            rows.append(w)
        return np.unique(np.round(np.array(rows), 15), axis=0)

    def fit(self, X, y):
        X, y = check_X_y(X, y, y_numeric=True)
        m = X.shape[0]
        self._validate(m)
        self.subsamples_ = draw_subsamples(self.k, self.p, m, self.random_state)
        if self.base_learner == "label-mean":
            # closed form: each base predictor is the constant mean of its subsample
            self.subsample_means_ = y[self.subsamples_].mean(axis=1)
            self.estimators_ = None
            means = self.subsample_means_

            def evaluate(Xq, c=means):
                return np.repeat(c[:, None], np.atleast_2d(Xq).shape[0], axis=1)

            anchors = [constant_hypothesis(float(c)) for c in means]
        else:
            base = _base_learner(self.base_learner, self.reg)
            self.estimators_ = [clone(base).fit(X[idx], y[idx]) for idx in self.subsamples_]
            anchors = [est.as_hypothesis() for est in self.estimators_]

            def evaluate(Xq, ests=self.estimators_):
                return np.stack([e.predict(np.atleast_2d(Xq)) for e in ests])

        if self.weights == "capped-simplex":
            self.hypothesis_set_ = L1MixSet(anchors, simplex=True, cap=self.C / self.k, anchor_evaluator=evaluate)
        else:
            W = self.finite_weight_vectors()
            self.weight_vectors_ = W
            self.hypothesis_set_ = FiniteSet(
                [Hypothesis(lambda Xq, w=w: w @ evaluate(np.atleast_2d(Xq)), ("w", j)) for j, w in enumerate(W)],
                batch_evaluator=lambda Xq: W @ evaluate(np.atleast_2d(Xq)),
            )
        self.m_ = m
        self.max_multiplicity_ = max_multiplicity(self.subsamples_, m)
        self.multiplicity_bound_ = multiplicity_bound(self.k, self.p, m, self.delta)
        return self

    @property
    def base_stability_(self) -> float:
        if self.beta_A is not None:
            return float(self.beta_A)
        if self.base_learner == "label-mean":
            return 1.0 / self.p
        raise ValueError("declare beta_A for base learners without a closed-form stability")

    @property
    def stability_certificate_(self) -> float:
        """Seed-conditional stability: an index sits in at most max_multiplicity_ subsamples of weight <= C/k."""
        check_is_fitted(self)
        return self.mu * self.base_stability_ * (self.C / self.k) * self.max_multiplicity_

    @property
    def stability_display_(self) -> float:
        check_is_fitted(self)
        return bagging_stability(self.k, self.p, self.m_, self.C, self.mu, self.base_stability_, self.delta)

    @property
    def bound_(self) -> float:
        check_is_fitted(self)
        return bagging_bound(self.k, self.p, self.m_, self.C, self.mu, self.base_stability_, self.delta)

    def as_family(self):
        params = self.get_params()

        def family(S: LabeledSample):
            return BaggingHypothesisSet(**params).fit(S.X, S.y).hypothesis_set_

        return family


def bagging_family(config: dict, rng=None):
    """(family, multiplicity bound t) for a bagging config dict with keys k, p, C, m, delta, ..."""
    cfg = dict(config)
    m = cfg.pop("m")
    seed = cfg.pop("random_state", None)
    if seed is None:
        seed = int(as_rng(rng).generator().integers(2**31))
    est = BaggingHypothesisSet(random_state=seed, **cfg)
    if est.p > m:
        raise ValueError(f"subsample size p={est.p} exceeds m={m}")
    return est.as_family(), multiplicity_bound(est.k, est.p, m, est.delta)
