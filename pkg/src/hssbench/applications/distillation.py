"""Student hypotheses restricted to a sup-norm ball around a teacher predictor."""

from __future__ import annotations

import math
from typing import Optional, Sequence

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted, check_X_y

from ..core import Hypothesis, LabeledSample, constant_hypothesis
from ..hypothesis_sets import BallAroundCenter
from .learners import KernelRidgeRegressor, LabelMeanRegressor


def distillation_bound(rad: float, m: int, mu: float, beta: float, delta: float) -> float:
    """``2 rad + (1 + 2 mu beta m) sqrt(ln(1/delta)/(2m))``."""
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    return 2 * rad + (1 + 2 * mu * beta * m) * math.sqrt(math.log(1 / delta) / (2 * m))


def anti_distillation_bound(mu: float, anti_radius: float, beta: float, m: int, delta: float) -> float:
    """``sqrt(e) mu (anti_radius + beta) + 4 sqrt((1/m + 2 mu beta) ln(6/delta))``."""
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    return (math.sqrt(math.e) * mu * (anti_radius + beta)
            + 4 * math.sqrt((1 / m + 2 * mu * beta) * math.log(6 / delta)))


def constant_grid(n_grid: int, lo: float = 0.0, hi: float = 1.0) -> list:
    return [constant_hypothesis(c) for c in np.linspace(lo, hi, n_grid)]


class DistillationHypothesisSet(BaseEstimator):
    """Grid members within ``gamma`` of the teacher in sup norm on ``probe_X``.

    The default grid is ``n_grid`` constants on [0, 1]. With ``anti=True``
    members must also be within ``anti_radius`` of the teacher on the
    training points. ``probe_X=None`` measures the sup norm on the
    training points.
    """

    def __init__(self, teacher: str = "label-mean", gamma: float = 0.1, n_grid: int = 21,
                 student_grid: Optional[Sequence[Hypothesis]] = None, probe_X=None, anti: bool = False,
                 anti_radius: Optional[float] = None, reg: float = 1.0, bandwidth: float = 1.0, mu: float = 1.0):
        self.teacher = teacher
        self.gamma = gamma
        self.n_grid = n_grid
        self.student_grid = student_grid
        self.probe_X = probe_X
        self.anti = anti
        self.anti_radius = anti_radius
        self.reg = reg
        self.bandwidth = bandwidth
        self.mu = mu

    def _teacher(self):
        if self.teacher == "label-mean":
            return LabelMeanRegressor()
        if self.teacher == "kernel-ridge":
            return KernelRidgeRegressor(reg=self.reg, bandwidth=self.bandwidth)
        raise ValueError(f"unknown teacher {self.teacher!r}")

    def fit(self, X, y):
        X, y = check_X_y(X, y, y_numeric=True)
        if self.gamma < 0:
            raise ValueError("gamma must be nonnegative")
        m = X.shape[0]
        self.teacher_ = self._teacher().fit(X, y)
        grid = list(self.student_grid) if self.student_grid is not None else constant_grid(self.n_grid)
        probe = X if self.probe_X is None else np.atleast_2d(np.asarray(self.probe_X, float))
        anti_r = None
        if self.anti:
            anti_r = 1 / math.sqrt(m) if self.anti_radius is None else float(self.anti_radius)
        self.anti_radius_ = anti_r
        self.hypothesis_set_ = BallAroundCenter(self.teacher_.as_hypothesis(), self.gamma, grid, probe,
                                                anti_radius=anti_r, sample_X=X if self.anti else None)
        self.m_ = m
        self.grid_spacing_ = (1.0 / (self.n_grid - 1) if self.student_grid is None and self.n_grid > 1 else math.nan)
        self._probe = probe
        return self

    @property
    def teacher_stability_(self) -> float:
        check_is_fitted(self)
        if self.teacher == "label-mean":
            return 1.0 / self.m_
        return self.teacher_.stability_bound(self.m_)

    @property
    def stability_display_(self) -> float:
        """``mu beta``: exact when H_{S'} contains every shifted member ``h + f_S' - f_S``."""
        return self.mu * self.teacher_stability_

    @property
    def stability_certificate_(self) -> float:
        """Certificate for a fixed constant grid: matching a member may cost one extra grid step."""
        spacing = self.grid_spacing_
        if math.isnan(spacing):
            raise ValueError("no grid-aware certificate for a custom student grid")
        return self.mu * (self.teacher_stability_ + spacing)

    def filter_holds(self, tol: float = 1e-12) -> bool:
        """Re-check every member against the ball constraints."""
        check_is_fitted(self)
        c = self.teacher_.predict(self._probe)
        P = self.hypothesis_set_.predict_matrix(self._probe)
        return bool(np.all(np.max(np.abs(P - c[None, :]), axis=1) <= self.gamma + tol))

    def as_family(self):
        params = self.get_params()
        return lambda S: DistillationHypothesisSet(**params).fit(S.X, S.y).hypothesis_set_


def distillation_family(config: dict, S: LabeledSample):
    return DistillationHypothesisSet(**config).fit(S.X, S.y).hypothesis_set_
