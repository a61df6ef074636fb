"""Small deterministic learners with analytic stability anchors."""

from __future__ import annotations

import math
from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from ..core import Hypothesis


class EigengapError(ValueError):
    """The principal subspace is not well defined (eigengap below tolerance)."""


class ConvergenceError(RuntimeError):
    """An iterative solver diverged or failed to converge."""


class _HypothesisMixin:
    def as_hypothesis(self) -> Hypothesis:
        check_is_fitted(self)
        model = self
        return Hypothesis(lambda X: model.predict(np.atleast_2d(X)), (type(self).__name__, id(self)))


class LabelMeanRegressor(_HypothesisMixin, RegressorMixin, BaseEstimator):
    """Predicts the training label mean everywhere.

    Replacing one of m labels in [0, 1] moves the prediction by at most
    1/m, so its uniform stability for a mu-Lipschitz loss is mu/m.
    """

    def fit(self, X, y):
        X, y = check_X_y(X, y, y_numeric=True)
        self.mean_ = float(np.mean(y))
        self.n_features_in_ = X.shape[1]
        self.n_samples_ = X.shape[0]
        return self

    def predict(self, X):
        check_is_fitted(self)
        X = check_array(X)
        return np.full(X.shape[0], self.mean_)

    @property
    def stability_(self) -> float:
        check_is_fitted(self)
        return 1.0 / self.n_samples_


class RidgeRegressor(_HypothesisMixin, RegressorMixin, BaseEstimator):
    """Closed-form ridge: argmin (1/m) sum (w.x - y)^2 + reg ||w||^2 (no intercept)."""

    def __init__(self, reg: float = 1.0):
        self.reg = reg

    def fit(self, X, y):
        X, y = check_X_y(X, y, y_numeric=True)
        if self.reg <= 0:
            raise ValueError("reg must be positive")
        m, d = X.shape
        self.coef_ = np.linalg.solve(X.T @ X / m + self.reg * np.eye(d), X.T @ y / m)
        self.n_features_in_ = d
        return self

    def predict(self, X):
        check_is_fitted(self)
        return check_array(X) @ self.coef_


class KernelRidgeRegressor(_HypothesisMixin, RegressorMixin, BaseEstimator):
    """Kernel ridge with a fixed Gaussian kernel; dual solve (K + m reg I) a = y."""

    def __init__(self, reg: float = 1.0, bandwidth: float = 1.0):
        self.reg = reg
        self.bandwidth = bandwidth

    def _kernel(self, A, B):
        sq = np.sum(A**2, 1)[:, None] + np.sum(B**2, 1)[None, :] - 2 * A @ B.T
        return np.exp(-np.maximum(sq, 0.0) / (2 * self.bandwidth**2))

    def fit(self, X, y):
        X, y = check_X_y(X, y, y_numeric=True)
        if self.reg <= 0 or self.bandwidth <= 0:
            raise ValueError("reg and bandwidth must be positive")
        m = X.shape[0]
        self.X_fit_ = X
        self.dual_coef_ = np.linalg.solve(self._kernel(X, X) + m * self.reg * np.eye(m), y)
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self)
        return self._kernel(check_array(X), self.X_fit_) @ self.dual_coef_

    def stability_bound(self, m: int, label_bound: float = 1.0) -> float:
        """Sup-norm change of the predictor under one replacement (kernel bounded by 1)."""
        return 2 * label_bound / (self.reg * m) * (1 + 1 / math.sqrt(self.reg))


class ProjectedSGDRegressor(_HypothesisMixin, RegressorMixin, BaseEstimator):
    """Projected SGD on (1/m) sum (w.x - y)^2 + (reg/2) ||w||^2 over the ball ||w|| <= norm_cap.

    Steps default to 1/(reg (t+1)); the returned weights are the average
    of the iterates. The sample order comes from ``random_state``.
    """

    def __init__(self, reg: float = 1.0, norm_cap: float = 1.0, n_steps: int = 2000,
                 step_size: Optional[float] = None, random_state: int = 0):
        self.reg = reg
        self.norm_cap = norm_cap
        self.n_steps = n_steps
        self.step_size = step_size
        self.random_state = random_state

    def fit(self, X, y):
        X, y = check_X_y(X, y, y_numeric=True)
        if self.reg <= 0 or self.norm_cap <= 0 or self.n_steps < 1:
            raise ValueError("reg, norm_cap and n_steps must be positive")
        m, d = X.shape
        gen = np.random.default_rng(self.random_state)
        order = gen.integers(m, size=self.n_steps)
        w = np.zeros(d)
        avg = np.zeros(d)
        limit = 1e6 * max(1.0, self.norm_cap) if np.isfinite(self.norm_cap) else 1e12
        for t, i in enumerate(order):
            grad = 2 * (X[i] @ w - y[i]) * X[i] + self.reg * w
            eta = self.step_size if self.step_size is not None else 1.0 / (self.reg * (t + 1))
            w = w - eta * grad
            if not np.all(np.isfinite(w)) or np.linalg.norm(w) > limit:
                raise ConvergenceError("SGD diverged; reduce the step size")
            nrm = np.linalg.norm(w)
            if nrm > self.norm_cap:
                w *= self.norm_cap / nrm
            avg += (w - avg) / (t + 1)
        self.coef_ = avg
        self.n_features_in_ = d
        return self

    def predict(self, X):
        check_is_fitted(self)
        return check_array(X) @ self.coef_

    def stability_bound(self, m: int, feature_radius: float = 1.0, label_bound: float = 1.0) -> float:
        """Prediction change of the regularized minimizer under one replacement.

        The per-example gradient norm on the ball is at most
        ``L = 2 (norm_cap r + label_bound) r``; strong convexity ``reg`` gives
        ``||w_S - w_S'|| <= 2 L / (reg m)``.
        """
        lip = 2 * (self.norm_cap * feature_radius + label_bound) * feature_radius
        return feature_radius * 2 * lip / (self.reg * m)


# --------------------------------------------------------------------------
# symmetric eigensolver and principal projections
# --------------------------------------------------------------------------


def jacobi_eigh(A, tol: float = 1e-10, max_sweeps: int = 100):
    """Eigenvalues (descending) and eigenvectors (columns) of a symmetric matrix by cyclic Jacobi.

    Each eigenvector is signed so its largest-magnitude entry is positive.
    """
    A = np.array(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("need a square matrix")
    if not np.allclose(A, A.T, atol=1e-12 * max(1.0, np.abs(A).max(initial=0.0))):
        raise ValueError("matrix must be symmetric")
    n = A.shape[0]
    V = np.eye(n)
    scale = max(np.linalg.norm(A), 1e-300)
    off_diag = ~np.eye(n, dtype=bool)
    for _ in range(max_sweeps):
        if np.linalg.norm(A[off_diag]) <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = (A[q, q] - A[p, p]) / (2 * apq)
                if abs(theta) > 1e150:
                    t = 1 / (2 * theta)
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1))
                c = 1 / math.sqrt(t * t + 1)
                s = t * c
                rp, rq = A[p, :].copy(), A[q, :].copy()
                A[p, :], A[q, :] = c * rp - s * rq, s * rp + c * rq
                cp, cq = A[:, p].copy(), A[:, q].copy()
                A[:, p], A[:, q] = c * cp - s * cq, s * cp + c * cq
                vp, vq = V[:, p].copy(), V[:, q].copy()
                V[:, p], V[:, q] = c * vp - s * vq, s * vp + c * vq
    else:
        raise ConvergenceError("Jacobi sweeps did not converge")
    vals = np.diag(A).copy()
    order = np.argsort(-vals, kind="stable")
    vals, V = vals[order], V[:, order]
    idx = np.argmax(np.abs(V), axis=0)
    V *= np.where(V[idx, np.arange(n)] < 0, -1.0, 1.0)
    return vals, V


def principal_projector(X, k: int, gap_tol: float = 1e-10):
    """Projector onto the top-k eigenspace of ``X^T X / m`` and the eigengap at k."""
    X = np.asarray(X, dtype=float)
    m, d = X.shape
    if not 1 <= k <= d:
        raise ValueError("need 1 <= k <= d")
    if m < k:
        raise ValueError("need at least k samples")
    vals, V = jacobi_eigh(X.T @ X / m)
    gap = vals[k - 1] - (vals[k] if k < d else 0.0)
    if gap <= gap_tol:
        raise EigengapError(f"eigengap {gap:.3g} at k={k} is below tolerance {gap_tol:g}")
    Vk = V[:, :k]
    return Vk @ Vk.T, Vk, float(gap)


class PCAProjection(TransformerMixin, BaseEstimator):
    """Orthogonal projection onto the top-k principal subspace (uncentered second moment)."""

    def __init__(self, n_components: int = 1, gap_tol: float = 1e-10):
        self.n_components = n_components
        self.gap_tol = gap_tol

    def fit(self, X, y=None):
        X = check_array(X)
        self.projector_, self.components_, self.eigengap_ = principal_projector(X, self.n_components, self.gap_tol)
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self)
        return check_array(X) @ self.projector_
