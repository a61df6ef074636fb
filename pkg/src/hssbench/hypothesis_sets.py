"""Representations of a sample-dependent hypothesis set.

Every descriptor answers three questions the estimators need:

* ``loss_matrix(sample, loss)``: losses of a finite list of members
  (all members for finite sets, search candidates otherwise);
* ``sup_weighted(sample, weights, loss)``: ``sup_h sum_i w_i g_h(z_i)``
  together with a flag telling whether the value is the exact sup;
* ``loss_range(sample, loss)``: per-point min and max of the loss over
  the whole set.
"""

from __future__ import annotations

from typing import Callable, Optional, Sequence

import numpy as np
from scipy.optimize import linprog

from .core import DimensionError, Hypothesis, LabeledSample, LossFunction


class EmptyHypothesisSetError(ValueError):
    pass


class HypothesisSet:
    """Base class. Subclasses implement :meth:`predict_matrix`."""

    is_finite = False

    def candidates(self) -> list[Hypothesis]:
        raise NotImplementedError

    def predict_matrix(self, X) -> np.ndarray:
        return np.stack([h(X) for h in self.candidates()])

    def loss_matrix(self, sample: LabeledSample, loss: LossFunction) -> np.ndarray:
        return loss(self.predict_matrix(sample.X), sample.y[None, :])

    @property
    def n_candidates(self) -> int:
        return len(self.candidates())

    def sup_weighted(self, sample: LabeledSample, weights, loss: Optional[LossFunction] = None):
        w = np.asarray(weights, dtype=float)
        if w.shape[0] != sample.m:
            raise DimensionError("one weight per sample point is required")
        mat = self.predict_matrix(sample.X) if loss is None else self.loss_matrix(sample, loss)
        return float(np.max(mat @ w)), self.is_finite

    def loss_range(self, sample: LabeledSample, loss: LossFunction):
        L = self.loss_matrix(sample, loss)
        return L.min(axis=0), L.max(axis=0), self.is_finite


class FiniteSet(HypothesisSet):
    """An explicit nonempty list of hypotheses.

    ``batch_evaluator`` optionally returns the full (n_members, n) prediction
    matrix in one call; it must agree with evaluating each member.
    """

    is_finite = True

    def __init__(self, hypotheses: Sequence[Hypothesis],
                 batch_evaluator: Optional[Callable[[np.ndarray], np.ndarray]] = None):
        hypotheses = list(hypotheses)
        if not hypotheses:
            raise EmptyHypothesisSetError("a finite hypothesis set needs at least one member")
        self.hypotheses = hypotheses
        self._batch = batch_evaluator

    def __len__(self):
        return len(self.hypotheses)

    def candidates(self):
        return self.hypotheses

    def predict_matrix(self, X):
        X = np.asarray(X, dtype=float)
        if self._batch is not None:
            return np.asarray(self._batch(X), dtype=float).reshape(len(self.hypotheses), X.shape[0])
        return np.stack([h(X) for h in self.hypotheses])

    def union(self, other: "FiniteSet") -> "FiniteSet":
        return FiniteSet(self.hypotheses + other.hypotheses)

    def __repr__(self):
        return f"{type(self).__name__}(n={len(self)})"


def pooled(sets: Sequence[HypothesisSet]) -> FiniteSet:
    """Union of the candidate lists of several hypothesis sets."""
    members = []
    for s in sets:
        members.extend(s.candidates())
    return _PooledSet(members, all(s.is_finite for s in sets))


class _PooledSet(FiniteSet):
    def __init__(self, members, finite):
        super().__init__(members)
        self.is_finite = finite


class BallAroundCenter(FiniteSet):
    """Members of a candidate grid within sup-norm ``gamma`` of a center predictor.

    The sup norm is measured on ``probe_X``. With ``anti_radius`` set,
    members must also be within ``anti_radius`` of the center on the
    training points ``sample_X``.
    """

    def __init__(self, center: Hypothesis, gamma: float, grid: Sequence[Hypothesis],
                 probe_X, anti_radius: Optional[float] = None, sample_X=None, atol: float = 1e-12):
        probe_X = np.asarray(probe_X, dtype=float)
        c = center(probe_X)
        G = np.stack([h(probe_X) for h in grid])
        keep = np.max(np.abs(G - c[None, :]), axis=1) <= gamma + atol
        if anti_radius is not None:
            if sample_X is None:
                raise ValueError("anti mode needs the training points")
            cs = center(sample_X)
            Gs = np.stack([h(sample_X) for h in grid])
            keep &= np.max(np.abs(Gs - cs[None, :]), axis=1) <= anti_radius + atol
        members = [h for h, k in zip(grid, keep) if k]
        if not members:
            raise EmptyHypothesisSetError("no grid member lies within the ball around the center")
        super().__init__(members)
        self.center = center
        self.gamma = float(gamma)
        self.anti_radius = anti_radius
        self.probe_X = probe_X


class FeatureMapSet(FiniteSet):
    """``{x -> f(phi(x)) : f in heads}`` for a finite list of heads."""

    def __init__(self, feature_map: Callable[[np.ndarray], np.ndarray],
                 heads: Sequence[Callable[[np.ndarray], np.ndarray]], gamma: float):
        heads = list(heads)
        hyps = [Hypothesis(lambda X, f=f: f(feature_map(X)), ("head", j)) for j, f in enumerate(heads)]
        super().__init__(hyps)
        self.feature_map = feature_map
        self.heads = heads
        self.gamma = float(gamma)


# --------------------------------------------------------------------------
# mixtures of anchor predictors with L1-type constraints
# --------------------------------------------------------------------------


class L1MixSet(HypothesisSet):
    """``{x -> sum_j alpha_j f_j(x)}`` over a polyhedral set of weights.

    The weight set is the intersection of whichever constraints are given:
    the probability simplex (``simplex``) with per-coordinate ``cap``, the
    L1 ball of radius ``radius`` around ``center``, and ``||alpha||_1 <= l1_bound``.
    Linear objectives are maximised exactly (closed forms where they exist,
    a linear program otherwise).
    """

    def __init__(self, anchors: Sequence[Hypothesis], *, simplex: bool = True,
                 cap: Optional[float] = None, center=None, radius: Optional[float] = None,
                 l1_bound: Optional[float] = None,
                 anchor_evaluator: Optional[Callable[[np.ndarray], np.ndarray]] = None):
        anchors = list(anchors)
        if not anchors:
            raise EmptyHypothesisSetError("need at least one anchor predictor")
        K = len(anchors)
        self.anchors = anchors
        self.K = K
        self.simplex = bool(simplex)
        self.cap = None if cap is None else float(cap)
        self.center = None if center is None else np.asarray(center, dtype=float)
        self.radius = None if radius is None else float(radius)
        self.l1_bound = None if l1_bound is None else float(l1_bound)
        self._anchor_eval = anchor_evaluator
        if self.center is not None and self.center.shape != (K,):
            raise DimensionError("center must have one weight per anchor")
        if (self.center is None) != (self.radius is None):
            raise ValueError("center and radius go together")
        if not self.simplex and self.l1_bound is None and self.radius is None:
            raise ValueError("unbounded weight set")
        self._check_nonempty()
        self._candidates = None

    # -- constraint set ---------------------------------------------------
    def _check_nonempty(self):
        if self.simplex and self.cap is not None and self.cap * self.K < 1 - 1e-12:
            raise EmptyHypothesisSetError("capped simplex is empty: cap * K < 1")
        if self.center is not None:
            if self.simplex and (np.any(self.center < -1e-12) or abs(self.center.sum() - 1) > 1e-9):
                raise ValueError("center must lie in the simplex")
            if self.cap is not None and np.any(self.center > self.cap + 1e-12):
                raise ValueError("center violates the cap")
        if self.l1_bound is not None and self.l1_bound < 0:
            raise ValueError("l1_bound must be nonnegative")

    def contains(self, alpha, tol: float = 1e-9) -> bool:
        a = np.asarray(alpha, dtype=float)
        ok = True
        if self.simplex:
            ok &= bool(np.all(a >= -tol) and abs(a.sum() - 1) <= tol)
        if self.cap is not None:
            ok &= bool(np.all(a <= self.cap + tol))
        if self.center is not None:
            ok &= bool(np.abs(a - self.center).sum() <= self.radius + tol)
        if self.l1_bound is not None:
            ok &= bool(np.abs(a).sum() <= self.l1_bound + tol)
        return ok

    def default_point(self) -> np.ndarray:
        if self.center is not None:
            return self.center.copy()
        if self.simplex:
            return np.full(self.K, 1.0 / self.K)
        return np.zeros(self.K)

    def linear_max(self, v) -> tuple[float, np.ndarray]:
        """Maximise ``alpha . v`` over the weight set; returns (value, argmax)."""
        v = np.asarray(v, dtype=float)
        simplex_cap = self.cap is not None and self.cap < 1.0
        if not self.simplex and self.center is None:
            j = int(np.argmax(np.abs(v)))
            a = np.zeros(self.K)
            a[j] = self.l1_bound * (1.0 if v[j] >= 0 else -1.0)
            return float(a @ v), a
        if self.simplex and self.l1_bound is None or (self.simplex and self.l1_bound >= 1.0):
            if self.center is None:
                a = _capped_simplex_argmax(v, 1.0 if self.cap is None else self.cap)
                return float(a @ v), a
            if not simplex_cap:
                a = _simplex_ball_argmax(v, self.center, self.radius)
                return float(a @ v), a
        return self.linear_max_lp(v)

    def linear_max_lp(self, v) -> tuple[float, np.ndarray]:
        """Generic LP solution of :meth:`linear_max` (also used to cross-check closed forms)."""
        v = np.asarray(v, dtype=float)
        K = self.K
        # variables: alpha (K), u (K) with u >= |alpha - center| or u >= |alpha|
        c = np.concatenate([-v, np.zeros(K)])
        A_ub, b_ub = [], []
        eye = np.eye(K)
        ref = self.center if self.center is not None else np.zeros(K)
        A_ub.append(np.hstack([eye, -eye]))
        b_ub.append(ref)
        A_ub.append(np.hstack([-eye, -eye]))
        b_ub.append(-ref)
        if self.center is not None:
            A_ub.append(np.concatenate([np.zeros(K), np.ones(K)])[None, :])
            b_ub.append([self.radius])
        if self.l1_bound is not None:
            if self.center is None:
                A_ub.append(np.concatenate([np.zeros(K), np.ones(K)])[None, :])
                b_ub.append([self.l1_bound])
            elif not self.simplex:
                raise NotImplementedError("l1_bound together with a centered ball")
        A_eq = b_eq = None
        lo = None if not self.simplex else 0.0
        hi = self.cap if self.cap is not None else None
        bounds = [(lo, hi)] * K + [(0, None)] * K
        if self.simplex:
            A_eq = np.concatenate([np.ones(K), np.zeros(K)])[None, :]
            b_eq = [1.0]
        res = linprog(c, A_ub=np.vstack(A_ub), b_ub=np.concatenate([np.ravel(b) for b in b_ub]),
                      A_eq=A_eq, b_eq=b_eq, bounds=bounds, method="highs")
        if res.status != 0:
            raise EmptyHypothesisSetError(f"weight set LP failed: {res.message}")
        a = res.x[:K]
        return float(a @ v), a

    # -- predictions ------------------------------------------------------
    def anchor_matrix(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if self._anchor_eval is not None:
            return np.asarray(self._anchor_eval(X), dtype=float).reshape(self.K, X.shape[0])
        return np.stack([f(X) for f in self.anchors])

    def mixture(self, alpha) -> Hypothesis:
        alpha = np.asarray(alpha, dtype=float).copy()
        return Hypothesis(lambda X, a=alpha: a @ self.anchor_matrix(X), ("alpha", tuple(np.round(alpha, 12))))

    def candidate_alphas(self) -> np.ndarray:
        """Default point plus the linear maximisers of +-e_j."""
        rows = [self.default_point()]
        for j in range(self.K):
            for s in (1.0, -1.0):
                e = np.zeros(self.K)
                e[j] = s
                rows.append(self.linear_max(e)[1])
        return np.unique(np.round(np.stack(rows), 12), axis=0)

    def candidates(self):
        if self._candidates is None:
            self._candidates = [self.mixture(a) for a in self.candidate_alphas()]
        return self._candidates

    def predict_matrix(self, X):
        return self.candidate_alphas() @ self.anchor_matrix(X)

    def sup_weighted(self, sample, weights, loss=None):
        w = np.asarray(weights, dtype=float)
        if w.shape[0] != sample.m:
            raise DimensionError("one weight per sample point is required")
        F = self.anchor_matrix(sample.X)
        if loss is None:
            return self.linear_max(F @ w)[0], True
        # loss-composed: candidate search over vertices, center, and
        # maximisers of linearised objectives
        alphas = [self.candidate_alphas()]
        base = self.default_point() @ F
        slope = np.sign(base - sample.y)
        slope[slope == 0] = 1.0
        for d in (F @ w, F @ (w * slope)):
            alphas.append(self.linear_max(d)[1][None, :])
            alphas.append(self.linear_max(-d)[1][None, :])
        A = np.vstack(alphas)
        L = loss(A @ F, sample.y[None, :])
        return float(np.max(L @ w)), False

    def prediction_range(self, X):
        F = self.anchor_matrix(X)
        hi = np.array([self.linear_max(F[:, i])[0] for i in range(F.shape[1])])
        lo = np.array([-self.linear_max(-F[:, i])[0] for i in range(F.shape[1])])
        return lo, hi

    def loss_range(self, sample, loss):
        lo, hi = self.prediction_range(sample.X)
        return loss.interval_range(lo, hi, sample.y)


def _capped_simplex_argmax(v, cap):
    order = np.argsort(-v, kind="stable")
    a = np.zeros_like(v)
    remaining = 1.0
    for j in order:
        take = min(cap, remaining)
        a[j] = take
        remaining -= take
        if remaining <= 0:
            break
    return a


def _simplex_ball_argmax(v, center, radius):
    a = center.copy()
    j_star = int(np.argmax(v))
    budget = min(radius / 2.0, 1.0 - a[j_star])
    for j in np.argsort(v, kind="stable"):
        if budget <= 0:
            break
        if j == j_star:
            continue
        move = min(a[j], budget)
        a[j] -= move
        a[j_star] += move
        budget -= move
    return a


class LinearBallSet(HypothesisSet):
    """``{x -> w^T A x : ||A^T w||_2 <= radius}``.

    Predictions equal ``u . x`` with ``u`` in the row space of ``A`` and
    ``||u|| <= radius``. ``A=None`` means the identity.
    """

    def __init__(self, A, radius: float, dim: Optional[int] = None):
        if A is None:
            if dim is None:
                raise ValueError("dimension needed when A is the identity")
            A = np.eye(dim)
        A = np.atleast_2d(np.asarray(A, dtype=float))
        self.A = A
        self.radius = float(radius)
        if self.radius < 0:
            raise ValueError("radius must be nonnegative")
        U, s, Vt = np.linalg.svd(A, full_matrices=False)
        rank = int(np.sum(s > 1e-10 * max(1.0, s.max(initial=0.0))))
        basis = Vt[:rank]
        # sign convention: largest-magnitude coordinate positive
        for r in range(rank):
            j = np.argmax(np.abs(basis[r]))
            if basis[r, j] < 0:
                basis[r] = -basis[r]
        self.basis = basis
        self.projector = basis.T @ basis
        self._candidates = None

    def direction_weights(self) -> np.ndarray:
        rows = [np.zeros(self.A.shape[1])]
        for b in self.basis:
            rows.append(self.radius * b)
            rows.append(-self.radius * b)
        return np.stack(rows)

    def candidates(self):
        if self._candidates is None:
            self._candidates = [
                Hypothesis(lambda X, u=u: X @ u, ("u", k)) for k, u in enumerate(self.direction_weights())
            ]
        return self._candidates

    def predict_matrix(self, X):
        return self.direction_weights() @ np.asarray(X, dtype=float).T

    def sup_weighted(self, sample, weights, loss=None):
        w = np.asarray(weights, dtype=float)
        if w.shape[0] != sample.m:
            raise DimensionError("one weight per sample point is required")
        g = self.projector @ (sample.X.T @ w)
        if loss is None:
            return self.radius * float(np.linalg.norm(g)), True
        U = self.direction_weights()
        nrm = np.linalg.norm(g)
        if nrm > 0:
            U = np.vstack([U, self.radius * g / nrm, -self.radius * g / nrm])
        L = loss(U @ sample.X.T, sample.y[None, :])
        return float(np.max(L @ w)), False

    def prediction_range(self, X):
        r = self.radius * np.linalg.norm(np.asarray(X, float) @ self.projector, axis=1)
        return -r, r

    def loss_range(self, sample, loss):
        lo, hi = self.prediction_range(sample.X)
        return loss.interval_range(lo, hi, sample.y)
