"""Rademacher-type complexities of sample-dependent hypothesis sets.

A *family* is any callable mapping a :class:`LabeledSample` to a
:class:`HypothesisSet`. Estimators take the sup over the loss class by
default (``loss`` given); pass ``loss=None`` to work on raw predictions.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass
from enum import Enum
from typing import Callable, Optional

import numpy as np

from .core import (DimensionError, DiscreteDistribution, Hypothesis, LabeledSample, LossFunction,
                   SeededRng, draw_indices, swap_sample)
from .hypothesis_sets import FiniteSet, HypothesisSet, L1MixSet, LinearBallSet, pooled
from .oracle import BudgetError, sign_matrix, transductive_sign_matrix
from .parallel import run_blocks

EXACT_CAP = 20

Family = Callable[[LabeledSample], HypothesisSet]


class SignScheme(str, Enum):
    RADEMACHER = "rademacher"
    TRANSDUCTIVE = "transductive"


@dataclass(frozen=True)
class SignVector:
    values: np.ndarray
    scheme: SignScheme = SignScheme.RADEMACHER
    m: Optional[int] = None
    n: Optional[int] = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", v)
        if self.scheme is SignScheme.RADEMACHER:
            if not np.all(np.abs(v) == 1):
                raise ValueError("Rademacher entries must be +1 or -1")
        else:
            if self.m is None or self.n is None or v.shape[0] != self.m + self.n:
                raise DimensionError("transductive signs need m + n entries")
            N = self.m + self.n
            ok = np.isclose(v, N / self.n) | np.isclose(v, -N / self.m)
            if not np.all(ok):
                raise ValueError("transductive entries must be (m+n)/n or -(m+n)/m")

    def __len__(self):
        return self.values.shape[0]


def rademacher_signs(gen: np.random.Generator, size: int, m: int) -> np.ndarray:
    return 1 - 2 * gen.integers(0, 2, size=(size, m), dtype=np.int8)


def transductive_signs(gen: np.random.Generator, size: int, m: int, n: int) -> np.ndarray:
    N = m + n
    neg = gen.random((size, N)) < m / N
    return np.where(neg, -N / m, N / n)


@dataclass(frozen=True)
class EstimateReport:
    value: float
    std_error: float
    n_draws: int
    exact: bool
    lower_bound_of_sup: bool
    scheme: str = SignScheme.RADEMACHER.value
    quantity: str = "rademacher"

    def __post_init__(self):
        if self.exact and self.std_error != 0:
            raise ValueError("exact estimates carry zero standard error")
        if self.std_error < 0:
            raise ValueError("standard error must be nonnegative")

    def to_dict(self) -> dict:
        return asdict(self)


# --------------------------------------------------------------------------
# data-dependent Rademacher complexity
# --------------------------------------------------------------------------


class _SwapEvaluator:
    """``(1/m) sup_{g in G_{S_{T,sigma}}} sum_i sigma_i g(z^T_i)`` with a per-pattern cache."""

    def __init__(self, family: Family, S, T, loss, target: str):
        if S.m != T.m:
            raise DimensionError(f"|S|={S.m} but |T|={T.m}")
        self.family, self.S, self.T = family, S, T
        self.loss = None if target == "raw" else loss
        if target not in ("loss", "raw"):
            raise ValueError("target must be 'loss' or 'raw'")
        if target == "loss" and loss is None:
            raise ValueError("a loss is required for the loss-class target")
        self.cache: dict[bytes, tuple[float, bool]] = {}

    def __call__(self, sigma: np.ndarray) -> tuple[float, bool]:
        key = np.packbits(sigma < 0).tobytes()
        hit = self.cache.get(key)
        if hit is None:
            hs = self.family(swap_sample(self.S, self.T, sigma))
            v, exact = hs.sup_weighted(self.T, sigma.astype(float), self.loss)
            hit = (v / self.S.m, exact)
            self.cache[key] = hit
        return hit

    def batch(self, sigmas: np.ndarray) -> tuple[np.ndarray, bool]:
        _, first, inverse = np.unique(np.packbits(sigmas < 0, axis=1), axis=0,
                                      return_index=True, return_inverse=True)
        vals = np.empty(first.shape[0])
        exact = True
        for u, row in enumerate(first):
            vals[u], ex = self(sigmas[row])
            exact &= ex
        return vals[inverse.reshape(-1)], exact


def dd_rademacher_mc(family: Family, S: LabeledSample, T: LabeledSample, loss: Optional[LossFunction],
                     n_draws: int, rng: SeededRng, target: str = "loss",
                     threads: Optional[int] = None) -> EstimateReport:
    """Monte Carlo estimate of the data-dependent Rademacher complexity on (S, T)."""
    if n_draws < 1:
        raise ValueError("n_draws must be at least 1")
    ev = _SwapEvaluator(family, S, T, loss, target)
    flags = []

    def block(gen, size):
        vals, exact = ev.batch(rademacher_signs(gen, size, S.m))
        flags.append(exact)
        return vals

    mo = run_blocks(n_draws, rng, block, threads=threads)
    return EstimateReport(mo.mean, mo.std_error, n_draws, False, not all(flags))


def dd_rademacher_exact(family: Family, S: LabeledSample, T: LabeledSample, loss: Optional[LossFunction],
                        target: str = "loss", cap: int = EXACT_CAP) -> EstimateReport:
    """Exact value by enumerating all 2^m sign vectors (m <= cap)."""
    if S.m > cap:
        raise BudgetError(f"m={S.m} exceeds the exact-enumeration cap of {cap}")
    ev = _SwapEvaluator(family, S, T, loss, target)
    signs = sign_matrix(S.m)
    total = 0.0
    for sigma in signs:
        v, exact = ev(sigma)
        if not exact:
            raise ValueError("descriptor does not support an exact sup for this objective")
        total += v
    return EstimateReport(total / signs.shape[0], 0.0, signs.shape[0], True, False)


# --------------------------------------------------------------------------
# union relaxation
# --------------------------------------------------------------------------


def _subsample_indices(N: int, m: int, count: int, gen: np.random.Generator):
    total = math.comb(N, m)
    if count >= total:
        return [list(c) for c in itertools.combinations(range(N), m)], True
    seen, out = set(), []
    while len(out) < count:
        idx = tuple(sorted(gen.choice(N, size=m, replace=False).tolist()))
        if idx not in seen:
            seen.add(idx)
            out.append(list(idx))
    return out, False


class _UnionSup:
    def __init__(self, sets: list[HypothesisSet], sample: LabeledSample, loss):
        finite = [s for s in sets if s.is_finite]
        self.others = [s for s in sets if not s.is_finite]
        self.sample, self.loss = sample, loss
        if finite:
            mats = [s.predict_matrix(sample.X) if loss is None else s.loss_matrix(sample, loss) for s in finite]
            self.M = np.unique(np.vstack(mats), axis=0)
        else:
            self.M = None
        self.exact = all(s.sup_weighted(sample, np.ones(sample.m), loss)[1] for s in self.others)

    def sups(self, weights: np.ndarray) -> np.ndarray:
        out = np.full(weights.shape[0], -np.inf)
        if self.M is not None:
            out = np.max(weights @ self.M.T, axis=1)
        for s in self.others:
            out = np.maximum(out, [s.sup_weighted(self.sample, w, self.loss)[0] for w in weights])
        return out


def pooled_family_sets(family: Family, pool: LabeledSample, m: int, subsample_count: int,
                       rng: SeededRng) -> tuple[list[HypothesisSet], bool]:
    idx, complete = _subsample_indices(pool.m, m, subsample_count, rng.generator())
    return [family(pool.take(i)) for i in idx], complete


def union_rademacher(family: Family, S: LabeledSample, T: LabeledSample, loss: Optional[LossFunction],
                     subsample_count: int, n_draws: Optional[int], rng: SeededRng,
                     target: str = "loss", threads: Optional[int] = None) -> EstimateReport:
    """Standard empirical Rademacher complexity on T of the pooled set H_{S,T}.

    H_{S,T} is approximated by the union of H_U over ``subsample_count``
    size-m subsamples U of S+T (all of them when that many exist).
    ``n_draws=None`` enumerates all sign vectors.
    """
    if S.m != T.m:
        raise DimensionError(f"|S|={S.m} but |T|={T.m}")
    loss = None if target == "raw" else loss
    sets, complete = pooled_family_sets(family, S.concat(T), S.m, subsample_count, rng.child(1))
    us = _UnionSup(sets, T, loss)
    lower = (not complete) or (not us.exact)
    m = S.m
    if n_draws is None:
        if m > EXACT_CAP:
            raise BudgetError(f"m={m} exceeds the exact-enumeration cap")
        signs = sign_matrix(m).astype(float)
        value = float(np.mean(us.sups(signs))) / m
        return EstimateReport(value, 0.0, signs.shape[0], not lower, lower, quantity="union_rademacher")
    mo = run_blocks(n_draws, rng.child(2), lambda g, k: us.sups(rademacher_signs(g, k, m).astype(float)) / m,
                    threads=threads)
    return EstimateReport(mo.mean, mo.std_error, n_draws, False, lower, quantity="union_rademacher")


# --------------------------------------------------------------------------
# transductive Rademacher complexity
# --------------------------------------------------------------------------


def pool_family(family: Family, U: LabeledSample, m: int, max_subsamples: int,
                rng: SeededRng) -> tuple[HypothesisSet, bool]:
    """Union of H_S over size-m subsamples S of U (all of them when feasible)."""
    sets, complete = pooled_family_sets(family, U, m, max_subsamples, rng)
    if len(sets) == 1:
        return sets[0], complete
    return pooled(sets), complete


def transductive_rademacher_mc(family_union: HypothesisSet, U: LabeledSample, m: int, n: int,
                               loss: Optional[LossFunction], n_draws: int, rng: SeededRng,
                               threads: Optional[int] = None) -> EstimateReport:
    """Monte Carlo transductive Rademacher complexity of a pooled set on U."""
    if U.m != m + n:
        raise DimensionError(f"|U|={U.m} but m+n={m + n}")
    us = _UnionSup([family_union], U, loss)
    N = m + n
    mo = run_blocks(n_draws, rng, lambda g, k: us.sups(transductive_signs(g, k, m, n)) / N, threads=threads)
    return EstimateReport(mo.mean, mo.std_error, n_draws, False, not (family_union.is_finite or us.exact),
                          scheme=SignScheme.TRANSDUCTIVE.value, quantity="transductive_rademacher")


def transductive_rademacher_exact(family_union: HypothesisSet, U: LabeledSample, m: int, n: int,
                                  loss: Optional[LossFunction]) -> EstimateReport:
    if U.m != m + n:
        raise DimensionError(f"|U|={U.m} but m+n={m + n}")
    values, probs = transductive_sign_matrix(m, n)
    us = _UnionSup([family_union], U, loss)
    value = float(probs @ us.sups(values)) / (m + n)
    exact = family_union.is_finite or us.exact
    return EstimateReport(value, 0.0, values.shape[0], exact, not exact,
                          scheme=SignScheme.TRANSDUCTIVE.value, quantity="transductive_rademacher")


def sampled_u_transductive(family: Family, D: DiscreteDistribution, m: int, n: int,
                           loss: Optional[LossFunction], n_u: int, max_subsamples: int, n_draws: int,
                           rng: SeededRng, threads: Optional[int] = None) -> EstimateReport:
    """Largest transductive estimate over ``n_u`` super-samples U drawn from D.

    This replaces the max over every U of size m+n, which cannot be
    computed; the report is labelled ``sampled-U``.
    """
    best = None
    lower = False
    gen = rng.child(0).generator()
    for k in range(n_u):
        U = D.support.take(draw_indices(D, m + n, gen))
        union, complete = pool_family(family, U, m, max_subsamples, rng.child(1000 + k))
        rep = transductive_rademacher_mc(union, U, m, n, loss, n_draws, rng.child(2000 + k), threads)
        lower |= rep.lower_bound_of_sup or not complete
        if best is None or rep.value > best.value:
            best = rep
    return EstimateReport(best.value, best.std_error, best.n_draws * n_u, False, lower,
                          scheme="transductive/sampled-U", quantity="transductive_rademacher_max")


# --------------------------------------------------------------------------
# closed-form upper bounds
# --------------------------------------------------------------------------


def massart_l1_bound(Lambda1: float, S: LabeledSample, T: LabeledSample) -> float:
    """``r_T r_{S+T} Lambda1 sqrt(2 log(4m) / m)`` for L1-constrained kernel expansions."""
    if Lambda1 < 0:
        raise ValueError("Lambda1 must be nonnegative")
    m = T.m
    r_T = math.sqrt(float(np.sum(T.X**2)) / m)
    r_ST = float(max(np.linalg.norm(S.X, axis=1).max(), np.linalg.norm(T.X, axis=1).max()))
    return r_T * r_ST * Lambda1 * math.sqrt(2 * math.log(4 * m) / m)


def linear_norm_bound(Lambda: float, T: LabeledSample) -> tuple[float, float]:
    """``(Lambda sqrt(sum ||x_i||^2) / m, Lambda r / sqrt(m))`` for norm-ball linear classes."""
    if Lambda < 0:
        raise ValueError("Lambda must be nonnegative")
    m = T.m
    tight = Lambda * math.sqrt(float(np.sum(T.X**2))) / m
    r = float(np.linalg.norm(T.X, axis=1).max())
    return tight, Lambda * r / math.sqrt(m)


def concentration_bound(beta: float, m: int, delta: float) -> float:
    """Deviation radius of the empirical data-dependent Rademacher complexity."""
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    if beta < 0 or m < 1:
        raise ValueError("need beta >= 0 and m >= 1")
    return math.sqrt(((m * beta + 1) ** 2 + (m * beta) ** 2) * math.log(2 / delta) / (2 * m))


# --------------------------------------------------------------------------
# reference families for the closed-form bounds
# --------------------------------------------------------------------------


def kernel_expansion_family(Lambda1: float) -> Family:
    """``S -> {x -> sum_j alpha_j (x_j^S . x) : ||alpha||_1 <= Lambda1}``."""

    def family(S: LabeledSample) -> L1MixSet:
        XS = np.array(S.X)
        anchors = [Hypothesis(lambda X, v=XS[j]: X @ v, ("anchor", j)) for j in range(S.m)]
        return L1MixSet(anchors, simplex=False, l1_bound=Lambda1, anchor_evaluator=lambda X: XS @ X.T)

    return family


def linear_ball_family(Lambda: float, matrix_fn: Optional[Callable[[LabeledSample], np.ndarray]] = None) -> Family:
    """``S -> {x -> w^T A_S x : ||A_S^T w|| <= Lambda}`` (identity A when ``matrix_fn`` is None)."""

    def family(S: LabeledSample) -> LinearBallSet:
        A = None if matrix_fn is None else matrix_fn(S)
        return LinearBallSet(A, Lambda, dim=S.dim)

    return family


def fixed_family(hs: HypothesisSet) -> Family:
    """A data-independent family returning ``hs`` for every sample."""
    return lambda S: hs
