"""Brute-force ground truth at tiny scale.

Nothing here samples: every quantity is an exhaustive enumeration, in
lexicographic order, and exceeding a budget raises :class:`BudgetError`.
Sign vectors are enumerated with bit ``i`` of the counter ``k``
controlling position ``i`` (bit set means ``-1``, i.e. swapped).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .core import DiscreteDistribution, LabeledSample, LossFunction, SeededRng, draw_indices, swap_sample
from .hypothesis_sets import HypothesisSet


class BudgetError(RuntimeError):
    """An exhaustive enumeration would exceed its budget."""


class NonFiniteDescriptorError(ValueError):
    """The operation needs an exactly enumerable hypothesis set."""


@dataclass(frozen=True)
class OracleBudget:
    max_sign_vectors: int = 2**20
    max_partitions: int = math.comb(16, 8)
    max_hypotheses: int = 10**4


DEFAULT_BUDGET = OracleBudget()


def sign_matrix(m: int, budget: OracleBudget = DEFAULT_BUDGET) -> np.ndarray:
    """All 2^m Rademacher vectors as rows, lexicographic in the bit counter."""
    if 2**m > budget.max_sign_vectors:
        raise BudgetError(f"2^{m} sign vectors exceed the budget of {budget.max_sign_vectors}")
    k = np.arange(2**m, dtype=np.int64)[:, None]
    bits = (k >> np.arange(m, dtype=np.int64)[None, :]) & 1
    return 1 - 2 * bits.astype(np.int8)


def transductive_sign_matrix(m: int, n: int, budget: OracleBudget = DEFAULT_BUDGET):
    """All 2^(m+n) transductive sign vectors with their probabilities.

    Entry value is ``(m+n)/n`` (probability ``n/(m+n)``) when the bit is
    clear, ``-(m+n)/m`` (probability ``m/(m+n)``) when set.
    """
    N = m + n
    bits = (1 - sign_matrix(N, budget)) // 2
    pos, neg = N / n, -N / m
    values = np.where(bits == 0, pos, neg)
    n_neg = bits.sum(axis=1)
    probs = (n / N) ** (N - n_neg) * (m / N) ** n_neg
    return values, probs


def _check_finite(hs: HypothesisSet, budget: OracleBudget):
    if not hs.is_finite:
        raise NonFiniteDescriptorError(f"{type(hs).__name__} is not an enumerable hypothesis set")
    if hs.n_candidates > budget.max_hypotheses:
        raise BudgetError(f"{hs.n_candidates} hypotheses exceed the budget of {budget.max_hypotheses}")


def exact_sup_gap(family: Callable, D: DiscreteDistribution, S: LabeledSample,
                  loss: LossFunction, budget: OracleBudget = DEFAULT_BUDGET) -> float:
    """``sup_{h in H_S} R(h) - R_S(h)`` with ``R`` computed exactly under ``D``."""
    hs = family(S)
    _check_finite(hs, budget)
    best = -math.inf
    for h in hs.candidates():
        gap = float(D.probs @ h.losses(D.support, loss)) - float(np.mean(h.losses(S, loss)))
        best = max(best, gap)
    return best


def exact_dd_rademacher(family: Callable, S: LabeledSample, T: LabeledSample,
                        loss: Optional[LossFunction], budget: OracleBudget = DEFAULT_BUDGET) -> float:
    """Exhaustive data-dependent Rademacher complexity over all 2^m sign vectors.

    Each sign vector builds its own swapped sample and hypothesis set and
    takes an explicit max over members; ``loss=None`` uses raw predictions.
    """
    m = S.m
    total = 0.0
    for sigma in sign_matrix(m, budget):
        hs = family(swap_sample(S, T, sigma))
        if hs.is_finite:
            best = -math.inf
            for h in hs.candidates():
                vals = h(T.X) if loss is None else h.losses(T, loss)
                best = max(best, float(vals @ sigma))
        else:
            best, exact = hs.sup_weighted(T, sigma, loss)
            if not exact:
                raise NonFiniteDescriptorError("descriptor cannot give an exact sup for this objective")
        total += best
    return total / (m * 2**m)


def loss_table(family_union, U: Optional[LabeledSample] = None, loss: Optional[LossFunction] = None,
               budget: OracleBudget = DEFAULT_BUDGET) -> np.ndarray:
    """Loss table (H, |U|) of a finite set on U; arrays pass through unchanged."""
    if isinstance(family_union, HypothesisSet):
        _check_finite(family_union, budget)
        if U is None or loss is None:
            raise ValueError("U and loss are needed to tabulate a hypothesis set")
        return family_union.loss_matrix(U, loss)
    return np.asarray(family_union, dtype=float)


def exact_transductive_rademacher(family_union, U=None, m: int = None, n: int = None, loss=None,
                                  budget: OracleBudget = DEFAULT_BUDGET) -> float:
    """Exact transductive Rademacher complexity of a finite set (or loss table) on U."""
    L = loss_table(family_union, U, loss, budget)
    if L.shape[1] != m + n:
        raise ValueError("loss table must have m+n columns")
    values, probs = transductive_sign_matrix(m, n, budget)
    sups = np.max(values @ L.T, axis=1) / (m + n)
    return float(probs @ sups)


def exact_transductive_expectation(family_union, U=None, m: int = None, n: int = None, loss=None,
                                   budget: OracleBudget = DEFAULT_BUDGET) -> float:
    """``E_{(S,T)}[sup_h R_T(h) - R_S(h)]`` over all C(m+n, m) partitions of U.

    ``family_union`` is a finite hypothesis set (tabulated on ``U`` with
    ``loss``) or directly a loss table of shape (H, m+n).
    """
    L = loss_table(family_union, U, loss, budget)
    N = m + n
    if L.shape[1] != N:
        raise ValueError("loss table must have m+n columns")
    count = math.comb(N, m)
    if count > budget.max_partitions:
        raise BudgetError(f"C({N},{m}) partitions exceed the budget of {budget.max_partitions}")
    total = 0.0
    row_sums = L.sum(axis=1)
    for S_idx in itertools.combinations(range(N), m):
        s = L[:, list(S_idx)].sum(axis=1)
        gap = (row_sums - s) / n - s / m
        total += float(gap.max())
    return total / count


def lemma_trans_slack(m: int, n: int) -> float:
    """Additive term ``sqrt(log(2e)(m+n)^3 / (2 (mn)^2))`` bounding the partition-averaged gap by the transductive complexity."""
    return math.sqrt(math.log(2 * math.e) * (m + n) ** 3 / (2 * (m * n) ** 2))


def exact_expmech_expectation(scores, epsilon: float, Delta: float, include_zero_arm: bool = False) -> float:
    """``sum_k p_k f_k`` for the exponential mechanism, in closed form."""
    f = np.asarray(scores, dtype=float)
    if include_zero_arm:
        f = np.append(f, 0.0)
    if Delta <= 0 or epsilon <= 0:
        raise ValueError("epsilon and Delta must be positive")
    logits = epsilon * f / (2 * Delta)
    w = np.exp(logits - logits.max())
    return float(w @ f / w.sum())


def symmetrization_check(family: Callable, D: DiscreteDistribution, m: int, n: int, eps: float,
                         loss: LossFunction, n_trials: int, rng: SeededRng) -> dict:
    """Monte Carlo check of the ghost-sample symmetrization inequality.

    Estimates ``P[sup gap > eps]`` and ``P[sup (R_T - R_S) > eps/2]`` on
    the same draws; requires ``n eps^2 >= 2``.
    """
    if n * eps**2 < 2:
        raise ValueError("symmetrization needs n * eps^2 >= 2")
    gen = rng.generator()
    lhs = rhs = 0
    for _ in range(n_trials):
        S = D.support.take(draw_indices(D, m, gen))
        T = D.support.take(draw_indices(D, n, gen))
        hs = family(S)
        _check_finite(hs, DEFAULT_BUDGET)
        risk = hs.loss_matrix(D.support, loss) @ D.probs
        emp_s = hs.loss_matrix(S, loss).mean(axis=1)
        emp_t = hs.loss_matrix(T, loss).mean(axis=1)
        lhs += bool(np.max(risk - emp_s) > eps)
        rhs += bool(np.max(emp_t - emp_s) > eps / 2)
    p_l, p_r = lhs / n_trials, rhs / n_trials
    se = math.sqrt(p_l * (1 - p_l) / n_trials) + 2 * math.sqrt(p_r * (1 - p_r) / n_trials)
    return {"lhs": p_l, "rhs": p_r, "combined_std_error": se, "n_trials": n_trials}
