"""Exponential mechanism, privacy-ratio checks and the max-of-p tail reduction."""

from __future__ import annotations

import inspect
import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np

from .core import ABSOLUTE_LOSS, DiscreteDistribution, LabeledSample, LossFunction, SeededRng, as_rng, \
    draw_indices, replace_point


@dataclass(frozen=True)
class ScoreFamily:
    """``p`` real scores of a dataset, each with sensitivity at most ``sensitivity_Delta``."""

    p: int
    scorer: Callable[[int, object], float]
    sensitivity_Delta: float

    def __post_init__(self):
        if self.p < 1:
            raise ValueError("p must be at least 1")
        if self.sensitivity_Delta < 0:
            raise ValueError("sensitivity must be nonnegative")

    def scores(self, data) -> np.ndarray:
        return np.array([self.scorer(k, data) for k in range(self.p)], dtype=float)


@dataclass(frozen=True)
class MechanismOutput:
    chosen_index: int
    probs: np.ndarray
    epsilon: float

    def to_dict(self) -> dict:
        return {"chosen_index": self.chosen_index, "probs": [float(v) for v in self.probs],
                "epsilon": self.epsilon}


def mechanism_probs(scores, epsilon: float, Delta: float, include_zero_arm: bool = False) -> np.ndarray:
    """Selection probabilities ``∝ exp(epsilon f_k / (2 Delta))``, zero arm last."""
    f = np.asarray(scores, dtype=float).ravel()
    if f.size == 0 or not np.all(np.isfinite(f)):
        raise ValueError("scores must be a nonempty finite vector")
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    if include_zero_arm:
        f = np.append(f, 0.0)
    if Delta < 0:
        raise ValueError("Delta must be nonnegative")
    if Delta == 0:
        if np.ptp(f) > 0:
            raise ValueError("Delta = 0 leaves the temperature undefined for unequal scores")
        return np.full(f.size, 1.0 / f.size)
    logits = epsilon * f / (2 * Delta)
    w = np.exp(logits - logits.max())
    return w / w.sum()


def exponential_mechanism(scores, epsilon: float, Delta: float, include_zero_arm: bool = False,
                          rng=None) -> MechanismOutput:
    probs = mechanism_probs(scores, epsilon, Delta, include_zero_arm)
    gen = as_rng(rng).generator()
    idx = int(np.searchsorted(np.cumsum(probs), gen.random(), side="right"))
    return MechanismOutput(min(idx, probs.size - 1), probs, float(epsilon))


def verify_sensitivity(scorefam: ScoreFamily, neighbor_pairs: Sequence, tol: float = 1e-12):
    """Largest observed score change over neighbor pairs, and whether it respects the declared value."""
    worst = 0.0
    for a, b in neighbor_pairs:
        worst = max(worst, float(np.max(np.abs(scorefam.scores(a) - scorefam.scores(b)))))
    return worst, worst <= scorefam.sensitivity_Delta + tol


def check_dp_ratio(scorefam: ScoreFamily, epsilon: float, neighbor_pairs: Sequence, tol: float = 1e-9,
                   include_zero_arm: bool = False) -> bool:
    """Every selection probability changes by at most a factor ``e^epsilon`` across each pair."""
    bound = math.exp(epsilon) * (1 + tol)
    for a, b in neighbor_pairs:
        pa = mechanism_probs(scorefam.scores(a), epsilon, scorefam.sensitivity_Delta, include_zero_arm)
        pb = mechanism_probs(scorefam.scores(b), epsilon, scorefam.sensitivity_Delta, include_zero_arm)
        if np.any(pa > bound * pb) or np.any(pb > bound * pa):
            return False
    return True


def check_max_vs_expectation(scores, epsilon: float, Delta: float):
    """``max_k f_k <= E_{k ~ mechanism}[f_k] + (2 Delta / epsilon) ln p``, both sides in closed form."""
    f = np.asarray(scores, dtype=float).ravel()
    probs = mechanism_probs(f, epsilon, Delta)
    lhs = float(f.max())
    rhs = float(probs @ f) + 2 * Delta / epsilon * math.log(f.size)
    return lhs, rhs, lhs <= rhs + 1e-12


class TailCheck(NamedTuple):
    empirical_prob: float
    budget: float
    std_error: float
    threshold: float
    degenerate: bool

    @property
    def holds(self) -> bool:
        return self.degenerate or self.empirical_prob <= self.budget + 3 * self.std_error


def _vectorize(sampler: Callable) -> Callable[[np.random.Generator, int], np.ndarray]:
    """Accept ``sampler(gen, size)`` or a zero-argument ``sampler()``."""
    try:
        n_params = len(inspect.signature(sampler).parameters)
    except (TypeError, ValueError):
        n_params = 2
    if n_params >= 2:
        return lambda gen, size: np.asarray(sampler(gen, size), dtype=float).reshape(size)
    return lambda gen, size: np.array([sampler() for _ in range(size)], dtype=float)


def uniform_sampler(gen: np.random.Generator, size: int) -> np.ndarray:
    return gen.random(size)


def exponential_sampler(gen: np.random.Generator, size: int) -> np.ndarray:
    return gen.exponential(1.0, size)


def lemma_su_tail_check(sampler: Callable, p: int, n_outer: int, rng=None, n_inner: Optional[int] = None) -> TailCheck:
    """Estimate ``P[X >= 2 E max(0, X_1..X_p)]`` against the budget ``ln 2 / p``.

    The expectation of the max is estimated from ``n_inner`` groups of
    ``p`` draws, then the tail from ``n_outer`` fresh draws. A sampler with
    no spread is flagged as degenerate: the inequality is not claimed
    there (a constant 0 makes the event certain).
    """
    if p < 1 or n_outer < 1:
        raise ValueError("need p >= 1 and n_outer >= 1")
    draw = _vectorize(sampler)
    rng = as_rng(rng)
    n_inner = n_outer if n_inner is None else n_inner
    groups = draw(rng.child(0).generator(), n_inner * p).reshape(n_inner, p)
    threshold = 2 * float(np.maximum(groups.max(axis=1), 0.0).mean())
    x = draw(rng.child(1).generator(), n_outer)
    prob = float(np.mean(x >= threshold))
    degenerate = bool(np.ptp(x) == 0 and np.ptp(groups) == 0)
    budget = math.log(2) / p
    return TailCheck(prob, budget, math.sqrt(budget * (1 - min(budget, 1.0)) / n_outer), threshold, degenerate)


# --------------------------------------------------------------------------
# sup-gap scores over a super-sample
# --------------------------------------------------------------------------


def psi_score_family(family: Callable, D: DiscreteDistribution, m: int, p: int, beta: float,
                     loss: LossFunction = ABSOLUTE_LOSS) -> ScoreFamily:
    """Score k of a super-sample (a list of p samples of size m) is the sup-gap of its k-th sample.

    Replacing one point moves the empirical mean by at most ``1/m`` and,
    by hypothesis-set stability, both risks of a matched hypothesis by at
    most ``beta``; the declared sensitivity is ``1/m + 2 beta``.
    """
    from .bounds import sup_gap

    def scorer(k: int, super_sample) -> float:
        S = super_sample[k]
        if S.m != m:
            raise ValueError("every block of the super-sample must have size m")
        return sup_gap(family, D, S, loss)

    return ScoreFamily(p, scorer, 1 / m + 2 * beta)


def neighbor_super_samples(D: DiscreteDistribution, m: int, p: int, n_pairs: int, rng) -> list:
    """Pairs of super-samples that differ in exactly one point."""
    gen = as_rng(rng).generator()
    pairs = []
    for _ in range(n_pairs):
        blocks = [D.support.take(draw_indices(D, m, gen)) for _ in range(p)]
        k, i, a = int(gen.integers(p)), int(gen.integers(m)), int(gen.integers(D.n_atoms))
        other = list(blocks)
        other[k] = replace_point(blocks[k], i, D.atom(a))
        pairs.append((blocks, other))
    return pairs


def neighbor_samples(D: DiscreteDistribution, m: int, n_pairs: int, rng) -> list:
    """Pairs of samples of size m differing in one position."""
    gen = as_rng(rng).generator()
    pairs = []
    for _ in range(n_pairs):
        S = D.support.take(draw_indices(D, m, gen))
        i, a = int(gen.integers(m)), int(gen.integers(D.n_atoms))
        pairs.append((S, replace_point(S, i, D.atom(a))))
    return pairs
