"""Generalization bound calculators and an empirical coverage harness.

All logarithms are natural. Coefficients that are unknown may be passed
as ``math.inf``; a branch that depends on an infinite coefficient is
infinite and drops out of the minimum. Values above 1 are vacuous for
losses in [0, 1]; they are reported unchanged with a flag.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field, replace
from enum import Enum
from typing import Callable, Optional

import numpy as np

from .complexity import dd_rademacher_mc, sampled_u_transductive
from .core import ABSOLUTE_LOSS, DiscreteDistribution, LabeledSample, LossFunction, SeededRng, draw_indices
from .parallel import map_ordered

log = logging.getLogger(__name__)

INF = math.inf

# log numerators of each calculator: ln(c / delta) must be nonnegative
_BRANCH_DELTA_LIMIT = {"rademacher": 1.0, "cv_stability": 6.0, "uniform_stability": 4.0}


def _log_over(c: float, delta: float) -> float:
    return math.log(c / delta)


@dataclass(frozen=True)
class BoundInputs:
    m: int
    delta: float
    n: int = 0
    beta: float = INF
    chi: float = INF
    chi_bar: float = INF
    delta_max: float = INF
    rad: float = INF
    trans_rad: float = INF
    gamma_fv: float = INF

    def __post_init__(self):
        if self.m < 1 or self.n < 0:
            raise ValueError("need m >= 1 and n >= 0")
        if not self.delta > 0:
            raise ValueError("delta must be positive")
        for name in ("beta", "chi", "chi_bar", "delta_max", "rad", "trans_rad", "gamma_fv"):
            v = getattr(self, name)
            if math.isnan(v) or v < 0:
                raise ValueError(f"{name} must be a nonnegative number or inf")

    def to_dict(self) -> dict:
        return {k: (None if v == INF else v) for k, v in asdict(self).items()}

    @classmethod
    def from_dict(cls, data: dict) -> "BoundInputs":
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown bound inputs: {sorted(unknown)}")
        return cls(**{k: (INF if v is None else v) for k, v in data.items()})


@dataclass(frozen=True)
class BoundReport:
    branch_values: dict
    inputs: BoundInputs
    undefined_branches: tuple = ()
    min_value: float = field(init=False)

    def __post_init__(self):
        vals = list(self.branch_values.values())
        object.__setattr__(self, "min_value", min(vals) if vals else INF)

    @property
    def vacuous(self) -> dict:
        return {k: v > 1 for k, v in self.branch_values.items()}

    @property
    def min_vacuous(self) -> bool:
        return self.min_value > 1

    def to_dict(self) -> dict:
        fin = (lambda v: None if v == INF else v)
        return {
            "branch_values": {k: fin(v) for k, v in self.branch_values.items()},
            "vacuous": self.vacuous,
            "min_value": fin(self.min_value),
            "min_vacuous": self.min_vacuous,
            "undefined_branches": list(self.undefined_branches),
            "inputs": self.inputs.to_dict(),
        }


def theorem1_bound(inputs: BoundInputs) -> float:
    """Transductive gap bound: ``2 trans_rad + 3 sqrt(s ln(2/delta)) + 2 sqrt(s^3 mn)``, ``s = 1/m + 1/n``."""
    m, n, delta = inputs.m, inputs.n, inputs.delta
    if n < 1:
        raise ValueError("the transductive bound needs n >= 1")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    s = 1 / m + 1 / n
    return 2 * inputs.trans_rad + 3 * math.sqrt(s * _log_over(2, delta)) + 2 * math.sqrt(s**3 * m * n)


def _rademacher_branch(inp: BoundInputs) -> float:
    lead = min(2 * inp.rad, inp.chi_bar)
    if lead == INF or inp.beta == INF:
        return INF
    return lead + (1 + 2 * inp.beta * inp.m) * math.sqrt(_log_over(1, inp.delta) / (2 * inp.m))


def _cv_branch(inp: BoundInputs) -> float:
    if inp.chi == INF or inp.beta == INF:
        return INF
    return math.sqrt(math.e) * inp.chi + 4 * math.sqrt((1 / inp.m + 2 * inp.beta) * _log_over(6, inp.delta))


def _uniform_branch(inp: BoundInputs) -> float:
    if inp.m < 2:
        raise ValueError("the uniform-stability branch needs m >= 2")
    gamma = 3 * inp.beta + inp.delta_max
    if gamma == INF:
        return INF
    m, delta = inp.m, inp.delta
    return 48 * gamma * math.log(m) * _log_over(5 * m**3, delta) + math.sqrt(4 / m * _log_over(4, delta))


_BRANCHES = {"rademacher": _rademacher_branch, "cv_stability": _cv_branch, "uniform_stability": _uniform_branch}


def theorem2_bound(inputs: BoundInputs) -> BoundReport:
    """Evaluate the three stability/complexity branches and their minimum.

    A branch whose confidence term would take the log of a number below 1
    (``delta`` beyond its numerator) is listed in ``undefined_branches``
    and left out of the minimum. Values of ``delta >= 1`` are accepted so
    each branch formula can be evaluated on its own, with a warning.
    """
    if inputs.delta >= 1:
        log.warning("delta=%g is not a confidence level; evaluating formulas only", inputs.delta)
    values, undefined = {}, []
    for name, fn in _BRANCHES.items():
        if inputs.delta > _BRANCH_DELTA_LIMIT[name]:
            undefined.append(name)
        else:
            values[name] = fn(inputs)
    return BoundReport(values, inputs, tuple(undefined))


def fv_bound(gamma_fv: float, m: int, delta: float) -> float:
    """Uniform-stability high-probability bound with leading constant 47."""
    if m < 2:
        raise ValueError("m must be at least 2")
    if not 0 < delta <= 4:
        raise ValueError("delta must lie in (0, 4] for the confidence term to be defined")
    if gamma_fv < 0:
        raise ValueError("gamma_fv must be nonnegative")
    return 47 * gamma_fv * math.log(m) * math.log(5 * m**3 / delta) + math.sqrt(4 / m * math.log(4 / delta))


def kl_divergence(Q, P) -> float:
    Q = np.asarray(Q, dtype=float)
    P = np.asarray(P, dtype=float)
    if Q.shape != P.shape or Q.ndim != 1:
        raise ValueError("Q and P must be vectors over the same hypotheses")
    for name, v in (("Q", Q), ("P", P)):
        if np.any(v < 0) or not math.isclose(v.sum(), 1.0, abs_tol=1e-9):
            raise ValueError(f"{name} must be a probability vector")
    mask = Q > 0
    if np.any(P[mask] <= 0):
        raise ValueError("KL(Q||P) is undefined: Q puts mass where P has none")
    return float(np.sum(Q[mask] * np.log(Q[mask] / P[mask])))


def pac_bayes_bound(Q, P, empirical_gibbs_risk: float, m: int, delta: float) -> float:
    """Gibbs-risk bound ``emp + (4 + e^{-1/2}) sqrt(max(KL, 1)/m) + sqrt(ln(1/delta)/(2m))``."""
    if not 0 < delta <= 1:
        raise ValueError("delta must lie in (0, 1]")
    if m < 1:
        raise ValueError("m must be positive")
    kl = kl_divergence(Q, P)
    return (empirical_gibbs_risk + (4 + math.exp(-0.5)) * math.sqrt(max(kl, 1.0) / m)
            + math.sqrt(math.log(1 / delta) / (2 * m)))


# --------------------------------------------------------------------------
# coverage harness
# --------------------------------------------------------------------------


class BoundKind(str, Enum):
    THEOREM2_MIN = "theorem2-min"
    THEOREM2_RADEMACHER = "theorem2-rademacher"
    THEOREM2_CV = "theorem2-cv"
    THEOREM2_UNIFORM = "theorem2-uniform"
    THEOREM1 = "theorem1"
    FV = "fv"


@dataclass(frozen=True)
class CoverageResult:
    violation_rate: float
    mean_slack: float
    bound_value: float
    n_trials: int
    delta: float
    branch_violation_rates: dict
    inputs: BoundInputs

    @property
    def contract_limit(self) -> float:
        return self.delta + 3 * math.sqrt(self.delta * (1 - self.delta) / self.n_trials)

    @property
    def within_contract(self) -> bool:
        return self.violation_rate <= self.contract_limit

    def to_dict(self) -> dict:
        out = {k: v for k, v in asdict(self).items() if k != "inputs"}
        out["bound_value"] = None if self.bound_value == INF else self.bound_value
        out["contract_limit"] = self.contract_limit
        out["inputs"] = self.inputs.to_dict()
        return out


def sup_gap(family: Callable, D: DiscreteDistribution, S: LabeledSample, loss: LossFunction) -> float:
    """``max_{h in H_S} R(h) - R_S(h)`` for an enumerable hypothesis set."""
    hs = family(S)
    if not hs.is_finite:
        raise ValueError(f"{type(hs).__name__} does not admit an exact sup of the gap")
    risk = hs.loss_matrix(D.support, loss) @ D.probs
    emp = hs.loss_matrix(S, loss).mean(axis=1)
    return float(np.max(risk - emp))


def estimate_bound_inputs(family: Callable, D: DiscreteDistribution, m: int, delta: float, rng: SeededRng,
                          loss: LossFunction = ABSOLUTE_LOSS, n: int = 0, n_samples: int = 20,
                          rad_draws: int = 2000, beta: Optional[float] = None,
                          n_u: int = 4, trans_draws: int = 2000, max_subsamples: int = 16) -> BoundInputs:
    """Plug-in coefficients for a finite family.

    Expectations (``rad``, ``chi_bar``) are padded by three standard errors.
    Sup-type coefficients are maxima over ``n_samples`` sample draws with
    every support atom tried as a replacement; pass a certified ``beta``
    when one is known.
    """
    from .stability import stability_report

    rep = stability_report(family, D, m, n_samples, 1, rng.child(0), loss, exhaustive=True)
    b = rep.beta_hat if beta is None else beta
    rad = _rademacher_over_samples(family, D, m, loss, rad_draws, rng.child(1))
    trans = INF
    if n >= 1:
        t = sampled_u_transductive(family, D, m, n, loss, n_u, max_subsamples, trans_draws, rng.child(2))
        trans = t.value + 3 * t.std_error
    return BoundInputs(m=m, n=n, delta=delta, beta=b, chi=rep.chi_hat,
                       chi_bar=rep.chi_bar_hat + 3 * rep.chi_bar_std_error,
                       delta_max=rep.delta_max_hat, rad=rad, trans_rad=trans)


def _rademacher_over_samples(family, D, m, loss, n_draws, rng: SeededRng) -> float:
    """E over (S, T, sigma) of the normalized sup, plus three standard errors.

    One sign vector per fresh pair (S, T) gives an unbiased draw of the
    expected complexity.
    """
    gen = rng.generator()
    vals = np.empty(n_draws)
    for k in range(n_draws):
        S = D.support.take(draw_indices(D, m, gen))
        T = D.support.take(draw_indices(D, m, gen))
        rep = dd_rademacher_mc(family, S, T, loss, 1, rng.child(k), threads=1)
        vals[k] = rep.value
    return float(vals.mean() + 3 * vals.std(ddof=1) / math.sqrt(n_draws))


def bound_value(kind: BoundKind, inputs: BoundInputs) -> tuple[float, dict]:
    kind = BoundKind(kind)
    if kind == BoundKind.THEOREM1:
        v = theorem1_bound(inputs)
        return v, {"theorem1": v}
    if kind == BoundKind.FV:
        v = fv_bound(inputs.gamma_fv, inputs.m, inputs.delta)
        return v, {"fv": v}
    rep = theorem2_bound(inputs)
    branch = {BoundKind.THEOREM2_RADEMACHER: "rademacher", BoundKind.THEOREM2_CV: "cv_stability",
              BoundKind.THEOREM2_UNIFORM: "uniform_stability"}.get(kind)
    if branch is None:
        return rep.min_value, dict(rep.branch_values)
    return rep.branch_values[branch], {branch: rep.branch_values[branch]}


def validate_bound_coverage(family: Callable, D: DiscreteDistribution, bound_kind, m: int, delta: float,
                            n_trials: int, rng: SeededRng, inputs: Optional[BoundInputs] = None,
                            loss: LossFunction = ABSOLUTE_LOSS, n: Optional[int] = None,
                            threads: Optional[int] = None) -> CoverageResult:
    """Fraction of fresh samples S ~ D^m whose exact sup-gap exceeds the bound."""
    kind = BoundKind(bound_kind)
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    if n_trials < 1:
        raise ValueError("n_trials must be positive")
    if n is None:
        n = m if kind == BoundKind.THEOREM1 else 0
    if inputs is None:
        inputs = estimate_bound_inputs(family, D, m, delta, rng.child(0), loss, n=n)
    inputs = replace(inputs, m=m, n=n, delta=delta)
    value, branches = bound_value(kind, inputs)
    trial_rng = rng.child(1)

    def trial(k: int) -> float:
        gen = trial_rng.child(k).generator()
        return sup_gap(family, D, D.support.take(draw_indices(D, m, gen)), loss)

    gaps = np.array(map_ordered(trial, range(n_trials), threads))
    with np.errstate(invalid="ignore"):
        slack = value - gaps
    return CoverageResult(
        violation_rate=float(np.mean(gaps > value)),
        mean_slack=float(np.mean(slack)) if math.isfinite(value) else INF,
        bound_value=value,
        n_trials=n_trials,
        delta=delta,
        branch_violation_rates={k: float(np.mean(gaps > v)) for k, v in branches.items()},
        inputs=inputs,
    )
