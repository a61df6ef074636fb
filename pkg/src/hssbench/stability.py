"""Empirical hypothesis-set stability, CV-stability and diameters.

Sup-type quantities are estimated from below: perturbations are sampled
(or enumerated over the support of ``D`` with ``exhaustive=True``), and
sups over non-finite sets go through candidate search unless the
descriptor gives exact per-point loss ranges.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable, NamedTuple, Optional

import numpy as np

from .core import (ABSOLUTE_LOSS, DiscreteDistribution, LabeledSample, LossFunction, SeededRng,
                   draw_indices, replace_point)
from .hypothesis_sets import HypothesisSet


class Diameters(NamedTuple):
    delta_bar: float
    delta: float
    delta_max: float
    exact: bool


class CVStability(NamedTuple):
    chi: float
    chi_bar_contrib: float
    std_error: float
    exact: bool


@dataclass(frozen=True)
class StabilityReport:
    beta_hat: float
    chi_hat: float
    chi_bar_hat: float
    delta_bar_hat: float
    delta_hat: float
    delta_max_hat: float
    n_perturbations: int
    n_probe_points: int
    directionality: str = "lower_bound"
    n_samples: int = 1
    chi_std_error: float = 0.0
    chi_bar_std_error: float = 0.0
    delta_bar_std_error: float = 0.0

    def __post_init__(self):
        if self.directionality not in ("lower_bound", "exact"):
            raise ValueError("directionality is 'lower_bound' or 'exact'")

    def to_dict(self) -> dict:
        return asdict(self)


def _probe_sample(S: LabeledSample, D: Optional[DiscreteDistribution], probe_points) -> LabeledSample:
    if probe_points is not None:
        return probe_points if isinstance(probe_points, LabeledSample) else LabeledSample.from_points(probe_points)
    return S if D is None else D.support.concat(S)


def _perturbations(S: LabeledSample, D: DiscreteDistribution, n_perturbations: int,
                   gen: np.random.Generator, exhaustive: bool):
    """(index, atom, weight) triples; indices cycle so every position is used equally."""
    m = S.m
    if exhaustive:
        return [(i, a, D.probs[a] / m) for i in range(m) for a in range(D.n_atoms) if D.probs[a] > 0]
    if n_perturbations < 1:
        raise ValueError("n_perturbations must be at least 1")
    per_index = math.ceil(n_perturbations / m)
    n = per_index * m
    atoms = draw_indices(D, n, gen)
    return [(k % m, int(atoms[k]), 1.0 / n) for k in range(n)]


def hypothesis_set_distance(hs1: HypothesisSet, hs2: HypothesisSet, probe: LabeledSample,
                            loss: LossFunction, symmetric: bool = True) -> float:
    """``max_{h in H1} min_{h' in H2} max_z |L(h,z) - L(h',z)|`` over probe points."""
    L1 = hs1.loss_matrix(probe, loss)
    L2 = hs2.loss_matrix(probe, loss)
    dist = np.max(np.abs(L1[:, None, :] - L2[None, :, :]), axis=2)
    out = float(dist.min(axis=1).max())
    if symmetric:
        out = max(out, float(dist.min(axis=0).max()))
    return out


def estimate_beta(family: Callable, S: LabeledSample, D: DiscreteDistribution, probe_points=None,
                  n_perturbations: int = 100, rng: Optional[SeededRng] = None,
                  loss: LossFunction = ABSOLUTE_LOSS, exhaustive: bool = False) -> float:
    """Largest set distance between H_S and H_{S'} over one-point replacements S'.

    Both directions of the definition are checked. The result is exact
    for finite sets when ``exhaustive`` is set and the probes cover the
    support of ``D``.
    """
    rng = rng or SeededRng(0)
    probe = _probe_sample(S, D, probe_points)
    if probe.m == 0:
        raise ValueError("probe points must be nonempty")
    hs = family(S)
    best = 0.0
    for i, a, _ in _perturbations(S, D, n_perturbations, rng.generator(), exhaustive):
        hs2 = family(replace_point(S, i, D.atom(a)))
        best = max(best, hypothesis_set_distance(hs, hs2, probe, loss))
    return best


def estimate_cv_stability(family: Callable, S: LabeledSample, D: DiscreteDistribution,
                          n_perturbations: int = 100, rng: Optional[SeededRng] = None,
                          loss: LossFunction = ABSOLUTE_LOSS, exhaustive: bool = False) -> CVStability:
    """Average over (z in S, z' ~ D) of ``sup L(h', z) - L(h, z)``, h in H_S, h' in H_{S^{z<->z'}}."""
    rng = rng or SeededRng(0)
    hs = family(S)
    lo_S, _, exact = hs.loss_range(S, loss)
    vals, weights = [], []
    for i, a, w in _perturbations(S, D, n_perturbations, rng.generator(), exhaustive):
        hs2 = family(replace_point(S, i, D.atom(a)))
        _, hi, ex = hs2.loss_range(S.take([i]), loss)
        exact &= ex
        vals.append(float(hi[0] - lo_S[i]))
        weights.append(w)
    vals, weights = np.asarray(vals), np.asarray(weights)
    chi = max(0.0, float(weights @ vals))
    se = 0.0 if exhaustive else float(vals.std(ddof=1) / math.sqrt(len(vals))) if len(vals) > 1 else 0.0
    return CVStability(chi, chi, se, bool(exact))


def estimate_diameters(family: Callable, S: LabeledSample, D: Optional[DiscreteDistribution] = None,
                       rng: Optional[SeededRng] = None, loss: LossFunction = ABSOLUTE_LOSS) -> Diameters:
    """Per-point loss spreads of H_S on S, averaged (diameter) and maximised (max-diameter).

    ``delta_bar`` is this sample's contribution; average it over sample
    draws at the caller.
    """
    hs = family(S)
    lo, hi, exact = hs.loss_range(S, loss)
    spread = np.maximum(hi - lo, 0.0)
    mean = float(spread.mean())
    return Diameters(mean, mean, float(spread.max()), bool(exact))


def check_lemma1(report: StabilityReport, tol: float = 0.0) -> bool:
    """True iff chi <= Delta + beta and chi_bar <= Delta_bar + beta, up to ``tol``."""
    return (report.chi_hat <= report.delta_hat + report.beta_hat + tol
            and report.chi_bar_hat <= report.delta_bar_hat + report.beta_hat + tol)


def sample_stability(family: Callable, S: LabeledSample, D: DiscreteDistribution, n_perturbations: int,
                     rng: SeededRng, loss: LossFunction = ABSOLUTE_LOSS, exhaustive: bool = False,
                     probe_points=None) -> dict:
    """All per-sample quantities from one shared set of perturbations."""
    probe = _probe_sample(S, D, probe_points)
    hs = family(S)
    lo_S, hi_S, exact = hs.loss_range(S, loss)
    spread = np.maximum(hi_S - lo_S, 0.0)
    beta = 0.0
    vals, weights = [], []
    perts = _perturbations(S, D, n_perturbations, rng.generator(), exhaustive)
    for i, a, w in perts:
        hs2 = family(replace_point(S, i, D.atom(a)))
        beta = max(beta, hypothesis_set_distance(hs, hs2, probe, loss))
        _, hi, ex = hs2.loss_range(S.take([i]), loss)
        exact &= ex and hs.is_finite and hs2.is_finite
        vals.append(float(hi[0] - lo_S[i]))
        weights.append(w)
    vals = np.asarray(vals)
    chi = max(0.0, float(np.asarray(weights) @ vals))
    chi_se = 0.0 if exhaustive or len(vals) < 2 else float(vals.std(ddof=1) / math.sqrt(len(vals)))
    support_covered = D is not None and probe.m >= D.n_atoms and probe_points is None
    return {
        "beta": beta, "chi": chi, "chi_se": chi_se,
        "delta": float(spread.mean()), "delta_max": float(spread.max()),
        "exact": bool(exact and exhaustive and support_covered),
        "n_perturbations": len(perts), "n_probe_points": probe.m,
    }


def stability_report(family: Callable, D: DiscreteDistribution, m: int, n_samples: int,
                     n_perturbations: int, rng: SeededRng, loss: LossFunction = ABSOLUTE_LOSS,
                     exhaustive: bool = False, probe_points=None) -> StabilityReport:
    """Aggregate per-sample quantities over ``n_samples`` draws of S ~ D^m.

    beta, chi, Delta and Delta_max take the max over draws (sup over S);
    chi_bar and Delta_bar take the mean.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    gen = rng.child(0).generator()
    rows = []
    for k in range(n_samples):
        S = D.support.take(draw_indices(D, m, gen))
        rows.append(sample_stability(family, S, D, n_perturbations, rng.child(1 + k), loss,
                                     exhaustive, probe_points))
    chi = np.array([r["chi"] for r in rows])
    dl = np.array([r["delta"] for r in rows])
    k_star = int(np.argmax(chi))
    se = (lambda a: float(a.std(ddof=1) / math.sqrt(a.size)) if a.size > 1 else 0.0)
    return StabilityReport(
        beta_hat=max(r["beta"] for r in rows),
        chi_hat=float(chi.max()),
        chi_bar_hat=float(chi.mean()),
        delta_bar_hat=float(dl.mean()),
        delta_hat=float(dl.max()),
        delta_max_hat=max(r["delta_max"] for r in rows),
        n_perturbations=sum(r["n_perturbations"] for r in rows),
        n_probe_points=rows[0]["n_probe_points"],
        directionality="exact" if all(r["exact"] for r in rows) else "lower_bound",
        n_samples=n_samples,
        chi_std_error=rows[k_star]["chi_se"],
        chi_bar_std_error=math.hypot(se(chi), float(np.mean([r["chi_se"] for r in rows])) / math.sqrt(n_samples)),
        delta_bar_std_error=se(dl),
    )
