"""Shared instances for the test-suite: small distributions and families."""

from __future__ import annotations

import numpy as np

from hssbench.applications import (BaggingHypothesisSet, DistillationHypothesisSet, FeatureMapHypothesisSet,
                                   PCRHypothesisSet, SCOMixtureHypothesisSet)
from hssbench.complexity import fixed_family, kernel_expansion_family, linear_ball_family
from hssbench.applications import LabelMeanRegressor
from hssbench.core import DiscreteDistribution, LabeledSample, SeededRng, constant_hypothesis
from hssbench.hypothesis_sets import FiniteSet


def unit_ball_points(gen, n, d):
    X = gen.standard_normal((n, d))
    return X / np.maximum(1.0, np.linalg.norm(X, axis=1, keepdims=True))


def random_distribution(seed: int, n_atoms: int = 5, d: int = 2, uniform: bool = False) -> DiscreteDistribution:
    gen = SeededRng(seed).generator()
    X = unit_ball_points(gen, n_atoms, d)
    y = gen.random(n_atoms)
    support = LabeledSample(X, y)
    if uniform:
        return DiscreteDistribution.uniform(support)
    p = gen.dirichlet(np.ones(n_atoms))
    return DiscreteDistribution(support, p)


def random_pair(seed: int, m: int, d: int = 2):
    gen = SeededRng(seed).child(1).generator()
    S = LabeledSample(unit_ball_points(gen, m, d), gen.random(m))
    T = LabeledSample(unit_ball_points(gen, m, d), gen.random(m))
    return S, T


def label_mean_family():
    return lambda S: FiniteSet([LabelMeanRegressor().fit(S.X, S.y).as_hypothesis()])


def constant_family(values=(0.0, 0.3, 0.7, 1.0)):
    return fixed_family(FiniteSet([constant_hypothesis(v) for v in values]))


def distillation_family(gamma=0.15, n_grid=11):
    return DistillationHypothesisSet(teacher="label-mean", gamma=gamma, n_grid=n_grid).as_family()


def finite_bagging_family(k=6, p=3, C=2.0, seed=3):
    return BaggingHypothesisSet(k=k, p=p, C=C, weights="finite", random_state=seed).as_family()


def capped_bagging_family(k=6, p=3, C=2.0, seed=3):
    return BaggingHypothesisSet(k=k, p=p, C=C, weights="capped-simplex", random_state=seed).as_family()


def feature_map_family():
    return FeatureMapHypothesisSet(map_kind="pca", n_components=1, gamma=1.0, n_heads=4, n_probe=1).as_family()


def pcr_family():
    return PCRHypothesisSet(n_components=1, gamma=1.0).as_family()


def sco_family():
    return SCOMixtureHypothesisSet(K=3, sgd_steps=60, random_state=1).as_family()


# (name, family factory, target, max m) for the oracle-agreement corpus
ORACLE_CORPUS = [
    ("finite-constant", constant_family, "loss", 12),
    ("label-mean", label_mean_family, "loss", 12),
    ("distillation", distillation_family, "loss", 12),
    ("bagging-finite", finite_bagging_family, "loss", 10),
    ("bagging-capped-raw", capped_bagging_family, "raw", 10),
    ("feature-map", feature_map_family, "loss", 8),
    ("kernel-expansion", lambda: kernel_expansion_family(1.0), "raw", 12),
    ("linear-ball", lambda: linear_ball_family(1.0), "raw", 12),
    ("pcr", pcr_family, "raw", 8),
    ("sco-mixture-raw", sco_family, "raw", 6),
]
