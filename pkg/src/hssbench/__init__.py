"""Estimators, bounds and oracles for sample-dependent hypothesis sets."""

from .core import (ABSOLUTE_LOSS, HINGE_LOSS, SQUARED_LOSS, DimensionError, DiscreteDistribution, Hypothesis,
                   LabeledPoint, LabeledSample, LossFunction, LossKind, SeededRng, constant_hypothesis,
                   draw_sample, empirical_risk, linear_hypothesis, make_loss, replace_point, swap_sample,
                   true_risk)
from .hypothesis_sets import (BallAroundCenter, EmptyHypothesisSetError, FeatureMapSet, FiniteSet,
                              HypothesisSet, L1MixSet, LinearBallSet)
from .complexity import (EstimateReport, concentration_bound, dd_rademacher_exact, dd_rademacher_mc,
                         linear_norm_bound, massart_l1_bound, transductive_rademacher_exact,
                         transductive_rademacher_mc, union_rademacher)
from .stability import (StabilityReport, check_lemma1, estimate_beta, estimate_cv_stability,
                        estimate_diameters, stability_report)
from .bounds import (BoundInputs, BoundReport, fv_bound, pac_bayes_bound, theorem1_bound, theorem2_bound,
                     validate_bound_coverage)
from .mechanisms import (MechanismOutput, ScoreFamily, check_dp_ratio, check_max_vs_expectation,
                         exponential_mechanism, lemma_su_tail_check)
from .oracle import BudgetError, OracleBudget

__version__ = "0.1.0"
