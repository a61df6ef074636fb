"""Concrete sample-dependent hypothesis-set families and their certificates."""

from .bagging import (BaggingHypothesisSet, bagging_bound, bagging_family, bagging_rademacher_envelope,
                      bagging_stability, draw_subsamples, max_multiplicity, multiplicity_bound)
from .distillation import (DistillationHypothesisSet, anti_distillation_bound, constant_grid, distillation_bound,
                           distillation_family)
from .feature_map import (FeatureMapHypothesisSet, SensitivityError, feature_map_family, feature_map_stability,
                          linear_heads, pca_stability_curve, projector_change)
from .learners import (ConvergenceError, EigengapError, KernelRidgeRegressor, LabelMeanRegressor, PCAProjection,
                       ProjectedSGDRegressor, RidgeRegressor, jacobi_eigh, principal_projector)
from .pcr import PCRHypothesisSet, pcr_family, pcr_rademacher_certificate
from .registry import FAMILY_NAMES, certified_coefficients, make_estimator, make_family
from .sco import SCOMixtureHypothesisSet, auto_radius, sco_bound, sco_diameter_certificate, sco_mixture_family

__all__ = [name for name in dir() if not name.startswith("_")]
