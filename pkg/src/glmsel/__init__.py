"""Weighted maximum likelihood for GLMs and exhaustive subset selection."""
from .estimation import Dataset, FitResult, SolverOptions, fisher_info, fit, observed_hessian, score, weighted_loglik
from .family import FamilyKind, FamilyModel, SupportError, make_family
from .numerics import RngStream
from .selection import AIC, BIC, CriterionSpec, best_subset, enumerate_candidates, select

__version__ = "0.1.0"

__all__ = [
    "AIC",
    "BIC",
    "CriterionSpec",
    "Dataset",
    "FamilyKind",
    "FamilyModel",
    "FitResult",
    "RngStream",
    "SolverOptions",
    "SupportError",
    "best_subset",
    "enumerate_candidates",
    "fisher_info",
    "fit",
    "make_family",
    "observed_hessian",
    "score",
    "select",
    "weighted_loglik",
]
