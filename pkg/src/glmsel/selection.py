"""Exhaustive best-subset selection with penalized-likelihood criteria.

Candidate models are bitmasks over the columns of the design (bit ``j`` set
means column ``j`` is in the model). Every non-empty subset is fitted and the
minimizer of ``-loglik + penalty`` is returned.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import partial
from typing import Callable

import numpy as np

from .estimation import Dataset, FitResult, SolverOptions, fit
from .family import FamilyKind, FamilyModel

MAX_P = 20


class Criterion(str, enum.Enum):
    AIC = "aic"
    BIC = "bic"
    SCC = "scc"
    CUSTOM = "custom"


class Scale(str, enum.Enum):
    TOTAL = "total"
    PER_OBSERVATION = "per-observation"


class Label(str, enum.Enum):
    CORRECT = "correct"
    OVERFIT = "overfit"
    UNDERFIT = "underfit"


@dataclass(frozen=True)
class CriterionSpec:
    """Which penalty, on which scale.

    ``total``: ``-loglik + C``, with ``C = p`` (AIC), ``p log(n) / 2`` (BIC) or
    the stochastic-complexity penalty (SCC).

    ``per-observation``: ``-loglik / n + C``, with ``C = p / n`` (AIC) or
    ``p log(n) / n`` (BIC).

    For the Gaussian family the data-fit term profiles out the error
    variance: ``(n / 2) log(RSS / n)`` on the total scale and ``log(RSS / n)``
    per observation. Dependent linear models are scored this way.

    ``custom`` takes ``penalty_fn(n, p_alpha)`` and uses it as-is on either
    scale.
    """

    kind: Criterion = Criterion.BIC
    scale: Scale = Scale.TOTAL
    scc_epsilon: float = 1.0
    penalty_fn: Callable[[int, int], float] | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", Criterion(self.kind))
        object.__setattr__(self, "scale", Scale(self.scale))
        if self.kind is Criterion.CUSTOM and self.penalty_fn is None:
            raise ValueError("custom criterion needs penalty_fn")
        if self.kind is Criterion.SCC and self.scale is not Scale.TOTAL:
            raise ValueError("SCC is defined on the total scale only")
        if not self.scc_epsilon > 0:
            raise ValueError("scc_epsilon must be positive")

    @property
    def name(self) -> str:
        """Report label: ``"BIC"`` on the total scale, ``"BIC/n"`` per observation."""
        base = self.kind.value.upper()
        return base if self.scale is Scale.TOTAL else base + "/n"

    @classmethod
    def parse(cls, text: str, scc_epsilon: float = 1.0) -> "CriterionSpec":
        """``"bic"``, ``"aic:per-observation"``, ``"scc"`` and so on."""
        kind, _, scale = text.strip().lower().partition(":")
        return cls(Criterion(kind), Scale(scale or "total"), scc_epsilon)


AIC = CriterionSpec(Criterion.AIC, Scale.TOTAL)
BIC = CriterionSpec(Criterion.BIC, Scale.TOTAL)


@dataclass
class CandidateModel:
    alpha: int
    fit: FitResult
    criterion_value: float = np.inf

    @property
    def p_alpha(self) -> int:
        return popcount(self.alpha)

    @property
    def columns(self) -> list[int]:
        return mask_to_columns(self.alpha)


@dataclass
class SelectionOutcome:
    chosen: CandidateModel
    label: Label
    beta_full_error: float
    beta_full: np.ndarray
    candidates: list[CandidateModel]
    failed_fits: int = 0


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def mask_to_columns(mask: int) -> list[int]:
    return [j for j in range(mask.bit_length()) if mask >> j & 1]


def columns_to_mask(cols) -> int:
    m = 0
    for j in cols:
        m |= 1 << int(j)
    return m


def enumerate_candidates(p: int) -> list[int]:
    """All ``2**p - 1`` non-empty subsets of ``p`` columns, ascending."""
    if not 1 <= p <= MAX_P:
        raise ValueError(f"exhaustive enumeration needs 1 <= p <= {MAX_P}, got {p}")
    return list(range(1, 1 << p))


def penalty(spec: CriterionSpec, n: int, fit_result: FitResult | None, p_alpha: int) -> float:
    if n < 1:
        raise ValueError("n must be positive")
    k = spec.kind
    if k is Criterion.CUSTOM:
        return float(spec.penalty_fn(n, p_alpha))
    if k is Criterion.SCC:
        if fit_result is None:
            raise ValueError("SCC needs the sub-model fit")
        sign, logdet = np.linalg.slogdet(np.asarray(fit_result.fisher))
        if sign <= 0:
            return np.inf
        mags = np.abs(fit_result.beta_hat[1:]) + spec.scc_epsilon * n ** -0.25
        return 0.5 * logdet + float(np.sum(np.log(mags)))
    if spec.scale is Scale.TOTAL:
        return float(p_alpha) if k is Criterion.AIC else 0.5 * p_alpha * np.log(n)
    return p_alpha / n if k is Criterion.AIC else p_alpha * np.log(n) / n


def _scaled_penalty(spec: CriterionSpec, factor: float, n: int, p_alpha: int) -> float:
    return factor * n * penalty(spec, n, None, p_alpha)


def total_equivalent(spec: CriterionSpec, fam: FamilyModel) -> CriterionSpec:
    """Total-scale criterion that ranks candidates exactly like ``spec``.

    A per-observation value is ``1/n`` times a total-scale one, except for the
    Gaussian profile, whose ``log(RSS / n)`` is ``2/n`` times the total data
    fit. The returned custom penalty absorbs that factor, so its values are a
    positive multiple of those of ``spec`` and the argmin is the same.
    """
    if spec.scale is Scale.TOTAL:
        return spec
    if spec.kind is Criterion.CUSTOM:
        raise ValueError("custom penalties are used as given on either scale")
    factor = 0.5 if fam.kind is FamilyKind.GAUSSIAN else 1.0
    return CriterionSpec(Criterion.CUSTOM, Scale.TOTAL, spec.scc_epsilon, partial(_scaled_penalty, spec, factor))


def criterion_value(spec: CriterionSpec, ds: Dataset, fam: FamilyModel, cand: CandidateModel) -> float:
    """Penalized criterion of a fitted candidate; ``inf`` if the fit failed."""
    f = cand.fit
    if not f.converged:
        return np.inf
    n = ds.n
    if fam.kind is FamilyKind.GAUSSIAN:
        resid = ds.y - ds.X[:, cand.columns] @ f.beta_hat
        data_fit = float(np.log(np.mean(resid**2)))
        if spec.scale is Scale.TOTAL:
            data_fit *= 0.5 * n
    elif spec.scale is Scale.TOTAL:
        data_fit = -f.loglik
    else:
        data_fit = -f.loglik / n
    return data_fit + penalty(spec, n, f, cand.p_alpha)


def fit_candidates(ds: Dataset, fam: FamilyModel, opts: SolverOptions | None = None) -> list[CandidateModel]:
    """Fit every non-empty sub-model of ``ds``, in ascending bitmask order."""
    return [CandidateModel(m, fit(ds.columns(mask_to_columns(m)), fam, opts)) for m in enumerate_candidates(ds.p)]


def classify(chosen: int, alpha0: int) -> Label:
    if chosen == alpha0:
        return Label.CORRECT
    if chosen & alpha0 == alpha0:
        return Label.OVERFIT
    return Label.UNDERFIT


def embed(alpha: int, beta_sub, p: int) -> np.ndarray:
    full = np.zeros(p)
    full[mask_to_columns(alpha)] = beta_sub
    return full


def best_subset(
    spec: CriterionSpec,
    ds: Dataset,
    fam: FamilyModel,
    candidates: list[CandidateModel] | None = None,
    opts: SolverOptions | None = None,
) -> tuple[CandidateModel, list[CandidateModel]]:
    """Minimizer of ``spec`` over all sub-models, and every scored candidate.

    Ties go to the smaller model, then to the smaller bitmask.
    """
    if candidates is None:
        candidates = fit_candidates(ds, fam, opts)
    scored = [CandidateModel(c.alpha, c.fit, criterion_value(spec, ds, fam, c)) for c in candidates]
    return min(scored, key=lambda c: (c.criterion_value, c.p_alpha, c.alpha)), scored


def select(
    spec: CriterionSpec,
    ds: Dataset,
    fam: FamilyModel,
    alpha0: int,
    beta0,
    candidates: list[CandidateModel] | None = None,
    opts: SolverOptions | None = None,
) -> SelectionOutcome:
    """Best subset under ``spec``, labelled against the true model ``alpha0``.

    Ties go to the smaller model, then to the smaller bitmask. Pre-fitted
    ``candidates`` (from :func:`fit_candidates`) can be passed to score
    several criteria on one set of fits.
    """
    beta0 = np.asarray(beta0, dtype=float)
    if alpha0 <= 0 or alpha0 >= 1 << ds.p:
        raise ValueError("alpha0 must be a non-empty subset of the columns")
    if beta0.shape != (ds.p,):
        raise ValueError("beta0 must have one entry per column")
    if columns_to_mask(np.flatnonzero(beta0)) != alpha0:
        raise ValueError("beta0 support must equal alpha0")
    if candidates is None:
        candidates = fit_candidates(ds, fam, opts)
    best, scored = best_subset(spec, ds, fam, candidates)
    beta_full = embed(best.alpha, best.fit.beta_hat, ds.p)
    return SelectionOutcome(
        chosen=best,
        label=classify(best.alpha, alpha0),
        beta_full_error=float(np.sum((beta_full - beta0) ** 2)),
        beta_full=beta_full,
        candidates=scored,
        failed_fits=sum(not c.fit.converged for c in candidates),
    )
