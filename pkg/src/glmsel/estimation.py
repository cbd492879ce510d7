"""Weighted maximum likelihood for GLMs by damped Fisher scoring.

The same solver serves independent responses (weighted MLE) and dependent
ones (the quasi-likelihood estimating equation has the same score form);
dependence only changes how data are generated and diagnosed.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .family import FamilyModel
from .numerics import SingularSystemError, SymMatrix, solve_psd

SEPARATION_LOGLIK = 1e-6
SEPARATION_BOUND = 1e3
# rounding budget, in ulps of sum |w_i l_i|, below which ascent is not resolvable
LOGLIK_ULPS = 64


@dataclass(frozen=True)
class Dataset:
    """Fixed design ``X`` (n x p), responses ``y`` and positive weights ``w``."""

    X: np.ndarray
    y: np.ndarray
    w: np.ndarray = None

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.X, dtype=float))
        y = np.asarray(self.y, dtype=float).ravel()
        n, p = X.shape
        w = np.ones(n) if self.w is None else np.asarray(self.w, dtype=float).ravel()
        if n < 1 or p < 1:
            raise ValueError("need n >= 1 and p >= 1")
        if y.shape != (n,) or w.shape != (n,):
            raise ValueError(f"X has {n} rows but y has {y.size} and w has {w.size}")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y)) and np.all(np.isfinite(w))):
            raise ValueError("dataset entries must be finite")
        if np.any(w <= 0):
            raise ValueError("weights must be positive")
        for name, v in (("X", X), ("y", y), ("w", w)):
            v.setflags(write=False)
            object.__setattr__(self, name, v)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    @property
    def weight_bound(self) -> float:
        """``max_i w_i``."""
        return float(self.w.max())

    @property
    def design_bound(self) -> float:
        """``max_ij |x_ij|``."""
        return float(np.abs(self.X).max())

    def columns(self, idx) -> "Dataset":
        """Sub-model dataset on the given column indices (0-based)."""
        return Dataset(self.X[:, list(idx)], self.y, self.w)

    def head(self, m: int) -> "Dataset":
        """First ``m`` observations."""
        return Dataset(self.X[:m], self.y[:m], self.w[:m])


@dataclass(frozen=True)
class SolverOptions:
    tol_score: float = 1e-8
    max_iter: int = 100
    max_step_halvings: int = 30
    rel_tol_loglik: float = 1e-12


@dataclass
class FitResult:
    beta_hat: np.ndarray
    loglik: float
    score_norm: float
    fisher: SymMatrix
    iterations: int
    converged: bool
    separation_flag: bool = False
    loglik_path: list = field(default_factory=list, repr=False)


def _beta(ds, beta):
    beta = np.asarray(beta, dtype=float).ravel()
    if beta.shape != (ds.p,):
        raise ValueError(f"beta has length {beta.size}, expected {ds.p}")
    return beta


def weighted_loglik(ds: Dataset, fam: FamilyModel, beta) -> float:
    """``sum_i w_i [y_i u(x_i'b) - b(u(x_i'b))]``."""
    eta = ds.X @ _beta(ds, beta)
    return float(ds.w @ np.asarray(fam.loglik_contrib(ds.y, eta)))


def loglik_resolution(ds: Dataset, fam: FamilyModel, beta) -> float:
    """Floating-point noise floor of :func:`weighted_loglik` at ``beta``."""
    eta = ds.X @ _beta(ds, beta)
    return LOGLIK_ULPS * np.finfo(float).eps * float(ds.w @ np.abs(fam.loglik_contrib(ds.y, eta)))


def score(ds: Dataset, fam: FamilyModel, beta) -> np.ndarray:
    """Gradient of :func:`weighted_loglik`."""
    eta = ds.X @ _beta(ds, beta)
    return ds.X.T @ (ds.w * fam.score_weight(ds.y, eta))


def fisher_info(ds: Dataset, fam: FamilyModel, beta) -> SymMatrix:
    """``sum_i w_i u'^2 b''(u) x_i x_i'`` at ``beta``."""
    eta = ds.X @ _beta(ds, beta)
    k = ds.w * np.asarray(fam.fisher_weight(eta))
    return SymMatrix(ds.X.T @ (k[:, None] * ds.X))


def observed_hessian(ds: Dataset, fam: FamilyModel, beta) -> SymMatrix:
    """Second derivative of the weighted log-likelihood.

    Adds the ``u''(eta) (y - mean)`` residual term to ``-fisher_info``; for
    canonical links that term is identically zero.
    """
    beta = _beta(ds, beta)
    info = fisher_info(ds, fam, beta)
    if fam.canonical:
        return SymMatrix(-np.asarray(info))
    eta = ds.X @ beta
    _, _, d2u = fam.u_derivs(eta)
    r = ds.w * np.asarray(d2u) * (ds.y - np.asarray(fam.mean(eta)))
    return SymMatrix(ds.X.T @ (r[:, None] * ds.X) - np.asarray(info))


def fit(ds: Dataset, fam: FamilyModel, opts: SolverOptions | None = None) -> FitResult:
    """Solve the weighted score equation by Fisher scoring from ``beta = 0``.

    Each step ``I(beta)^{-1} S(beta)`` is halved until the weighted
    log-likelihood does not decrease (up to its rounding noise, see
    :func:`loglik_resolution`, once the predicted gain is below it). Iteration stops when the score sup-norm
    drops below ``tol_score``, when a step with negligible relative
    log-likelihood change fails to halve the score (the numerical floor), or
    when no halving gives ascent. ``converged``
    reports whether the score criterion was met, so a stalled fit is never
    labelled converged.

    Non-convergence and divergence (Bernoulli separation) come back as a
    non-converged result; only malformed input raises.
    """
    opts = opts or SolverOptions()
    fam.check_support(ds.y)
    beta = np.zeros(ds.p)
    ll = weighted_loglik(ds, fam, beta)
    path = [ll]
    separated = False
    it = 0
    g = score(ds, fam, beta)
    gnorm = float(np.max(np.abs(g)))
    while gnorm >= opts.tol_score and it < opts.max_iter:
        info = fisher_info(ds, fam, beta)
        try:
            step = solve_psd(info, g)
        except SingularSystemError:
            break
        # near the root the predicted gain drops under the rounding noise of
        # the log-likelihood; there the full step is taken if it stays within
        # that noise
        noise = loglik_resolution(ds, fam, beta)
        slack = noise if 0.5 * float(g @ step) < noise else 0.0
        t = 1.0
        accepted = False
        for _ in range(opts.max_step_halvings + 1):
            cand = beta + t * step
            ll_new = weighted_loglik(ds, fam, cand)
            if np.isfinite(ll_new) and ll_new >= ll - slack:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            break
        it += 1
        change = abs(ll_new - ll) / max(1.0, abs(ll))
        beta, ll = cand, ll_new
        path.append(ll)
        g = score(ds, fam, beta)
        gnorm_prev, gnorm = gnorm, float(np.max(np.abs(g)))
        if fam.is_bernoulli and np.max(np.abs(beta)) > SEPARATION_BOUND:
            separated = True
            break
        # numerical floor: a Newton step in the noise regime that fails to
        # halve the score cannot make further progress
        if change < opts.rel_tol_loglik and slack > 0 and gnorm > 0.5 * gnorm_prev:
            break
    if fam.is_bernoulli and not separated:
        # complete separation: the score vanishes only as |beta| grows, so a
        # "root" where every response is fitted almost surely is a divergence
        contrib = np.asarray(fam.loglik_contrib(ds.y, ds.X @ beta))
        separated = bool(np.min(contrib) > -SEPARATION_LOGLIK)
    return FitResult(
        beta_hat=beta,
        loglik=ll,
        score_norm=gnorm,
        fisher=fisher_info(ds, fam, beta),
        iterations=it,
        converged=bool(gnorm < opts.tol_score) and not separated,
        separation_flag=separated,
        loglik_path=path,
    )
