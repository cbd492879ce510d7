"""Exponential-family GLM families written through the relation function.

A family is the pair ``(b, u)``: ``b`` is the cumulant of the natural
exponential family and ``u`` maps the linear predictor ``eta = x'beta`` to the
natural parameter. The log-likelihood contribution of one observation is
``y * u(eta) - b(u(eta))`` (up to a term free of ``beta``), its mean is
``b'(u(eta))`` and its variance ``b''(u(eta))``.

Canonical families have ``u(eta) = eta``. The probit and negative-binomial
families do not, and carry the extra ``u'`` and ``u''`` terms in the score and
Hessian.

All methods are vectorized over ``eta`` (and ``y``) and stay finite for large
``|eta|``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .numerics import log_phi_cdf, log_phi_pdf, sample

# exp() of anything above this overflows float64
_EXP_CAP = 700.0


class FamilyKind(str, enum.Enum):
    GAUSSIAN = "gaussian"
    LOGIT = "logit"
    PROBIT = "probit"
    POISSON = "poisson"
    NEGBIN = "negbin"


CANONICAL = {FamilyKind.GAUSSIAN, FamilyKind.LOGIT, FamilyKind.POISSON}


class SupportError(ValueError):
    """Response outside the support of the family."""


def _exp(eta):
    return np.exp(np.minimum(eta, _EXP_CAP))


def _scalar(x):
    return float(x) if np.ndim(x) == 0 else x


@dataclass(frozen=True)
class FamilyModel:
    """One GLM family together with its link.

    Parameters
    ----------
    kind : FamilyKind or str
        ``"gaussian"``, ``"logit"``, ``"probit"``, ``"poisson"`` or ``"negbin"``.
    dispersion : float
        The known size parameter ``theta`` of the negative binomial. Ignored
        by the other families, where it is conventionally 1.
    """

    kind: FamilyKind
    dispersion: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", FamilyKind(self.kind))
        if not (np.isfinite(self.dispersion) and self.dispersion > 0):
            raise ValueError("dispersion must be a positive finite number")

    @property
    def theta(self) -> float:
        return self.dispersion

    @property
    def canonical(self) -> bool:
        return self.kind in CANONICAL

    @property
    def is_bernoulli(self) -> bool:
        return self.kind in (FamilyKind.LOGIT, FamilyKind.PROBIT)

    def __str__(self):
        if self.kind is FamilyKind.NEGBIN:
            return f"negbin(theta={self.theta:g})"
        return self.kind.value

    # -- support -----------------------------------------------------------

    def check_support(self, y):
        y = np.asarray(y, dtype=float)
        if not np.all(np.isfinite(y)):
            raise SupportError("responses must be finite")
        if self.is_bernoulli and not np.all((y == 0) | (y == 1)):
            raise SupportError(f"{self} responses must be 0 or 1")
        if self.kind in (FamilyKind.POISSON, FamilyKind.NEGBIN) and not np.all((y >= 0) & (y == np.floor(y))):
            raise SupportError(f"{self} responses must be nonnegative integers")
        return y

    # -- relation function -------------------------------------------------

    def u_derivs(self, eta):
        """Return ``(u, u', u'')`` at ``eta``."""
        eta = np.asarray(eta, dtype=float)
        k = self.kind
        if k in CANONICAL:
            u, du, d2u = eta.copy(), np.ones_like(eta), np.zeros_like(eta)
        elif k is FamilyKind.NEGBIN:
            th = self.theta
            log_denom = np.logaddexp(np.log(th), eta)
            u = eta - log_denom
            # e^eta / (theta + e^eta), in [0, 1]
            frac = np.exp(eta - log_denom)
            du = th * np.exp(-log_denom)
            d2u = -frac * du
        else:
            m1, m2 = self._mills(eta)
            lp, lq = log_phi_cdf(eta)
            u = np.asarray(lp) - np.asarray(lq)
            du = m1 + m2
            d2u = m2 * (m2 - eta) - m1 * (m1 + eta)
        return _scalar(u), _scalar(du), _scalar(d2u)

    def _mills(self, eta):
        """``phi/Phi`` and ``phi/(1 - Phi)`` evaluated in log space."""
        lp, lq = log_phi_cdf(eta)
        lphi = log_phi_pdf(eta)
        return np.exp(lphi - lp), np.exp(lphi - lq)

    # -- moments -----------------------------------------------------------

    def mean(self, eta):
        """``b'(u(eta))``, the conditional mean of the response."""
        eta = np.asarray(eta, dtype=float)
        k = self.kind
        if k is FamilyKind.GAUSSIAN:
            mu = eta.copy()
        elif k is FamilyKind.LOGIT:
            mu = expit(eta)
        elif k is FamilyKind.PROBIT:
            mu = np.exp(log_phi_cdf(eta)[0])
        else:
            mu = _exp(eta)
        return _scalar(mu)

    def variance(self, eta):
        """``b''(u(eta))``; for the negative binomial ``mu + mu**2 / theta``."""
        eta = np.asarray(eta, dtype=float)
        k = self.kind
        if k is FamilyKind.GAUSSIAN:
            v = np.ones_like(eta)
        elif k is FamilyKind.LOGIT:
            p = expit(eta)
            v = p * expit(-eta)
        elif k is FamilyKind.PROBIT:
            lp, lq = log_phi_cdf(eta)
            v = np.exp(np.asarray(lp) + np.asarray(lq))
        elif k is FamilyKind.POISSON:
            v = _exp(eta)
        else:
            mu = _exp(eta)
            v = mu + mu * mu / self.theta
        return _scalar(v)

    def cumulant(self, eta):
        """``b(u(eta))`` as a function of the linear predictor."""
        eta = np.asarray(eta, dtype=float)
        k = self.kind
        if k is FamilyKind.GAUSSIAN:
            b = 0.5 * eta * eta
        elif k is FamilyKind.LOGIT:
            b = np.logaddexp(0.0, eta)
        elif k is FamilyKind.PROBIT:
            # log(1 + e^u) = -log(1 - Phi)
            b = -np.asarray(log_phi_cdf(eta)[1])
        elif k is FamilyKind.POISSON:
            b = _exp(eta)
        else:
            # -theta log(1 - e^u) = theta log(1 + mu / theta)
            b = self.theta * np.log1p(_exp(eta) / self.theta)
        return _scalar(b)

    # -- likelihood pieces -------------------------------------------------

    def loglik_contrib(self, y, eta):
        """Per-observation log-likelihood, without the ``beta``-free ``c(y)``.

        For the probit family this is ``y log Phi(eta) + (1-y) log(1-Phi(eta))``.
        """
        y = self.check_support(y)
        eta = np.asarray(eta, dtype=float)
        if not np.all(np.isfinite(eta)):
            raise ValueError("linear predictor must be finite")
        k = self.kind
        if k is FamilyKind.PROBIT:
            lp, lq = log_phi_cdf(eta)
            ll = np.where(y == 1, lp, 0.0) + np.where(y == 0, lq, 0.0)
        elif k is FamilyKind.NEGBIN:
            th = self.theta
            log_denom = np.logaddexp(np.log(th), eta)
            ll = y * (eta - log_denom) - th * (log_denom - np.log(th))
        else:
            ll = y * eta - np.asarray(self.cumulant(eta))
        return _scalar(ll)

    def score_weight(self, y, eta):
        """``u'(eta) * (y - mean(eta))``, the derivative of the contribution."""
        y = np.asarray(y, dtype=float)
        eta = np.asarray(eta, dtype=float)
        k = self.kind
        if k is FamilyKind.PROBIT:
            m1, m2 = self._mills(eta)
            # exact for y in {0, 1}; avoids (m1 + m2) * (y - Phi) cancellation
            return _scalar(y * m1 - (1.0 - y) * m2)
        if k is FamilyKind.NEGBIN:
            th = self.theta
            log_denom = np.logaddexp(np.log(th), eta)
            # theta/(theta+mu) * (y - mu) = theta * (y/(theta+mu) - mu/(theta+mu))
            return _scalar(th * (y * np.exp(-log_denom) - np.exp(eta - log_denom)))
        return _scalar(y - np.asarray(self.mean(eta)))

    def fisher_weight(self, eta):
        """``u'(eta)**2 * b''(u(eta))``, the expected information per unit weight."""
        eta = np.asarray(eta, dtype=float)
        k = self.kind
        if k in CANONICAL:
            return self.variance(eta)
        if k is FamilyKind.PROBIT:
            lp, lq = log_phi_cdf(eta)
            return _scalar(np.exp(2.0 * log_phi_pdf(eta) - np.asarray(lp) - np.asarray(lq)))
        th = self.theta
        # (theta/(theta+mu))^2 * mu (theta+mu)/theta = theta mu / (theta + mu)
        return _scalar(th * np.exp(eta - np.logaddexp(np.log(th), eta)))

    # -- sampling ----------------------------------------------------------

    def sample(self, eta, gen: np.random.Generator):
        """Independent responses with linear predictors ``eta``."""
        eta = np.asarray(eta, dtype=float)
        mu = np.asarray(self.mean(eta))
        k = self.kind
        if k is FamilyKind.GAUSSIAN:
            return mu + sample(gen, "normal", eta.shape, mean=0.0, sd=1.0)
        if self.is_bernoulli:
            return sample(gen, "bernoulli", eta.shape, p=mu)
        if k is FamilyKind.POISSON:
            return sample(gen, "poisson", eta.shape, mean=mu)
        lam = sample(gen, "gamma", eta.shape, shape=self.theta, mean=mu)
        return sample(gen, "poisson", eta.shape, mean=lam)


def make_family(tag: str, theta: float | None = None) -> FamilyModel:
    """Build a family from its config tag; ``"negbin"`` requires ``theta``."""
    kind = FamilyKind(tag)
    if kind is FamilyKind.NEGBIN:
        if theta is None:
            raise ValueError("negbin family requires theta")
        return FamilyModel(kind, float(theta))
    return FamilyModel(kind)
