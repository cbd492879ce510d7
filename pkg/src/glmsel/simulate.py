"""Synthetic experiments: bounded fixed designs and (weakly dependent) responses.

Every generator is a pure function of its arguments and an :class:`RngStream`.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .family import FamilyKind, FamilyModel
from .numerics import RngStream, sample


class CovariateLaw(str, enum.Enum):
    UNIFORM01 = "uniform01"
    BOUNDED = "bounded"


@dataclass(frozen=True)
class DesignSpec:
    """``n`` rows of ``p_signal + p_noise`` iid covariates.

    ``uniform01`` draws U(0, 1); ``bounded`` draws U(-bound, bound).
    """

    n: int
    p_signal: int
    p_noise: int = 0
    covariate_law: CovariateLaw = CovariateLaw.UNIFORM01
    seed: RngStream = RngStream(0)
    bound: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "covariate_law", CovariateLaw(self.covariate_law))
        if self.n < 1 or self.p_signal < 0 or self.p_noise < 0 or self.p < 1:
            raise ValueError(f"invalid design dimensions n={self.n}, p={self.p_signal}+{self.p_noise}")
        if not self.bound > 0:
            raise ValueError("bound must be positive")

    @property
    def p(self) -> int:
        return self.p_signal + self.p_noise

    @property
    def design_bound(self) -> float:
        return 1.0 if self.covariate_law is CovariateLaw.UNIFORM01 else self.bound


class ErrorKind(str, enum.Enum):
    IID = "iid"
    AR1 = "ar1"
    MA = "ma"


@dataclass(frozen=True)
class ErrorProcessSpec:
    """Stationary zero-mean error process with normal innovations.

    ``ma``: ``e_i + sum_k c_k e_{i-k}``, which is ``len(c)``-dependent.
    ``ar1``: ``phi e_{i-1} + e_i``, started from its stationary law.
    """

    kind: ErrorKind = ErrorKind.IID
    ar_coeff: float = 0.0
    ma_coeffs: tuple[float, ...] = ()
    innovation_sd: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", ErrorKind(self.kind))
        object.__setattr__(self, "ma_coeffs", tuple(float(c) for c in self.ma_coeffs))
        if self.kind is ErrorKind.AR1 and not abs(self.ar_coeff) < 1:
            raise ValueError("ar1 needs |ar_coeff| < 1 for stationarity")
        if not self.innovation_sd > 0:
            raise ValueError("innovation_sd must be positive")

    @property
    def dependence_order(self) -> int | None:
        """``m`` for m-dependent processes, ``None`` for AR(1)."""
        if self.kind is ErrorKind.IID:
            return 0
        if self.kind is ErrorKind.MA:
            return len(self.ma_coeffs)
        return None

    @property
    def stationary_variance(self) -> float:
        s2 = self.innovation_sd**2
        if self.kind is ErrorKind.AR1:
            return s2 / (1.0 - self.ar_coeff**2)
        if self.kind is ErrorKind.MA:
            return s2 * (1.0 + sum(c * c for c in self.ma_coeffs))
        return s2

    def autocorrelation(self, lag: int) -> float:
        """Theoretical autocorrelation at ``lag``."""
        lag = abs(int(lag))
        if lag == 0:
            return 1.0
        if self.kind is ErrorKind.AR1:
            return self.ar_coeff**lag
        if self.kind is ErrorKind.MA:
            c = (1.0,) + self.ma_coeffs
            if lag >= len(c):
                return 0.0
            return sum(c[k] * c[k + lag] for k in range(len(c) - lag)) / sum(v * v for v in c)
        return 0.0


def gen_design(spec: DesignSpec) -> np.ndarray:
    """``n x p`` design drawn from ``spec.seed``."""
    gen = spec.seed.generator()
    shape = (spec.n, spec.p)
    if spec.covariate_law is CovariateLaw.UNIFORM01:
        return sample(gen, "uniform", shape, low=0.0, high=1.0)
    return sample(gen, "uniform", shape, low=-spec.bound, high=spec.bound)


def gen_glm_responses(X, fam: FamilyModel, beta0, stream: RngStream) -> np.ndarray:
    """Independent responses with ``E y_i = b'(u(x_i' beta0))``.

    Negative-binomial responses come from a Poisson-Gamma mixture with Gamma
    shape ``theta`` and mean ``mu``.
    """
    X = np.asarray(X, dtype=float)
    beta0 = np.asarray(beta0, dtype=float)
    if X.shape[1] != beta0.size:
        raise ValueError("beta0 length must match design columns")
    return fam.sample(X @ beta0, stream.generator())


def gen_errors(n: int, err: ErrorProcessSpec, stream: RngStream) -> np.ndarray:
    """``n`` consecutive values of the stationary error process."""
    gen = stream.generator()
    sd = err.innovation_sd
    if err.kind is ErrorKind.IID:
        return sample(gen, "normal", n, mean=0.0, sd=sd)
    if err.kind is ErrorKind.MA:
        q = len(err.ma_coeffs)
        # q pre-sample innovations make the process stationary from i = 1
        e = sample(gen, "normal", n + q, mean=0.0, sd=sd)
        eps = e[q:].copy()
        for k, c in enumerate(err.ma_coeffs, start=1):
            eps += c * e[q - k : q - k + n]
        return eps
    phi = err.ar_coeff
    e = sample(gen, "normal", n, mean=0.0, sd=sd)
    eps0 = sample(gen, "normal", None, mean=0.0, sd=sd / np.sqrt(1.0 - phi * phi))
    rest, _ = lfilter([1.0], [1.0, -phi], e[1:], zi=[phi * eps0])
    return np.concatenate(([eps0], rest))


def gen_dependent_lm(X, beta0, err: ErrorProcessSpec, stream: RngStream) -> np.ndarray:
    """``y_i = x_i' beta0 + eps_i`` with a weakly dependent error sequence."""
    X = np.asarray(X, dtype=float)
    beta0 = np.asarray(beta0, dtype=float)
    if X.shape[1] != beta0.size:
        raise ValueError("beta0 length must match design columns")
    return X @ beta0 + gen_errors(X.shape[0], err, stream)


def gen_dependent_glm(X, fam: FamilyModel, beta0, err: ErrorProcessSpec, stream: RngStream) -> np.ndarray:
    """``y_i = b'(u(x_i' beta0)) + eps_i``; additive errors, Gaussian family only."""
    if fam.kind is not FamilyKind.GAUSSIAN:
        raise ValueError(f"dependent responses are only generated for the gaussian family, not {fam}")
    X = np.asarray(X, dtype=float)
    mu = np.asarray(fam.mean(X @ np.asarray(beta0, dtype=float)))
    return mu + gen_errors(X.shape[0], err, stream)
