"""Small dense linear algebra, stable normal tail functions and seeded streams.

Everything here works on tiny matrices (order <= 64) and is pure: no global
random state is touched anywhere in the package, every variate comes from an
:class:`RngStream`.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import log_ndtr

MAX_ORDER = 64
JITTER_START = 1e-10
JITTER_MAX = 1e-4


class SingularSystemError(np.linalg.LinAlgError):
    """Raised when a PSD system stays rank deficient after maximal jitter."""


class SymMatrix(np.ndarray):
    """Symmetric ``p x p`` float array, symmetrized on construction."""

    def __new__(cls, entries):
        a = np.array(entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {a.shape}")
        if not 1 <= a.shape[0] <= MAX_ORDER:
            raise ValueError(f"matrix order must be in [1, {MAX_ORDER}]")
        a = 0.5 * (a + a.T)
        return a.view(cls)

    @property
    def order(self) -> int:
        return self.shape[0]


def _cholesky(a):
    try:
        return np.linalg.cholesky(a)
    except np.linalg.LinAlgError:
        return None


def solve_psd(A, rhs):
    """Solve ``A x = rhs`` for a symmetric positive semidefinite ``A``.

    A Cholesky factorization is tried first. If it fails, a diagonal jitter of
    ``1e-10 * trace(A) / p`` is added and increased tenfold up to
    ``1e-4 * trace(A) / p`` before giving up with :class:`SingularSystemError`.
    """
    A = np.asarray(A, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    p = A.shape[0]
    if A.shape != (p, p) or rhs.shape[0] != p:
        raise ValueError("dimension mismatch between matrix and right-hand side")
    L = _cholesky(A)
    if L is None:
        scale = np.trace(A) / p
        if not np.isfinite(scale) or scale <= 0:
            raise SingularSystemError("matrix has non-positive trace")
        jitter = JITTER_START
        eye = np.eye(p)
        while L is None and jitter <= JITTER_MAX * (1 + 1e-9):
            L = _cholesky(A + jitter * scale * eye)
            jitter *= 10.0
        if L is None:
            raise SingularSystemError("factorization failed at maximum jitter")
    z = np.linalg.solve(L, rhs)
    return np.linalg.solve(L.T, z)


def eig_extremes(A) -> tuple[float, float]:
    """Smallest and largest eigenvalue of a symmetric matrix."""
    w = np.linalg.eigvalsh(np.asarray(A, dtype=float))
    return float(w[0]), float(w[-1])


def log_phi_cdf(x):
    """Return ``(log Phi(x), log(1 - Phi(x)))`` without forming the raw CDF.

    ``log1mPhi(x)`` is evaluated as ``logPhi(-x)``, so the two are mirror
    images of each other bit for bit. Works elementwise on arrays.
    """
    x = np.asarray(x, dtype=float)
    lp = log_ndtr(x)
    lq = log_ndtr(-x)
    if lp.ndim == 0:
        return float(lp), float(lq)
    return lp, lq


def log_phi_pdf(x):
    x = np.asarray(x, dtype=float)
    return -0.5 * x * x - 0.5 * np.log(2.0 * np.pi)


# ---------------------------------------------------------------------------
# Random streams
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RngStream:
    """Immutable descriptor of a counter-based random stream.

    The key is ``(seed, stream_id, path)``; ``counter`` indexes single draws
    made through :func:`draw`. Bulk consumers call :meth:`generator`, which
    builds a Philox generator keyed by the descriptor, so the same descriptor
    always yields the same sequence no matter which process builds it.
    """

    seed: int
    stream_id: int = 0
    path: tuple[int, ...] = field(default=())
    counter: int = 0

    def __post_init__(self):
        for v in (self.seed, self.stream_id, *self.path):
            if not 0 <= int(v) < 2**64:
                raise ValueError("seed, stream_id and path entries must be 64-bit unsigned")

    def spawn(self, i: int) -> "RngStream":
        """Child stream, independent of the parent and of siblings."""
        return RngStream(self.seed, self.stream_id, self.path + (int(i),), 0)

    def advance(self, k: int = 1) -> "RngStream":
        return RngStream(self.seed, self.stream_id, self.path, self.counter + k)

    def _seed_sequence(self, extra=()):
        return np.random.SeedSequence(int(self.seed), spawn_key=(int(self.stream_id), *self.path, *extra))

    def generator(self) -> np.random.Generator:
        ss = self._seed_sequence(extra=(2**63 + self.counter,) if self.counter else ())
        return np.random.Generator(np.random.Philox(ss))


_DISTRIBUTIONS = {
    "uniform": ("low", "high"),
    "normal": ("mean", "sd"),
    "bernoulli": ("p",),
    "poisson": ("mean",),
    "gamma": ("shape", "mean"),
}


def _check_params(name, params):
    if name not in _DISTRIBUTIONS:
        raise ValueError(f"unknown distribution {name!r}")
    missing = set(_DISTRIBUTIONS[name]) - set(params)
    if missing:
        raise ValueError(f"{name} needs parameters {sorted(missing)}")
    P = {k: np.asarray(v, dtype=float) for k, v in params.items()}
    ok = {
        "uniform": lambda: np.all(P["low"] < P["high"]),
        "normal": lambda: np.all(P["sd"] >= 0),
        "bernoulli": lambda: np.all((P["p"] >= 0) & (P["p"] <= 1)),
        "poisson": lambda: np.all(P["mean"] >= 0),
        "gamma": lambda: np.all(P["shape"] > 0) and np.all(P["mean"] > 0),
    }[name]()
    if not ok:
        raise ValueError(f"invalid parameters for {name}: {params}")


def sample(gen: np.random.Generator, name: str, size=None, **params):
    """Draw from a named distribution with an explicit generator.

    Parameters may be arrays that broadcast against ``size``. Poisson uses
    numpy's sampler, which is inversion-based below mean 10 and transformed
    rejection (PTRS) above.
    """
    _check_params(name, params)
    if name == "uniform":
        return gen.uniform(params["low"], params["high"], size)
    if name == "normal":
        return gen.normal(params["mean"], params["sd"], size)
    if name == "bernoulli":
        u = gen.random(size if size is not None else np.shape(params["p"]) or None)
        return np.asarray(u < params["p"], dtype=float)
    if name == "poisson":
        return gen.poisson(params["mean"], size).astype(float)
    shape = params["shape"]
    return gen.gamma(shape, np.asarray(params["mean"]) / shape, size)


def draw(stream: RngStream, dist: str, **params) -> tuple[float, RngStream]:
    """One variate from ``stream`` plus the advanced stream.

    >>> s = RngStream(7)
    >>> x, s2 = draw(s, "uniform", low=0.0, high=1.0)
    >>> 0.0 <= x < 1.0 and s2.counter == 1
    True
    """
    value = sample(stream.generator(), dist, None, **params)
    return float(value), stream.advance()
