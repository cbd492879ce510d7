import numpy as np
import pytest
from scipy.stats import norm

from glmsel.family import FamilyKind, FamilyModel, SupportError, make_family

ALL = [
    FamilyModel("gaussian"),
    FamilyModel("logit"),
    FamilyModel("probit"),
    FamilyModel("poisson"),
    FamilyModel("negbin", 10.0),
]
GRID = np.linspace(-10, 10, 81)
H = 1e-5


def ids(f):
    return str(f)


def sample_y(fam, eta):
    """A response in the support of ``fam`` for each eta."""
    if fam.is_bernoulli:
        return (np.arange(eta.size) % 2).astype(float)
    if fam.kind in (FamilyKind.POISSON, FamilyKind.NEGBIN):
        return (np.arange(eta.size) % 5).astype(float)
    return np.sin(np.arange(eta.size))


class TestExamples:
    def test_probit_loglik_at_zero(self):
        assert FamilyModel("probit").loglik_contrib(1, 0.0) == pytest.approx(np.log(0.5), abs=1e-15)

    def test_negbin_loglik(self):
        # 40-digit mpmath: 10 log 10 - 10 log 11
        assert FamilyModel("negbin", 10).loglik_contrib(0, 0.0) == pytest.approx(-0.9531017980432486, abs=1e-14)

    def test_poisson_loglik(self):
        assert FamilyModel("poisson").loglik_contrib(3, 1.0) == pytest.approx(0.28171817154095476, abs=1e-14)

    @pytest.mark.parametrize(
        "fam, eta, expected",
        [(FamilyModel("logit"), 0.0, 0.5), (FamilyModel("negbin", 10), 0.0, 1.0), (FamilyModel("gaussian"), 2.5, 2.5)],
        ids=["logit", "negbin", "gaussian"],
    )
    def test_mean(self, fam, eta, expected):
        assert fam.mean(eta) == pytest.approx(expected, abs=1e-15)

    def test_variance(self):
        assert FamilyModel("logit").variance(0.0) == pytest.approx(0.25)
        assert FamilyModel("negbin", 10).variance(0.0) == pytest.approx(1.1, abs=1e-15)
        assert FamilyModel("gaussian").variance(-3.0) == 1.0

    def test_u_derivs_canonical(self):
        assert FamilyModel("poisson").u_derivs(7.0) == (7.0, 1.0, 0.0)

    def test_u_derivs_negbin(self):
        u, du, d2u = FamilyModel("negbin", 10).u_derivs(0.0)
        assert u == pytest.approx(-np.log(11), abs=1e-15)
        assert du == pytest.approx(10 / 11, abs=1e-15)
        assert d2u == pytest.approx(-10 / 121, abs=1e-15)

    def test_u_derivs_probit(self):
        u, du, d2u = FamilyModel("probit").u_derivs(0.0)
        assert u == 0.0
        assert du == pytest.approx(1.5957691216057308, abs=1e-14)
        assert d2u == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize("fam", ALL, ids=ids)
class TestDerivatives:
    def test_u_first_derivative(self, fam):
        fd = (np.asarray(fam.u_derivs(GRID + H)[0]) - fam.u_derivs(GRID - H)[0]) / (2 * H)
        np.testing.assert_allclose(fd, fam.u_derivs(GRID)[1], rtol=1e-6, atol=1e-8)

    def test_u_second_derivative(self, fam):
        fd = (np.asarray(fam.u_derivs(GRID + H)[1]) - fam.u_derivs(GRID - H)[1]) / (2 * H)
        np.testing.assert_allclose(fd, fam.u_derivs(GRID)[2], rtol=1e-6, atol=1e-8)

    def test_cumulant_chain_rule(self, fam):
        fd = (np.asarray(fam.cumulant(GRID + H)) - fam.cumulant(GRID - H)) / (2 * H)
        analytic = np.asarray(fam.mean(GRID)) * fam.u_derivs(GRID)[1]
        np.testing.assert_allclose(fd, analytic, rtol=1e-6, atol=1e-8)

    def test_score_weight_is_loglik_derivative(self, fam):
        y = sample_y(fam, GRID)
        fd = (np.asarray(fam.loglik_contrib(y, GRID + H)) - fam.loglik_contrib(y, GRID - H)) / (2 * H)
        np.testing.assert_allclose(fd, fam.score_weight(y, GRID), rtol=1e-6, atol=1e-8)
        _, du, _ = fam.u_derivs(GRID)
        np.testing.assert_allclose(fam.score_weight(y, GRID), du * (y - fam.mean(GRID)), rtol=1e-9, atol=1e-12)

    def test_fisher_weight(self, fam):
        _, du, _ = fam.u_derivs(GRID)
        np.testing.assert_allclose(fam.fisher_weight(GRID), du**2 * fam.variance(GRID), rtol=1e-10)

    def test_mean_monotone(self, fam):
        # probit mean saturates at 1 in float64 beyond eta ~ 8.3
        eta = GRID[np.abs(GRID) <= 8] if fam.kind is FamilyKind.PROBIT else GRID
        assert np.all(np.diff(fam.mean(eta)) > 0)

    def test_variance_nonnegative(self, fam):
        assert np.all(np.asarray(fam.variance(np.linspace(-40, 40, 161))) >= 0)

    def test_loglik_equals_y_u_minus_b(self, fam):
        y = sample_y(fam, GRID)
        u = fam.u_derivs(GRID)[0]
        np.testing.assert_allclose(fam.loglik_contrib(y, GRID), y * u - fam.cumulant(GRID), rtol=1e-9, atol=1e-9)

    def test_extreme_eta_finite(self, fam):
        eta = np.array([-40.0, -20.0, 20.0, 40.0])
        y = sample_y(fam, eta)
        for v in (fam.loglik_contrib(y, eta), fam.score_weight(y, eta), fam.fisher_weight(eta), *fam.u_derivs(eta)):
            assert np.all(np.isfinite(v))


class TestProbit:
    def test_symmetry(self):
        fam = FamilyModel("probit")
        for eta in np.linspace(-30, 30, 61):
            assert fam.loglik_contrib(1, eta) == fam.loglik_contrib(0, -eta)

    def test_matches_scipy_in_bulk(self):
        fam = FamilyModel("probit")
        eta = np.linspace(-5, 5, 41)
        np.testing.assert_allclose(fam.loglik_contrib(np.ones_like(eta), eta), norm.logcdf(eta), rtol=1e-12)


class TestNegbin:
    def test_variance_formula(self):
        fam = FamilyModel("negbin", 4.0)
        mu = np.exp(GRID[:60])
        np.testing.assert_allclose(fam.variance(GRID[:60]), mu + mu**2 / 4.0, rtol=1e-12)

    def test_loglik_matches_pmf_up_to_constant(self):
        from scipy.special import gammaln

        fam = FamilyModel("negbin", 10.0)
        y = np.array([0, 1, 3, 7])
        eta = np.array([-1.0, 0.2, 1.1, 2.0])
        mu = np.exp(eta)
        logpmf = gammaln(10 + y) - gammaln(10) - gammaln(y + 1) + y * np.log(mu / (10 + mu)) + 10 * np.log(10 / (10 + mu))
        const = gammaln(10 + y) - gammaln(10) - gammaln(y + 1)
        np.testing.assert_allclose(fam.loglik_contrib(y, eta), logpmf - const, rtol=1e-12)


class TestSupport:
    @pytest.mark.parametrize("tag, y", [("logit", 0.5), ("probit", 2.0), ("poisson", -1.0), ("negbin", 1.5)])
    def test_rejects(self, tag, y):
        fam = make_family(tag, theta=10.0)
        with pytest.raises(SupportError):
            fam.loglik_contrib(y, 0.0)

    def test_gaussian_accepts_reals(self):
        FamilyModel("gaussian").loglik_contrib(-3.7, 0.1)


class TestConstruction:
    def test_tags(self):
        assert make_family("probit").kind is FamilyKind.PROBIT
        assert make_family("negbin", theta=10).theta == 10.0

    def test_negbin_needs_theta(self):
        with pytest.raises(ValueError):
            make_family("negbin")

    def test_unknown_tag(self):
        with pytest.raises(ValueError):
            make_family("gamma")

    def test_bad_dispersion(self):
        with pytest.raises(ValueError):
            FamilyModel("negbin", 0.0)

    def test_canonical_flags(self):
        assert [f.canonical for f in ALL] == [True, True, False, True, False]
