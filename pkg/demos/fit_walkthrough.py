"""Fitting GLMs with non-canonical links.

Probit and negative-binomial regressions do not use their canonical links,
so the score carries a u'(eta) factor and the observed Hessian differs from
the Fisher information. Fisher scoring only needs the latter.

Run:  python demos/fit_walkthrough.py
"""
import numpy as np

from glmsel import Dataset, FamilyModel, fit, fisher_info, observed_hessian, score

rng = np.random.default_rng(2024)
n = 400
X = rng.uniform(-np.sqrt(3), np.sqrt(3), size=(n, 3))
beta0 = np.array([0.5, -0.25, 0.0])

# probit: y ~ Bernoulli(Phi(x'beta0))
probit = FamilyModel("probit")
y = probit.sample(X @ beta0, rng)
f = fit(Dataset(X, y), probit)
print("probit beta_hat   ", np.round(f.beta_hat, 4), " iterations", f.iterations)

# standard errors from the inverse Fisher information
se = np.sqrt(np.diag(np.linalg.inv(f.fisher)))
print("           std.err", np.round(se, 4))

# the observed Hessian at the MLE is close to, but not equal to, -I
ds = Dataset(X, y)
H = observed_hessian(ds, probit, f.beta_hat)
print("max |H + I| / max |I| =", float(np.abs(H + fisher_info(ds, probit, f.beta_hat)).max() / np.abs(f.fisher).max()))

# negative binomial with known theta = 10: Var y = mu + mu^2 / 10
nb = FamilyModel("negbin", 10.0)
y_nb = nb.sample(X @ beta0, rng)
f_nb = fit(Dataset(X, y_nb), nb)
print("negbin beta_hat   ", np.round(f_nb.beta_hat, 4), " score sup-norm", f"{f_nb.score_norm:.1e}")

# weights scale every term of the log-likelihood: w = 2 duplicates each row
w = np.full(n, 2.0)
twice = fit(Dataset(np.vstack([X, X]), np.concatenate([y_nb, y_nb])), nb)
weighted = fit(Dataset(X, y_nb, w), nb)
print("duplicated rows vs w=2:", np.allclose(twice.beta_hat, weighted.beta_hat, atol=1e-10))

# at the MLE the score vanishes
print("score at MLE", score(Dataset(X, y_nb), nb, f_nb.beta_hat))
