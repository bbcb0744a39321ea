"""Population scalars and the two oracle covariance combinations.

The scalars (mu, alpha2, beta2, delta2) characterize the best linear
combination of the identity and the sample covariance:

* ``sigma_star`` uses non-random coefficients beta2/delta2 and alpha2/delta2
  and is optimal in expectation among fixed-coefficient combinations, with
  expected loss alpha2 * beta2 / delta2.
* ``sigma_starstar`` re-optimizes the coefficients per sample and is the
  in-span loss minimizer for the realized S; no estimator built from I and S
  can beat it on any draw.

Closed forms for beta2 are available for Gaussian populations and for
multivariate t populations with nu > 4.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import (
    PopulationModel,
    SymmetricMatrix,
    frob_norm_sq,
    inner,
)
from .shrinkage import scalar_d2, scalar_m


@dataclass(frozen=True)
class OracleScalars:
    """Population quantities for a known (Sigma, distribution, n).

    `theta2` is the variance of the mean square of one decorrelated
    observation; it has a closed form only for Gaussians and is None
    otherwise.
    """

    mu: float
    alpha2: float
    beta2: float
    delta2: float
    theta2: float | None = None


@dataclass(frozen=True)
class OptimalProjection:
    """Per-sample projection of Sigma onto span{I, S}.

    `alpha_tilde2` is the random inner-product coefficient <S, Sigma> - m mu
    scaling the S - m I direction.
    """

    alpha_tilde2: float
    sigma_starstar: SymmetricMatrix


def population_mu_alpha2(sigma: SymmetricMatrix) -> tuple[float, float]:
    """Mean eigenvalue mu = tr(Sigma)/p and dispersion alpha2 = ||Sigma||^2 - mu^2."""
    mu = float(np.trace(sigma.data)) / sigma.p
    return mu, max(frob_norm_sq(sigma) - mu * mu, 0.0)


def gaussian_beta2(sigma: SymmetricMatrix, n: int) -> OracleScalars:
    """Analytic scalars for n iid Gaussian samples with covariance Sigma.

    beta2 = ((p+1) mu^2 + alpha2) / (n-1), and theta2 has the Gaussian
    closed form (2/p) ||Sigma||^2: the decorrelated coordinates y_i are
    independent with V[y_i^2] = 2 lambda_i^2, so the variance of their mean
    square is (2/p^2) sum lambda_i^2.
    """
    if n < 2:
        raise ValueError("need n >= 2 samples")
    p = sigma.p
    mu, alpha2 = population_mu_alpha2(sigma)
    beta2 = (p + 1) / (n - 1) * mu * mu + alpha2 / (n - 1)
    theta2 = 2.0 / p * frob_norm_sq(sigma)
    return OracleScalars(mu, alpha2, beta2, alpha2 + beta2, theta2)


def student_beta2(sigma: SymmetricMatrix, n: int, nu: float) -> OracleScalars:
    """Analytic scalars for n iid multivariate-t samples with covariance Sigma.

    The population has scale matrix (nu-2)/nu * Sigma so its covariance is
    exactly Sigma.  Two algebraically equivalent closed forms for beta2
    exist; both are evaluated and must agree to 1e-12 relative, guarding
    against transcription slips in either.  No theta2 closed form is known
    here, so it is left unset.
    """
    if not nu > 4:
        raise ValueError("infinite fourth moment regime: student beta2 needs nu > 4")
    if n < 2:
        raise ValueError("need n >= 2 samples")
    p = sigma.p
    mu, alpha2 = population_mu_alpha2(sigma)
    mu2 = mu * mu
    stated = (1.0 / n) * (nu / (nu - 4) + 1.0 / (n - 1)) * (alpha2 + (p + 1) * mu2) - (
        2.0 * p / (n * (nu - 4))
    ) * mu2
    derived = ((nu - 2) / ((nu - 4) * n) + 1.0 / (n * (n - 1))) * p * mu2 + (1.0 / n) * (
        nu / (nu - 4) + 1.0 / (n - 1)
    ) * (alpha2 + mu2)
    if abs(stated - derived) > 1e-12 * max(abs(stated), abs(derived), 1e-300):
        raise ArithmeticError(
            f"student beta2 forms disagree: {stated!r} vs {derived!r}"
        )
    return OracleScalars(mu, alpha2, stated, alpha2 + stated, None)


def analytic_scalars(model: PopulationModel, n: int) -> OracleScalars:
    """Closed-form scalars for the model, if the family has them."""
    from .linalg import Gaussian, Student

    if isinstance(model.distribution, Gaussian):
        return gaussian_beta2(model.sigma, n)
    if isinstance(model.distribution, Student):
        return student_beta2(model.sigma, n, model.distribution.nu)
    raise ValueError(f"no analytic scalars for {model.distribution.label}")


def oracle_sigma_star(scalars: OracleScalars, s: SymmetricMatrix) -> SymmetricMatrix:
    """Fixed-coefficient oracle (beta2/delta2) mu I + (alpha2/delta2) S."""
    if scalars.delta2 <= 0.0:
        raise ValueError("delta2 must be positive to form the oracle combination")
    w = scalars.beta2 / scalars.delta2
    return SymmetricMatrix(
        w * scalars.mu * np.eye(s.p) + (scalars.alpha2 / scalars.delta2) * s.data
    )


def optimal_sigma_starstar(sigma: SymmetricMatrix, s: SymmetricMatrix) -> OptimalProjection:
    """Per-sample in-span minimizer mu I + (alpha~2 / d2)(S - m I).

    Solves min ||rho1 I + rho2 S - Sigma||^2 over real (rho1, rho2) for the
    realized S.  When d2 = 0 the span collapses to the identity line and the
    projection is mu I.
    """
    if sigma.p != s.p:
        raise ValueError(f"dimension mismatch: {sigma.p} vs {s.p}")
    mu, _ = population_mu_alpha2(sigma)
    m = scalar_m(s)
    d2 = scalar_d2(s, m)
    eye = np.eye(s.p)
    if d2 == 0.0:
        return OptimalProjection(0.0, SymmetricMatrix(mu * eye))
    alpha_t2 = inner(s, sigma) - m * mu
    matrix = mu * eye + (alpha_t2 / d2) * (s.data - m * eye)
    return OptimalProjection(alpha_t2, SymmetricMatrix(matrix))


def loss(a, sigma) -> float:
    """Single-sample squared error ||A - Sigma||^2 in the normalized norm."""
    ma = a.data if isinstance(a, SymmetricMatrix) else np.asarray(a, dtype=float)
    ms = sigma.data if isinstance(sigma, SymmetricMatrix) else np.asarray(sigma, dtype=float)
    if ma.shape != ms.shape:
        raise ValueError(f"dimension mismatch: {ma.shape} vs {ms.shape}")
    return frob_norm_sq(ma - ms)


def expected_sample_loss(scalars: OracleScalars, p: int, n: int) -> float:
    """Large-n approximation (p/n)(mu^2 + theta2) of E||S - Sigma||^2.

    At p comparable to n this stays of order mu^2, which is why the raw
    sample covariance cannot converge in that regime.
    """
    if scalars.theta2 is None:
        raise ValueError("theta2 is not available for these scalars")
    return p / n * (scalars.mu**2 + scalars.theta2)


def theta2_monte_carlo(model: PopulationModel, n_draws: int, seed: int) -> float:
    """Monte-Carlo estimate of theta2 = V[mean of squared decorrelated coords].

    Cross-check oracle for the Gaussian closed form and the only route to
    theta2 for heavy-tailed populations.
    """
    from .sampling import sample

    gamma = np.linalg.eigh(model.sigma.data)[1]
    x = sample(model, n_draws, seed).data
    y = gamma.T @ (x - model.mean[:, None])
    v = np.mean(y * y, axis=0)
    return float(np.var(v, ddof=1))
