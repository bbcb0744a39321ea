"""Seeded generation of observation matrices and population covariances.

Every sampler is a pure function of (model, n, seed): the same inputs give a
bit-identical matrix, and distinct seeds give independent streams, which is
what makes the Monte-Carlo harness order-independent under parallelism.

Multivariate t samples are built from the chi-square mixture: each column is
sqrt(nu/U_k) times a Gaussian with scale matrix (nu-2)/nu * Sigma, so the
population covariance is exactly Sigma for any nu > 2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import (
    Gaussian,
    MixedStudent,
    ObservationMatrix,
    PopulationModel,
    Student,
    SymmetricMatrix,
    frob_norm_sq,
)

_EIG_CLIP_RTOL = 1e-10

GAUSSIAN_EIGHTH_MOMENT = 105.0


@dataclass(frozen=True)
class SamplerConfig:
    """One reproducible draw: population, sample count and stream seed."""

    model: PopulationModel
    n: int
    seed: int


def psd_sqrt(sigma: SymmetricMatrix) -> np.ndarray:
    """Symmetric square root via eigendecomposition.

    Eigenvalues below 1e-10 * lambda_max are clamped to zero, so genuinely
    semidefinite matrices (where Cholesky fails) are handled.
    """
    w, v = np.linalg.eigh(sigma.data)
    clip = _EIG_CLIP_RTOL * max(float(w[-1]), 0.0)
    w = np.where(w > clip, w, 0.0)
    return (v * np.sqrt(w)) @ v.T


def sample_gaussian(model: PopulationModel, n: int, seed: int) -> ObservationMatrix:
    """n iid Gaussian columns with covariance model.sigma and mean model.mean."""
    if not isinstance(model.distribution, Gaussian):
        raise ValueError("model is not Gaussian")
    rng = np.random.default_rng(seed)
    root = psd_sqrt(model.sigma)
    z = rng.standard_normal((model.p, n))
    return ObservationMatrix(model.mean[:, None] + root @ z)


def _student_block(
    sigma_root: np.ndarray, nu: float, n: int, rng: np.random.Generator
) -> np.ndarray:
    """Columns of sqrt(nu/U_k) * N(0, (nu-2)/nu * Sigma), which have covariance Sigma."""
    u = rng.chisquare(nu, n)
    z = rng.standard_normal((sigma_root.shape[0], n))
    scale = np.sqrt((nu - 2.0) / nu)
    return (scale * (sigma_root @ z)) * np.sqrt(nu / u)[None, :]


def sample_student(model: PopulationModel, n: int, seed: int) -> ObservationMatrix:
    """n iid multivariate-t columns with covariance model.sigma (nu > 2)."""
    if not isinstance(model.distribution, Student):
        raise ValueError("model is not Student")
    nu = model.distribution.nu
    if not nu > 2:
        raise ValueError("student sampling needs nu > 2 for a finite covariance")
    rng = np.random.default_rng(seed)
    root = psd_sqrt(model.sigma)
    return ObservationMatrix(model.mean[:, None] + _student_block(root, nu, n, rng))


def sample_mixed_student(
    sigma: SymmetricMatrix, nu_first: float, nu_second: float, n: int, seed: int
) -> ObservationMatrix:
    """Stack two independent t blocks: nu_first on the leading ceil(p/2) rows.

    Sigma must be block-diagonal with respect to that split; each block is
    used as the covariance of its own t vector.  Cross-block correlation
    between independent t populations is not defined, so off-block mass is
    rejected.
    """
    p = sigma.p
    if p < 2:
        raise ValueError("mixed-student needs p >= 2")
    if not (nu_first > 2 and nu_second > 2):
        raise ValueError("mixed-student sampling needs nu > 2 on both blocks")
    half = (p + 1) // 2
    off = sigma.data[:half, half:]
    scale = max(float(np.max(np.abs(sigma.data))), 1.0)
    if off.size and float(np.max(np.abs(off))) > 1e-12 * scale:
        raise ValueError("mixed-student requires Sigma block-diagonal at the half split")
    rng = np.random.default_rng(seed)
    top = _student_block(psd_sqrt(SymmetricMatrix(sigma.data[:half, :half])), nu_first, n, rng)
    bottom = _student_block(
        psd_sqrt(SymmetricMatrix(sigma.data[half:, half:])), nu_second, n, rng
    )
    return ObservationMatrix(np.vstack([top, bottom]))


def sample(model: PopulationModel, n: int, seed: int) -> ObservationMatrix:
    """Dispatch on the model's distribution family."""
    d = model.distribution
    if isinstance(d, Gaussian):
        return sample_gaussian(model, n, seed)
    if isinstance(d, Student):
        return sample_student(model, n, seed)
    x = sample_mixed_student(model.sigma, d.nu_first, d.nu_second, n, seed)
    if np.any(model.mean):
        x = ObservationMatrix(x.data + model.mean[:, None])
    return x


def draw(config: SamplerConfig) -> ObservationMatrix:
    return sample(config.model, config.n, config.seed)


def random_wishart_sigma(p: int, seed: int) -> SymmetricMatrix:
    """Wishart(I_p, p dof) draw normalized so that ||Sigma Sigma^T|| = 1 exactly.

    The normalization pins the eighth-moment bound of the population at a
    constant across dimensions, which is the only property downstream
    experiments rely on.
    """
    if p < 1:
        raise ValueError("dimension p must be >= 1")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((p, p))
    w = g @ g.T
    return SymmetricMatrix(w / np.sqrt(np.sqrt(frob_norm_sq(w @ w))))


def eighth_moment_constant(model: PopulationModel) -> float:
    """Average eighth moment of the decorrelated coordinates, in closed form.

    Gaussian: 105 ||Sigma Sigma^T||^2.  Student (nu > 8): the chi-square
    mixture multiplies the Gaussian value by (nu-2)^3/((nu-4)(nu-6)(nu-8)),
    from E[U^-4] = 1/((nu-2)(nu-4)(nu-6)(nu-8)) and the (nu-2)/nu scale.
    """
    d = model.distribution
    norm4 = frob_norm_sq(SymmetricMatrix(model.sigma.data @ model.sigma.data))
    if isinstance(d, Gaussian):
        return GAUSSIAN_EIGHTH_MOMENT * norm4
    if isinstance(d, Student):
        nu = d.nu
        if not nu > 8:
            raise ValueError("Assumption 2 violated: eighth moment needs nu > 8")
        factor = (nu - 2.0) ** 3 / ((nu - 4.0) * (nu - 6.0) * (nu - 8.0))
        return GAUSSIAN_EIGHTH_MOMENT * factor * norm4
    raise ValueError("eighth moment constant is defined for gaussian and student only")
