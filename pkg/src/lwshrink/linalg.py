"""Dimension-normalized Frobenius geometry, demeaning and the sample covariance.

All matrix norms in this package divide the usual Frobenius inner product by
the dimension p, so that the identity has norm 1 at every dimension.  That
convention is what makes losses comparable across a (p, n) grid.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

SYMMETRY_ATOL = 1e-10
PSD_RTOL = 1e-8


def _as_matrix(data) -> np.ndarray:
    a = np.asarray(data, dtype=float)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix entries must be finite")
    return a


def _mat(a) -> np.ndarray:
    """Accept SymmetricMatrix or a raw square array."""
    return a.data if isinstance(a, SymmetricMatrix) else _as_matrix(a)


@dataclass(frozen=True)
class SymmetricMatrix:
    """Dense symmetric p x p matrix in 64-bit floats.

    Construction symmetrizes through (A + A.T)/2.  Asymmetry beyond an
    absolute 1e-10 gate is rejected instead of silently averaged; the gate
    exists only to absorb rounding in floating-point products like X X^T.
    """

    data: np.ndarray

    def __post_init__(self):
        a = _as_matrix(self.data)
        if a.shape[0] != a.shape[1]:
            raise ValueError(f"matrix must be square, got shape {a.shape}")
        if a.shape[0] < 1:
            raise ValueError("dimension p must be >= 1")
        if a.size and float(np.max(np.abs(a - a.T))) > SYMMETRY_ATOL:
            raise ValueError("matrix is asymmetric beyond tolerance 1e-10")
        sym = (a + a.T) / 2.0
        sym.flags.writeable = False
        object.__setattr__(self, "data", sym)

    @property
    def p(self) -> int:
        return self.data.shape[0]

    def min_max_eigenvalues(self) -> tuple[float, float]:
        w = np.linalg.eigvalsh(self.data)
        return float(w[0]), float(w[-1])


def identity(p: int) -> SymmetricMatrix:
    return SymmetricMatrix(np.eye(p))


@dataclass(frozen=True)
class ObservationMatrix:
    """A p x n block of n samples in dimension p (columns are samples)."""

    data: np.ndarray

    def __post_init__(self):
        a = _as_matrix(self.data)
        if a.shape[0] < 1:
            raise ValueError("dimension p must be >= 1")
        if a.shape[1] < 2:
            raise ValueError("need at least n = 2 samples")
        a = a.copy()
        a.flags.writeable = False
        object.__setattr__(self, "data", a)

    @property
    def p(self) -> int:
        return self.data.shape[0]

    @property
    def n(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class Gaussian:
    """Multivariate normal population."""

    @property
    def label(self) -> str:
        return "gaussian"


@dataclass(frozen=True)
class Student:
    """Multivariate t population with nu degrees of freedom (nu > 2)."""

    nu: float

    def __post_init__(self):
        if not self.nu > 2:
            raise ValueError("student nu must exceed 2 for a finite covariance")

    @property
    def label(self) -> str:
        return f"student({self.nu:g})"


@dataclass(frozen=True)
class MixedStudent:
    """Two independent t blocks: nu_first on the leading ceil(p/2) coordinates."""

    nu_first: float
    nu_second: float

    def __post_init__(self):
        if not (self.nu_first > 2 and self.nu_second > 2):
            raise ValueError("mixed-student nu must exceed 2 on both blocks")

    @property
    def label(self) -> str:
        # no comma: the label is a field of comma-separated output files
        return f"mixed_student({self.nu_first:g};{self.nu_second:g})"


Distribution = Gaussian | Student | MixedStudent


@dataclass(frozen=True)
class PopulationModel:
    """A population: true covariance, distribution family and mean vector.

    The mean defaults to zero; a nonzero mean exists to exercise the
    translation invariance of the estimators, which never see it.

    Student populations require nu > 4 here because the analytic oracle
    scalars divide by nu - 4.  Populations with 4 < nu <= 8 are accepted
    but flagged via `meets_moment_assumption` (the convergence theory needs
    an eighth moment, i.e. nu > 8).
    """

    sigma: SymmetricMatrix
    distribution: Distribution = field(default_factory=Gaussian)
    mean: np.ndarray | None = None

    def __post_init__(self):
        lo, hi = self.sigma.min_max_eigenvalues()
        if lo < -PSD_RTOL * max(hi, 0.0):
            raise ValueError("sigma must be positive semidefinite")
        if isinstance(self.distribution, Student) and not self.distribution.nu > 4:
            raise ValueError("student population needs nu > 4 for finite oracle scalars")
        mean = np.zeros(self.sigma.p) if self.mean is None else np.asarray(self.mean, dtype=float)
        if mean.shape != (self.sigma.p,):
            raise ValueError(f"mean must have length p = {self.sigma.p}")
        if not np.all(np.isfinite(mean)):
            raise ValueError("mean entries must be finite")
        mean = mean.copy()
        mean.flags.writeable = False
        object.__setattr__(self, "mean", mean)

    @property
    def p(self) -> int:
        return self.sigma.p

    @property
    def meets_moment_assumption(self) -> bool:
        d = self.distribution
        if isinstance(d, Gaussian):
            return True
        if isinstance(d, Student):
            return d.nu > 8
        return min(d.nu_first, d.nu_second) > 8


def frob_norm_sq(a) -> float:
    """Squared dimension-normalized Frobenius norm, tr(A A^T) / p."""
    m = _mat(a)
    return float(np.sum(m * m)) / m.shape[0]


def inner(a, b) -> float:
    """Dimension-normalized inner product tr(A B^T) / p."""
    ma, mb = _mat(a), _mat(b)
    if ma.shape != mb.shape:
        raise ValueError(f"dimension mismatch: {ma.shape} vs {mb.shape}")
    return float(np.sum(ma * mb)) / ma.shape[0]


def demean(x: ObservationMatrix) -> ObservationMatrix:
    """Remove the per-row arithmetic mean from every sample."""
    return ObservationMatrix(x.data - x.data.mean(axis=1, keepdims=True))


def sample_covariance(x: ObservationMatrix) -> SymmetricMatrix:
    """Empirical covariance of demeaned samples with the n - 1 divisor."""
    xt = demean(x)
    return sample_covariance_from_demeaned(xt)


def sample_covariance_from_demeaned(xt: ObservationMatrix) -> SymmetricMatrix:
    return SymmetricMatrix(xt.data @ xt.data.T / (xt.n - 1))
