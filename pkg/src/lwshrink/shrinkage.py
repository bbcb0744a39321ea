"""Linear shrinkage of the sample covariance toward a scaled identity.

Everything here is translation-invariant: the data are demeaned once and the
estimators never touch the mean again, so adding a constant vector to every
sample leaves all outputs unchanged.

Four variants are provided, differing only in how they estimate the squared
error beta^2 = E||S - Sigma||^2 of the sample covariance:

* ``u`` - the unbiased construction: a coefficient-corrected combination of
  the per-sample dispersion statistic, d^2 and m^2.  Requires n >= 4.
* ``r`` - the form recommended in the Ledoit-Wolf review literature, using
  the 1/(n-1)^2 per-sample dispersion directly.
* ``m`` - the uncorrected per-sample dispersion statistic itself.
* ``s`` - the scikit-learn 1.2.2 convention: identical intensity to ``m``
  but with the whole estimate rescaled by (n-1)/n.

The shrunk estimate is (b2/d2) * m_v * I + (a2/d2) * S, a convex-type
combination of the scaled identity and the sample covariance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import (
    ObservationMatrix,
    SymmetricMatrix,
    demean,
    frob_norm_sq,
    sample_covariance_from_demeaned,
)

VARIANTS = ("u", "r", "m", "s")

MIN_SAMPLES = {"u": 4, "r": 2, "m": 2, "s": 2}

# Cap on the temporary stack of per-sample outer products, in floats.
_STACK_BUDGET = 4_000_000


@dataclass(frozen=True)
class CoefficientSet:
    """The deterministic (p, n)-dependent constants of the variant-u estimator.

    All eleven values are rational functions of p and n, evaluated directly
    in double precision.  `c0f` is the divisor of the unbiased beta^2
    estimator and is nonzero for every n >= 4 (it does not depend on p).
    """

    p: int
    n: int
    gamma_n: float
    lambda_n: float
    c0: float
    c1: float
    c2: float
    q0: float
    q1: float
    q2: float
    c0f: float
    c1f: float
    c2f: float


def coefficient_set(p: int, n: int) -> CoefficientSet:
    """Evaluate the coefficient ledger at (p, n).

    Requires n >= 4: below that the q-system degenerates (n - 2 factors
    vanish) and the unbiased variant is undefined.
    """
    if n < 4:
        raise ValueError("variant u undefined for n < 4")
    if p < 1:
        raise ValueError("dimension p must be >= 1")
    den = n * n - 3 * n + 3
    gamma = n * (n - 1) / den
    lam = n * n * (n - 2) / ((n - 1) * den)
    c1 = lam / (gamma * n * n)
    c0 = 1.0 / gamma - 1.0 / n - c1
    c2 = (p + 1) * c1
    q0 = (n - 2) / (p * (n - 1))
    q1 = 1.0 / (p * (n - 1))
    q2 = (p - 1) / (p * (n - 1))
    # 1 - q1 - q2 = (n - 2)/(n - 1), strictly positive for n >= 3
    rest = 1.0 - q1 - q2
    c0f = c0 + (c1 - c2) * q0 / rest
    c1f = c1 + (c1 - c2) * q1 / rest
    c2f = c2 - (c1 - c2) * q2 / rest
    return CoefficientSet(p, n, gamma, lam, c0, c1, c2, q0, q1, q2, c0f, c1f, c2f)


def scalar_m(s: SymmetricMatrix) -> float:
    """Mean diagonal value tr(S)/p, the inner product of S with the identity."""
    return float(np.trace(s.data)) / s.p


def scalar_d2(s: SymmetricMatrix, m: float) -> float:
    """Squared distance ||S - m I||^2 of S from the identity line.

    Computed from the definition rather than the Pythagoras identity
    ||S||^2 - m^2: the difference form has no cancellation when S is close
    to a multiple of the identity.  Clamped at zero against rounding.
    """
    diff = s.data.copy()
    diff[np.diag_indices_from(diff)] -= m
    return max(frob_norm_sq(diff), 0.0)


def _dispersion_sum(x: np.ndarray, s: np.ndarray, scale: float) -> float:
    """sum_k || scale * x_k x_k^T - S ||^2 over columns x_k (normalized norm).

    Evaluates the definitional column sum in fixed-size blocks so memory
    stays bounded and the summation order stays deterministic.
    """
    p, n = x.shape
    step = max(1, _STACK_BUDGET // (p * p))
    total = 0.0
    for start in range(0, n, step):
        cols = x[:, start : start + step]
        outers = np.einsum("ik,jk->kij", cols, cols)
        outers *= scale
        outers -= s
        total += float(np.sum(outers * outers))
    return total / p


def scalar_bbar2(xt: ObservationMatrix, s: SymmetricMatrix) -> float:
    """Per-sample dispersion (1/n^2) sum_k ||(n/(n-1)) x_k x_k^T - S||^2.

    `xt` must already be demeaned and `s` the sample covariance of the same
    data.  This is the column-sum definition, not a rearranged form.
    """
    n = xt.n
    return _dispersion_sum(xt.data, s.data, n / (n - 1)) / (n * n)


def scalar_bbar2_r(xt: ObservationMatrix, s: SymmetricMatrix) -> float:
    """Per-sample dispersion (1/(n-1)^2) sum_k ||x_k x_k^T - S||^2 (variant r)."""
    n = xt.n
    return _dispersion_sum(xt.data, s.data, 1.0) / ((n - 1) * (n - 1))


def scalar_b2_variant_u(
    bbar2: float, d2: float, m: float, coeffs: CoefficientSet
) -> tuple[float, float]:
    """Unbiased beta^2 estimate and its clamp into [0, d2].

    Returns ``(b2_raw, b2)``.  The raw value is the unbiased estimator and
    may be negative; the clamped value is what the shrinkage uses.
    """
    b2_raw = (bbar2 - coeffs.c1f * d2 - coeffs.c2f * m * m) / coeffs.c0f
    return b2_raw, min(max(b2_raw, 0.0), d2)


@dataclass(frozen=True)
class ShrinkageScalars:
    """Data-driven scalars behind one variant's shrinkage decision.

    `m` and `a2` are the variant's own values (variant s rescales both);
    `bbar2` is the variant's pre-threshold dispersion statistic, `b2_raw`
    the pre-clamp beta^2 estimate (negative values possible for variant u)
    and `b2` its clamp into [0, d2].
    """

    variant: str
    m: float
    d2: float
    bbar2: float
    b2_raw: float
    b2: float
    a2: float


@dataclass(frozen=True)
class ShrinkageResult:
    scalars: ShrinkageScalars
    estimate: SymmetricMatrix
    shrinkage_intensity: float


def estimate(x: ObservationMatrix, variant: str) -> ShrinkageResult:
    """Shrink the sample covariance of `x` toward the scaled identity.

    Parameters
    ----------
    x : ObservationMatrix
        p x n data block, columns are samples.  The mean is unknown and
        estimated internally; the result is invariant under adding any
        constant vector to all samples.
    variant : {"u", "r", "m", "s"}
        Which beta^2 estimator drives the intensity (see module docstring).

    Returns
    -------
    ShrinkageResult
        Scalars, the shrunk symmetric estimate and the intensity b2/d2.

    When d2 = 0 the sample covariance is already a multiple of the identity
    and every ratio is 0/0; the estimate degenerates to m_v * I with the
    intensity reported as 1 (target and sample coincide).
    """
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}, expected one of {VARIANTS}")
    n = x.n
    if n < MIN_SAMPLES[variant]:
        raise ValueError(f"variant {variant} requires n >= {MIN_SAMPLES[variant]}")

    xt = demean(x)
    s = sample_covariance_from_demeaned(xt)
    m = scalar_m(s)
    d2 = scalar_d2(s, m)

    if variant == "r":
        bbar2 = scalar_bbar2_r(xt, s)
        b2_raw = bbar2
    else:
        bbar2 = scalar_bbar2(xt, s)
        if variant == "u":
            b2_raw, _ = scalar_b2_variant_u(bbar2, d2, m, coefficient_set(x.p, n))
        else:
            b2_raw = bbar2
    b2 = min(max(b2_raw, 0.0), d2)

    shrink = (n - 1) / n if variant == "s" else 1.0
    m_v = shrink * m
    a2 = shrink * (d2 - b2)

    eye = np.eye(x.p)
    if d2 == 0.0:
        matrix = SymmetricMatrix(m_v * eye)
        intensity = 1.0
    else:
        intensity = b2 / d2
        matrix = SymmetricMatrix(intensity * m_v * eye + (a2 / d2) * s.data)

    scalars = ShrinkageScalars(variant, m_v, d2, bbar2, b2_raw, b2, a2)
    return ShrinkageResult(scalars, matrix, intensity)
