import numpy as np
import pytest

from lwshrink import (
    Gaussian,
    ObservationMatrix,
    PopulationModel,
    Student,
    SymmetricMatrix,
    estimate,
    expected_sample_loss,
    frob_norm_sq,
    gaussian_beta2,
    identity,
    loss,
    optimal_sigma_starstar,
    oracle_sigma_star,
    population_mu_alpha2,
    random_wishart_sigma,
    sample_covariance,
    sample_gaussian,
    sample_student,
    student_beta2,
    theta2_monte_carlo,
)
from conftest import random_spd


def solve_normal_equations(sigma, s):
    """Brute-force 2x2 system for min ||rho1 I + rho2 S - Sigma||^2."""
    from lwshrink import inner

    gram = np.array([[1.0, inner(identity(s.p), s)], [inner(s, identity(s.p)), frob_norm_sq(s)]])
    rhs = np.array([inner(sigma, identity(s.p)), inner(sigma, s)])
    rho1, rho2 = np.linalg.solve(gram, rhs)
    return rho1 * np.eye(s.p) + rho2 * s.data


class TestPopulationScalars:
    def test_identity(self):
        assert population_mu_alpha2(identity(6)) == (1.0, 0.0)

    def test_hand_value(self):
        mu, alpha2 = population_mu_alpha2(SymmetricMatrix(np.diag([1.0, 3.0])))
        assert mu == pytest.approx(2.0)
        assert alpha2 == pytest.approx(1.0)

    def test_rotation_invariance(self, rng):
        sigma = random_spd(rng, 5)
        q = np.linalg.qr(rng.standard_normal((5, 5)))[0]
        a = population_mu_alpha2(SymmetricMatrix(sigma))
        b = population_mu_alpha2(SymmetricMatrix(q @ sigma @ q.T))
        assert a[0] == pytest.approx(b[0], rel=1e-10)
        assert a[1] == pytest.approx(b[1], rel=1e-10)


class TestGaussianScalars:
    def test_identity_beta2(self):
        sc = gaussian_beta2(identity(5), 20)
        assert sc.beta2 == pytest.approx(6 / 19, rel=1e-15)
        assert sc.alpha2 == 0.0
        assert sc.delta2 == sc.alpha2 + sc.beta2
        assert sc.theta2 == pytest.approx(2 / 5, rel=1e-15)

    def test_scalar_case_matches_classical_variance(self):
        # p = 1: beta2 = V[sample variance] = 2 sigma^4 / (n - 1)
        sigma2 = 1.7
        sc = gaussian_beta2(SymmetricMatrix([[sigma2]]), 13)
        assert sc.beta2 == pytest.approx(2 * sigma2**2 / 12, rel=1e-14)

    def test_scalar_case_against_monte_carlo(self, rng):
        n, reps = 8, 20_000
        sc = gaussian_beta2(SymmetricMatrix([[1.0]]), n)
        vals = np.empty(reps)
        for i in range(reps):
            x = rng.standard_normal(n)
            vals[i] = (np.var(x, ddof=1) - 1.0) ** 2
        se = vals.std(ddof=1) / np.sqrt(reps)
        assert abs(vals.mean() - sc.beta2) < 4 * se

    def test_alpha_beta_delta_pythagoras(self, rng):
        sigma = SymmetricMatrix(random_spd(rng, 4))
        sc = gaussian_beta2(sigma, 9)
        assert sc.delta2 == sc.alpha2 + sc.beta2

    def test_mean_sample_loss_matches_beta2(self, rng):
        p, n, reps = 5, 20, 10_000
        sc = gaussian_beta2(identity(p), n)
        vals = np.empty(reps)
        for i in range(reps):
            x = ObservationMatrix(rng.standard_normal((p, n)))
            vals[i] = loss(sample_covariance(x), identity(p))
        se = vals.std(ddof=1) / np.sqrt(reps)
        assert abs(vals.mean() - sc.beta2) < 4 * se


class TestStudentScalars:
    @pytest.mark.parametrize("nu", [4.5, 8.5, 10.0, 15.0, 100.0])
    @pytest.mark.parametrize("p", [2, 5, 50])
    @pytest.mark.parametrize("n", [5, 20, 100])
    def test_two_forms_agree(self, rng, nu, p, n):
        # student_beta2 raises internally if its two closed forms disagree
        sigma = SymmetricMatrix(random_spd(rng, p))
        sc = student_beta2(sigma, n, nu)
        assert sc.delta2 == sc.alpha2 + sc.beta2
        assert sc.theta2 is None

    def test_large_nu_is_gaussian(self, rng):
        sigma = SymmetricMatrix(random_spd(rng, 4))
        a = student_beta2(sigma, 20, 1e8).beta2
        b = gaussian_beta2(sigma, 20).beta2
        assert abs(a - b) / b < 1e-6

    def test_rejects_nu_at_most_4(self):
        with pytest.raises(ValueError, match="fourth moment"):
            student_beta2(identity(3), 10, 4.0)

    def test_mean_sample_loss_matches_beta2(self, rng):
        p, n, nu, reps = 5, 20, 10.0, 10_000
        model = PopulationModel(identity(p), Student(nu))
        sc = student_beta2(identity(p), n, nu)
        vals = np.empty(reps)
        for i in range(reps):
            x = sample_student(model, n, int(rng.integers(0, 2**63)))
            vals[i] = loss(sample_covariance(x), identity(p))
        se = vals.std(ddof=1) / np.sqrt(reps)
        assert abs(vals.mean() - sc.beta2) < 4 * se


class TestSigmaStar:
    def test_identity_population_has_zero_loss(self, rng):
        sc = gaussian_beta2(identity(4), 10)
        s = sample_covariance(ObservationMatrix(rng.standard_normal((4, 10))))
        star = oracle_sigma_star(sc, s)
        assert np.allclose(star.data, np.eye(4), atol=1e-12)
        assert loss(star, identity(4)) == pytest.approx(0.0, abs=1e-24)

    def test_alpha_zero_kills_s_dependence(self, rng):
        sc = gaussian_beta2(SymmetricMatrix(2.5 * np.eye(3)), 8)
        s1 = sample_covariance(ObservationMatrix(rng.standard_normal((3, 8))))
        s2 = sample_covariance(ObservationMatrix(rng.standard_normal((3, 8))))
        assert np.allclose(oracle_sigma_star(sc, s1).data, oracle_sigma_star(sc, s2).data)

    def test_zero_delta2_rejected(self):
        from lwshrink import OracleScalars

        with pytest.raises(ValueError, match="delta2"):
            oracle_sigma_star(OracleScalars(1.0, 0.0, 0.0, 0.0), identity(2))

    def test_monte_carlo_loss_matches_formula(self, rng):
        p, n, reps = 5, 20, 10_000
        sigma = random_wishart_sigma(p, 99)
        sc = gaussian_beta2(sigma, n)
        model = PopulationModel(sigma)
        vals = np.empty(reps)
        for i in range(reps):
            x = sample_gaussian(model, n, int(rng.integers(0, 2**63)))
            vals[i] = loss(oracle_sigma_star(sc, sample_covariance(x)), sigma)
        se = vals.std(ddof=1) / np.sqrt(reps)
        assert abs(vals.mean() - sc.alpha2 * sc.beta2 / sc.delta2) < 4 * se

    def test_beats_fixed_coefficient_rivals(self, rng):
        # expected loss of sigma_star <= MC mean loss of any fixed (rho1, rho2)
        p, n, reps = 4, 12, 2000
        sigma = SymmetricMatrix(random_spd(rng, p))
        sc = gaussian_beta2(sigma, n)
        model = PopulationModel(sigma)
        rivals = rng.standard_normal((50, 2)) * [1.0, 0.5] + [0.0, 0.5]
        star_losses = np.empty(reps)
        rival_losses = np.empty((50, reps))
        for i in range(reps):
            x = sample_gaussian(model, n, int(rng.integers(0, 2**63)))
            s = sample_covariance(x)
            star_losses[i] = loss(oracle_sigma_star(sc, s), sigma)
            for j, (r1, r2) in enumerate(rivals):
                rival_losses[j, i] = loss(r1 * np.eye(p) + r2 * s.data, sigma.data)
        for j in range(len(rivals)):
            gap = rival_losses[j] - star_losses
            se = gap.std(ddof=1) / np.sqrt(reps)
            assert gap.mean() >= -2 * se


class TestSigmaStarStar:
    def test_target_inside_span(self, rng):
        s = sample_covariance(ObservationMatrix(rng.standard_normal((4, 9))))
        proj = optimal_sigma_starstar(s, s)
        assert loss(proj.sigma_starstar, s) == pytest.approx(0.0, abs=1e-20)

    def test_target_on_identity_line(self, rng):
        sigma = SymmetricMatrix(1.5 * np.eye(5))
        s = sample_covariance(ObservationMatrix(rng.standard_normal((5, 9))))
        proj = optimal_sigma_starstar(sigma, s)
        assert np.allclose(proj.sigma_starstar.data, 1.5 * np.eye(5), atol=1e-12)
        assert loss(proj.sigma_starstar, sigma) == pytest.approx(0.0, abs=1e-24)

    def test_degenerate_d2_returns_mu_identity(self):
        sigma = SymmetricMatrix(np.diag([1.0, 2.0]))
        s = SymmetricMatrix(3.0 * np.eye(2))
        proj = optimal_sigma_starstar(sigma, s)
        assert np.allclose(proj.sigma_starstar.data, 1.5 * np.eye(2))
        assert proj.alpha_tilde2 == 0.0

    def test_matches_normal_equations(self, rng):
        for _ in range(50):
            sigma = SymmetricMatrix(random_spd(rng, 4))
            s = sample_covariance(ObservationMatrix(rng.standard_normal((4, 8))))
            got = optimal_sigma_starstar(sigma, s).sigma_starstar.data
            want = solve_normal_equations(sigma, s)
            assert np.max(np.abs(got - want)) <= 1e-10 * max(1.0, np.max(np.abs(want)))

    def test_beats_random_candidates(self, rng):
        sigma = SymmetricMatrix(random_spd(rng, 4))
        s = sample_covariance(ObservationMatrix(rng.standard_normal((4, 8))))
        proj = optimal_sigma_starstar(sigma, s)
        best = loss(proj.sigma_starstar, sigma)
        coeffs = rng.standard_normal((1000, 2)) * 2.0
        for r1, r2 in coeffs:
            assert best <= loss(r1 * np.eye(4) + r2 * s.data, sigma.data) + 1e-12

    def test_cauchy_schwarz_bound_on_alpha_tilde(self, rng):
        from lwshrink.shrinkage import scalar_d2, scalar_m

        for _ in range(30):
            sigma = SymmetricMatrix(random_spd(rng, 5))
            s = sample_covariance(ObservationMatrix(rng.standard_normal((5, 11))))
            proj = optimal_sigma_starstar(sigma, s)
            mu, alpha2 = population_mu_alpha2(sigma)
            d2 = scalar_d2(s, scalar_m(s))
            delta = np.sqrt(alpha2)
            assert abs(proj.alpha_tilde2) <= delta * np.sqrt(d2) * (1 + 1e-12)

    def test_bounds_every_variant_per_sample(self, rng):
        for _ in range(25):
            sigma = SymmetricMatrix(random_spd(rng, 5))
            model = PopulationModel(sigma)
            x = sample_gaussian(model, 13, int(rng.integers(0, 2**63)))
            s = sample_covariance(x)
            bound = loss(optimal_sigma_starstar(sigma, s).sigma_starstar, sigma)
            for variant in "urms":
                assert bound <= loss(estimate(x, variant).estimate, sigma) + 1e-12


class TestLoss:
    def test_basics(self):
        assert loss(identity(3), identity(3)) == 0.0
        assert loss(np.zeros((4, 4)), identity(4)) == pytest.approx(1.0)
        assert loss(np.diag([2.0, 4.0]), np.diag([1.0, 3.0])) == pytest.approx(1.0)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="mismatch"):
            loss(identity(2), identity(3))


class TestExpectedSampleLoss:
    def test_identity_population_approximation(self):
        # (p/n)(1 + 2/p) = (p + 2)/n vs exact beta2 = (p+1)/(n-1)
        p = n = 50
        sc = gaussian_beta2(identity(p), n)
        approx = expected_sample_loss(sc, p, n)
        assert approx == pytest.approx((p + 2) / n, rel=1e-12)
        assert abs(approx - sc.beta2) / sc.beta2 < 0.10

    def test_vanishes_for_fixed_p(self):
        sc = gaussian_beta2(identity(5), 2)
        assert expected_sample_loss(sc, 5, 10**9) < 1e-8

    def test_equal_p_n_stays_above_mu_squared(self):
        sc = gaussian_beta2(identity(30), 30)
        assert expected_sample_loss(sc, 30, 30) >= sc.mu**2 > 0.0

    def test_requires_theta2(self):
        sc = student_beta2(identity(3), 10, 10.0)
        with pytest.raises(ValueError, match="theta2"):
            expected_sample_loss(sc, 3, 10)


class TestTheta2MonteCarlo:
    def test_matches_gaussian_closed_form(self, rng):
        sigma = SymmetricMatrix(random_spd(rng, 4))
        model = PopulationModel(sigma)
        sc = gaussian_beta2(sigma, 10)
        est = theta2_monte_carlo(model, 200_000, 31)
        assert est == pytest.approx(sc.theta2, rel=0.05)
