import numpy as np
import pytest

from lwshrink import (
    Gaussian,
    MixedStudent,
    ObservationMatrix,
    PopulationModel,
    Student,
    SymmetricMatrix,
    demean,
    frob_norm_sq,
    identity,
    inner,
    sample_covariance,
)
from conftest import random_symmetric


class TestSymmetricMatrix:
    def test_symmetrizes_rounding_noise(self, rng):
        a = random_symmetric(rng, 4)
        noisy = a.copy()
        noisy[0, 1] += 5e-11
        m = SymmetricMatrix(noisy)
        assert np.array_equal(m.data, m.data.T)

    def test_rejects_large_asymmetry(self):
        with pytest.raises(ValueError, match="asymmetric"):
            SymmetricMatrix([[0.0, 1.0], [0.0, 0.0]])

    def test_rejects_non_square_and_non_finite(self):
        with pytest.raises(ValueError, match="square"):
            SymmetricMatrix(np.zeros((2, 3)))
        with pytest.raises(ValueError, match="finite"):
            SymmetricMatrix([[np.nan, 0.0], [0.0, 1.0]])

    def test_data_is_immutable(self):
        m = identity(3)
        with pytest.raises(ValueError):
            m.data[0, 0] = 2.0


class TestObservationMatrix:
    def test_requires_two_samples(self):
        with pytest.raises(ValueError, match="n = 2"):
            ObservationMatrix(np.ones((3, 1)))

    def test_shape_accessors(self, rng):
        x = ObservationMatrix(rng.standard_normal((4, 9)))
        assert (x.p, x.n) == (4, 9)


class TestFrobNormSq:
    @pytest.mark.parametrize("p", [1, 2, 5, 50, 100])
    def test_identity_has_norm_one(self, p):
        assert frob_norm_sq(identity(p)) == pytest.approx(1.0, abs=0)

    def test_zero_matrix(self):
        assert frob_norm_sq(np.zeros((3, 3))) == 0.0

    def test_hand_value(self):
        # tr(A A^T)/p for diag(1, 3): (1 + 9)/2
        assert frob_norm_sq(np.diag([1.0, 3.0])) == pytest.approx(5.0)

    def test_zero_iff_zero_matrix(self, rng):
        a = random_symmetric(rng, 3)
        assert frob_norm_sq(a) > 0.0


class TestInner:
    def test_identity_and_zero(self):
        assert inner(identity(4), identity(4)) == pytest.approx(1.0)
        assert inner(identity(4), np.zeros((4, 4))) == 0.0

    def test_hand_value(self):
        assert inner(np.diag([1.0, 3.0]), np.diag([2.0, 2.0])) == pytest.approx(4.0)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="mismatch"):
            inner(identity(2), identity(3))

    def test_bilinear_and_symmetric(self, rng):
        for _ in range(20):
            a = random_symmetric(rng, 5)
            b = random_symmetric(rng, 5)
            c = random_symmetric(rng, 5)
            s, t = rng.standard_normal(2)
            assert inner(a, b) == pytest.approx(inner(b, a), rel=1e-12)
            assert inner(s * a + t * c, b) == pytest.approx(
                s * inner(a, b) + t * inner(c, b), rel=1e-10, abs=1e-12
            )
            assert inner(a, a) == pytest.approx(frob_norm_sq(a), rel=1e-12)

    def test_cauchy_schwarz(self, rng):
        for _ in range(100):
            a = random_symmetric(rng, 6)
            b = random_symmetric(rng, 6)
            lhs = inner(a, b) ** 2
            rhs = frob_norm_sq(a) * frob_norm_sq(b)
            assert lhs <= rhs * (1.0 + 1e-12)


class TestDemean:
    def test_constant_columns_vanish(self):
        x = ObservationMatrix(np.tile([[1.0], [2.0], [-3.0]], (1, 5)))
        assert np.array_equal(demean(x).data, np.zeros((3, 5)))

    def test_hand_value(self):
        x = ObservationMatrix([[1.0, 3.0], [2.0, 4.0]])
        assert np.allclose(demean(x).data, [[-1.0, 1.0], [-1.0, 1.0]], atol=0)

    def test_row_sums_vanish(self, rng):
        x = ObservationMatrix(rng.standard_normal((7, 20)) * 100)
        sums = demean(x).data.sum(axis=1)
        tol = 1e-10 * 20 * np.max(np.abs(x.data))
        assert np.all(np.abs(sums) <= tol)

    def test_translation_invariance(self, rng):
        x = ObservationMatrix(rng.standard_normal((4, 10)))
        v = rng.standard_normal(4) * 50
        shifted = ObservationMatrix(x.data + v[:, None])
        assert np.allclose(demean(x).data, demean(shifted).data, atol=1e-12)


class TestSampleCovariance:
    def test_constant_columns(self):
        x = ObservationMatrix(np.tile([[2.0], [5.0]], (1, 4)))
        assert np.array_equal(sample_covariance(x).data, np.zeros((2, 2)))

    def test_hand_value(self):
        x = ObservationMatrix([[1.0, 3.0], [2.0, 4.0]])
        assert np.allclose(sample_covariance(x).data, [[2.0, 2.0], [2.0, 2.0]], atol=0)

    def test_translation_invariance(self, rng):
        x = ObservationMatrix(rng.standard_normal((5, 12)))
        v = rng.standard_normal(5) * 30
        shifted = ObservationMatrix(x.data + v[:, None])
        a, b = sample_covariance(x).data, sample_covariance(shifted).data
        assert np.max(np.abs(a - b)) <= 1e-10 * np.max(np.abs(a))

    def test_psd(self, rng):
        for _ in range(10):
            x = ObservationMatrix(rng.standard_normal((6, 9)))
            w = np.linalg.eigvalsh(sample_covariance(x).data)
            assert w[0] >= -1e-8 * max(w[-1], 0.0)

    def test_large_sample_concentrates_on_identity(self, rng):
        x = ObservationMatrix(rng.standard_normal((3, 20000)))
        s = sample_covariance(x)
        err = frob_norm_sq(s.data - np.eye(3))
        # Theorem-1 scale: E||S - I||^2 ~ (p+1)/(n-1) here, allow 5x
        assert err < 5 * 4 / 19999


class TestPopulationModel:
    def test_rejects_indefinite_sigma(self):
        with pytest.raises(ValueError, match="semidefinite"):
            PopulationModel(SymmetricMatrix(np.diag([1.0, -0.5])))

    def test_student_needs_nu_above_4(self):
        with pytest.raises(ValueError, match="nu > 4"):
            PopulationModel(identity(2), Student(3.0))

    def test_student_nu_must_exceed_2(self):
        with pytest.raises(ValueError, match="exceed 2"):
            Student(2.0)
        with pytest.raises(ValueError, match="exceed 2"):
            MixedStudent(1.5, 9.0)

    def test_moment_assumption_flag(self):
        assert PopulationModel(identity(2), Gaussian()).meets_moment_assumption
        assert PopulationModel(identity(2), Student(10.0)).meets_moment_assumption
        assert not PopulationModel(identity(2), Student(4.5)).meets_moment_assumption
        assert PopulationModel(identity(2), MixedStudent(15.0, 8.5)).meets_moment_assumption
        assert not PopulationModel(identity(2), MixedStudent(15.0, 6.0)).meets_moment_assumption

    def test_mean_length_checked(self):
        with pytest.raises(ValueError, match="length"):
            PopulationModel(identity(3), Gaussian(), mean=np.zeros(2))

    def test_labels(self):
        assert Gaussian().label == "gaussian"
        assert Student(8.5).label == "student(8.5)"
        assert MixedStudent(15.0, 8.5).label == "mixed_student(15;8.5)"
        assert "," not in MixedStudent(15.0, 8.5).label  # labels land in CSV fields
