"""Tests for the generic bound machinery: null-space bases, the
unconstrained and constrained information inverses, and the covariance
Schur complement."""

import numpy as np
import pytest

from blindcrb import (
    RankDeficient,
    crb_constrained,
    crb_unconstrained,
    fix_column_phases,
    orthonormal_nullspace,
    schur_cov_bound,
)
from helpers import assert_psd, random_psd


def random_complex(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


class TestFixColumnPhases:
    def test_pivot_entries_become_real_positive(self):
        rng = np.random.default_rng(0)
        U = fix_column_phases(random_complex(rng, 6, 3))
        for j in range(3):
            k = np.argmax(np.abs(U[:, j]))
            assert U[k, j].imag == pytest.approx(0.0, abs=1e-15)
            assert U[k, j].real > 0

    def test_idempotent(self):
        rng = np.random.default_rng(1)
        U = fix_column_phases(random_complex(rng, 5, 2))
        np.testing.assert_allclose(fix_column_phases(U), U, atol=1e-15)

    def test_preserves_column_norms(self):
        rng = np.random.default_rng(2)
        A = random_complex(rng, 4, 4)
        U = fix_column_phases(A)
        np.testing.assert_allclose(
            np.linalg.norm(U, axis=0), np.linalg.norm(A, axis=0), atol=1e-14
        )

    def test_zero_column_untouched(self):
        A = np.zeros((3, 1), dtype=complex)
        np.testing.assert_array_equal(fix_column_phases(A), A)


class TestNullspace:
    def test_frozen_single_row(self):
        U = orthonormal_nullspace(np.array([[1.0, 0.0]]))
        np.testing.assert_allclose(U, np.array([[0.0], [1.0]]), atol=1e-15)

    def test_coordinate_row_complement(self):
        e = np.zeros((1, 5))
        e[0, 2] = 1.0
        U = orthonormal_nullspace(e)
        proj = np.eye(5)
        proj[2, 2] = 0.0
        np.testing.assert_allclose(U @ U.conj().T, proj, atol=1e-14)

    def test_random_wide_jacobian(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            Jf = random_complex(rng, 3, 7)
            U = orthonormal_nullspace(Jf)
            assert U.shape == (7, 4)
            np.testing.assert_allclose(Jf @ U, 0, atol=1e-13 * np.linalg.norm(Jf))
            np.testing.assert_allclose(U.conj().T @ U, np.eye(4), atol=1e-13)

    def test_accepts_one_dimensional_input(self):
        U = orthonormal_nullspace(np.array([1.0, 0.0]))
        assert U.shape == (2, 1)

    def test_deterministic(self):
        rng = np.random.default_rng(4)
        Jf = random_complex(rng, 2, 6)
        np.testing.assert_array_equal(
            orthonormal_nullspace(Jf), orthonormal_nullspace(Jf)
        )

    def test_rejects_more_rows_than_columns(self):
        with pytest.raises(RankDeficient):
            orthonormal_nullspace(np.eye(4)[:, :3])
        with pytest.raises(RankDeficient):
            orthonormal_nullspace(np.ones((4, 3)))

    def test_rejects_dependent_rows(self):
        Jf = np.array([[1.0, 2.0, 3.0], [2.0, 4.0, 6.0]])
        with pytest.raises(RankDeficient):
            orthonormal_nullspace(Jf)


class TestUnconstrained:
    def test_scalar(self):
        np.testing.assert_allclose(crb_unconstrained(np.array([[2.0]])), [[0.5]])

    def test_singular_all_ones(self):
        J = np.ones((2, 2))
        np.testing.assert_allclose(crb_unconstrained(J), np.ones((2, 2)) / 4, atol=1e-14)

    def test_inverts_full_rank_information(self):
        rng = np.random.default_rng(5)
        J = random_psd(4, rng) + np.eye(4)
        C = crb_unconstrained(J)
        np.testing.assert_allclose(J @ C, np.eye(4), atol=1e-10)

    def test_result_hermitian(self):
        rng = np.random.default_rng(6)
        C = crb_unconstrained(random_psd(5, rng))
        np.testing.assert_array_equal(C, C.conj().T)

    def test_rejects_non_hermitian(self):
        with pytest.raises(ValueError, match="Hermitian"):
            crb_unconstrained(np.array([[1.0, 2.0], [0.0, 1.0]]))

    def test_rejects_non_square(self):
        with pytest.raises(ValueError, match="square"):
            crb_unconstrained(np.ones((2, 3)))


class TestConstrained:
    def test_fully_constrained_is_zero(self):
        rng = np.random.default_rng(7)
        J = random_psd(3, rng) + np.eye(3)
        B = crb_constrained(J, np.eye(3))
        np.testing.assert_array_equal(B, np.zeros((3, 3)))

    def test_coordinate_pin_equals_minor_inverse(self):
        rng = np.random.default_rng(8)
        J = random_psd(5, rng) + np.eye(5)
        for d in (0, 2, 4):
            Jf = np.zeros((1, 5))
            Jf[0, d] = 1.0
            B = crb_constrained(J, Jf)
            np.testing.assert_allclose(B[d, :], 0, atol=1e-12)
            np.testing.assert_allclose(B[:, d], 0, atol=1e-12)
            minor = np.delete(np.delete(J, d, axis=0), d, axis=1)
            np.testing.assert_allclose(
                np.delete(np.delete(B, d, axis=0), d, axis=1),
                np.linalg.inv(minor),
                atol=1e-10,
            )

    def test_never_exceeds_unconstrained(self):
        rng = np.random.default_rng(9)
        for _ in range(10):
            J = random_psd(6, rng) + np.eye(6)
            Jf = random_complex(rng, 2, 6)
            gap = crb_unconstrained(J) - crb_constrained(J, Jf)
            assert_psd(gap, scale_tol=1e-10, msg="constrained bound above unconstrained")

    def test_invariant_under_constraint_remixing(self):
        rng = np.random.default_rng(10)
        J = random_psd(6, rng) + np.eye(6)
        Jf = random_complex(rng, 2, 6)
        A = random_complex(rng, 2, 2) + 3 * np.eye(2)
        B1 = crb_constrained(J, Jf)
        B2 = crb_constrained(J, A @ Jf)
        np.testing.assert_allclose(B1, B2, atol=1e-11 * np.linalg.norm(B1))

    def test_extra_constraints_tighten_the_bound(self):
        rng = np.random.default_rng(11)
        J = random_psd(6, rng) + np.eye(6)
        Jf = random_complex(rng, 3, 6)
        loose = crb_constrained(J, Jf[:1])
        tight = crb_constrained(J, Jf)
        assert_psd(loose - tight, scale_tol=1e-10, msg="adding constraints must shrink the bound")

    def test_rejects_dimension_mismatch(self):
        with pytest.raises(ValueError, match="parameter"):
            crb_constrained(np.eye(4), np.array([[1.0, 0.0]]))


class TestSchurBound:
    def test_uncorrelated_returns_sigma22(self):
        rng = np.random.default_rng(12)
        S11 = random_psd(3, rng)
        S22 = random_psd(2, rng)
        Z = np.zeros((3, 2))
        np.testing.assert_array_equal(schur_cov_bound(S11, Z, Z.T, S22), S22)

    def test_frozen_scalar_partition(self):
        out = schur_cov_bound(
            np.array([[2.0]]), np.array([[1.0]]), np.array([[1.0]]), np.array([[2.0]])
        )
        np.testing.assert_allclose(out, [[1.5]])

    def test_linear_dependence_hits_zero(self):
        rng = np.random.default_rng(13)
        C = random_psd(4, rng) + np.eye(4)
        Mmap = random_complex(rng, 3, 4)
        residual = schur_cov_bound(C, C @ Mmap.conj().T, Mmap @ C, Mmap @ C @ Mmap.conj().T)
        np.testing.assert_allclose(residual, 0, atol=1e-10 * np.linalg.norm(C))

    def test_random_partitions_stay_psd(self):
        rng = np.random.default_rng(14)
        for _ in range(50):
            n1 = int(rng.integers(1, 5))
            n2 = int(rng.integers(1, 5))
            S = random_psd(n1 + n2, rng)
            residual = schur_cov_bound(
                S[:n1, :n1], S[:n1, n1:], S[n1:, :n1], S[n1:, n1:]
            )
            assert_psd(residual, scale_tol=1e-10)
