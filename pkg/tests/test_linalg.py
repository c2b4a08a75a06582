"""Matrix-layer behavior: splits, validation, square roots, ranks, kernels."""

import numpy as np
import pytest

from hypoindex import (
    DimensionError,
    NotPsdError,
    NotSemiDissipativeError,
    SymmetryError,
    as_complex_matrix,
    general_eigenvalues,
    hermitian_eigensystem,
    hermitian_split,
    hermitian_sqrt,
    is_anti_hermitian,
    is_hermitian,
    is_semi_dissipative,
    kernel_basis,
    matrix_exponential,
    rank_with_tolerance,
    require_semi_dissipative,
    singular_values,
    spectral_norm,
)
from hypoindex.linalg import _effective_tol


def random_complex(rng, n):
    return rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))


class TestValidation:
    def test_rejects_non_square(self):
        with pytest.raises(DimensionError):
            as_complex_matrix(np.zeros((2, 3)))

    def test_rejects_empty(self):
        with pytest.raises(DimensionError):
            as_complex_matrix(np.zeros((0, 0)))

    def test_rejects_non_finite(self):
        with pytest.raises(DimensionError):
            as_complex_matrix([[np.nan, 0.0], [0.0, 1.0]])
        with pytest.raises(DimensionError):
            as_complex_matrix([[1.0, np.inf * 1j], [0.0, 1.0]])

    def test_rejects_vector(self):
        with pytest.raises(DimensionError):
            as_complex_matrix([1.0, 2.0])

    def test_accepts_nested_lists(self):
        M = as_complex_matrix([[1, 2], [3, 4]])
        assert M.dtype == np.complex128
        assert M.shape == (2, 2)


class TestEffectiveTol:
    def test_relative_when_scaled(self):
        assert _effective_tol(1e-10, 2.0) == 2e-10

    def test_absolute_fallback_at_zero_scale(self):
        assert _effective_tol(1e-10, 0.0) == 1e-10


class TestHermitianSplit:
    def test_parts_reconstruct_to_roundoff(self):
        rng = np.random.default_rng(11)
        B = random_complex(rng, 5)
        sys = hermitian_split(B)
        residual = np.linalg.norm(sys.hermitian_part + sys.anti_part - B)
        assert residual <= 1e-15 * np.linalg.norm(B)
        assert is_hermitian(sys.hermitian_part)
        assert is_anti_hermitian(sys.anti_part)

    def test_margin_is_smallest_hermitian_eigenvalue(self):
        sys = hermitian_split(np.diag([3.0, 0.25]))
        assert sys.psd_margin == pytest.approx(0.25)

    def test_semi_dissipative_accept_and_reject(self):
        ok = hermitian_split(np.diag([1.0, 0.0]))
        assert is_semi_dissipative(ok)
        require_semi_dissipative(ok)
        bad = hermitian_split(np.diag([1.0, -1e-6]))
        assert not is_semi_dissipative(bad)
        with pytest.raises(NotSemiDissipativeError):
            require_semi_dissipative(bad)

    def test_float_noise_negative_margin_is_accepted(self):
        rng = np.random.default_rng(3)
        G = random_complex(rng, 6)
        U, _ = np.linalg.qr(G)
        H = U @ np.diag([0.0, 0.0, 1.0, 1.2, 0.7, 2.0]) @ U.conj().T
        sys = hermitian_split(H + (G - G.conj().T) / 2)
        require_semi_dissipative(sys)  # margin ~ -1e-16 must pass


class TestHermitianSqrt:
    def test_square_recovers_matrix(self):
        rng = np.random.default_rng(5)
        G = random_complex(rng, 4)
        H = G @ G.conj().T
        R = hermitian_sqrt(H)
        assert np.linalg.norm(R @ R - H) <= 1e-12 * np.linalg.norm(H)
        assert is_hermitian(R)

    def test_rejects_indefinite(self):
        with pytest.raises(NotPsdError):
            hermitian_sqrt(np.diag([1.0, -0.5]))

    def test_zero_eigenvalue_noise_is_clamped_two_sided(self):
        # a unitarily rotated exact-zero eigenvalue reappears as +/- 1e-16
        # noise; the root must keep it an exact zero direction instead of
        # amplifying it to ~1e-8 and corrupting downstream rank decisions
        rng = np.random.default_rng(17)
        for _ in range(20):
            G = random_complex(rng, 6)
            U, _ = np.linalg.qr(G)
            H = U @ np.diag([0.0, 0.0, 0.8, 1.1, 1.9, 0.6]) @ U.conj().T
            H = (H + H.conj().T) / 2
            sigma = np.linalg.svd(hermitian_sqrt(H), compute_uv=False)
            assert sigma[-1] <= 1e-12 * sigma[0]
            assert sigma[-2] <= 1e-12 * sigma[0]
            assert sigma[-3] > 1e-3 * sigma[0]

    def test_matches_diagonal_closed_form(self):
        R = hermitian_sqrt(np.diag([4.0, 9.0]))
        assert np.allclose(R, np.diag([2.0, 3.0]))


class TestMatrixExponential:
    def test_zero_gives_identity(self):
        assert np.array_equal(matrix_exponential(np.zeros((3, 3))), np.eye(3))

    def test_diagonal_closed_form(self):
        E = matrix_exponential(np.diag([1.0, -2.0]))
        assert np.allclose(E, np.diag([np.e, np.exp(-2.0)]), rtol=1e-14)

    def test_rotation_closed_form(self):
        t = 0.7
        E = matrix_exponential(t * np.array([[0.0, -1.0], [1.0, 0.0]]))
        expected = np.array([[np.cos(t), -np.sin(t)], [np.sin(t), np.cos(t)]])
        assert np.allclose(E, expected, atol=1e-14)

    def test_group_property(self):
        rng = np.random.default_rng(2)
        M = random_complex(rng, 4)
        lhs = matrix_exponential(M * 0.3) @ matrix_exponential(M * 0.4)
        rhs = matrix_exponential(M * 0.7)
        assert np.linalg.norm(lhs - rhs) <= 1e-12 * np.linalg.norm(rhs)


class TestRankAndKernel:
    def test_rank_counts_relative_to_largest_sigma(self):
        M = np.diag([1.0, 1e-5, 1e-14])
        assert rank_with_tolerance(M) == 2
        assert rank_with_tolerance(M, tol_rank=1e-6) == 2
        assert rank_with_tolerance(M, tol_rank=1e-4) == 1

    def test_zero_matrix_has_rank_zero(self):
        assert rank_with_tolerance(np.zeros((3, 3))) == 0

    def test_singular_values_descending(self):
        rng = np.random.default_rng(9)
        s = singular_values(random_complex(rng, 5))
        assert np.all(np.diff(s) <= 0)

    def test_kernel_basis_spans_null_space(self):
        rng = np.random.default_rng(4)
        G = random_complex(rng, 5)
        U, _ = np.linalg.qr(G)
        H = U @ np.diag([0.0, 0.0, 1.0, 2.0, 3.0]) @ U.conj().T
        H = (H + H.conj().T) / 2
        V = kernel_basis(H)
        assert V.shape == (5, 2)
        assert np.linalg.norm(V.conj().T @ V - np.eye(2)) <= 1e-12
        assert np.linalg.norm(H @ V) <= 1e-12 * np.linalg.norm(H)

    def test_kernel_basis_empty_for_definite(self):
        assert kernel_basis(np.diag([1.0, 2.0])).shape == (2, 0)

    def test_kernel_basis_full_for_zero_matrix(self):
        V = kernel_basis(np.zeros((3, 3)))
        assert V.shape == (3, 3)

    def test_kernel_basis_rejects_indefinite(self):
        with pytest.raises(NotPsdError):
            kernel_basis(np.diag([1.0, -1.0]))


class TestEigenOrdering:
    def test_sorted_by_real_then_imaginary(self):
        lam = general_eigenvalues(np.diag([2.0, 1.0 + 1j, 1.0 - 1j]))
        assert np.allclose(lam, [1.0 - 1j, 1.0 + 1j, 2.0])

    def test_deterministic_across_calls(self):
        rng = np.random.default_rng(8)
        M = random_complex(rng, 6)
        assert np.array_equal(general_eigenvalues(M), general_eigenvalues(M))

    def test_hermitian_eigensystem_requires_symmetry(self):
        with pytest.raises(SymmetryError):
            hermitian_eigensystem(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_spectral_norm_matches_largest_sigma(self):
        rng = np.random.default_rng(6)
        M = random_complex(rng, 4)
        assert spectral_norm(M) == pytest.approx(np.linalg.svd(M, compute_uv=False)[0])
