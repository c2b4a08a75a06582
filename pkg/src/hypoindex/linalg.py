"""Dense complex linear algebra helpers shared by every analysis stage.

All matrices are numpy complex128 arrays. Tolerances are relative to the
natural scale of the matrix at hand (largest singular value or eigenvalue
magnitude) with an absolute fallback when that scale is zero.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DimensionError, NotPsdError, NotSemiDissipativeError, SymmetryError

DEFAULT_TOL_RANK = 1e-10
DEFAULT_TOL_PSD = 1e-12

# Slack used when checking structural symmetry of inputs, relative to the
# matrix norm. Inputs built as (M + M*)/2 pass exactly; user data gets a
# margin for round-off in upstream arithmetic.
SYMMETRY_RTOL = 1e-10


def as_complex_matrix(obj) -> np.ndarray:
    """Validate and convert to a square, finite, complex128 2-D array."""
    M = np.asarray(obj, dtype=np.complex128)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {M.shape}")
    if M.shape[0] == 0:
        raise DimensionError("empty matrix")
    if not np.all(np.isfinite(M.real)) or not np.all(np.isfinite(M.imag)):
        raise DimensionError("matrix has non-finite entries")
    return M


def _effective_tol(tol: float, scale: float) -> float:
    """Relative tolerance against ``scale``, absolute when the scale vanishes."""
    return tol * scale if scale > 0.0 else tol


def is_hermitian(M: np.ndarray, rtol: float = SYMMETRY_RTOL) -> bool:
    scale = np.linalg.norm(M)
    return np.linalg.norm(M - M.conj().T) <= _effective_tol(rtol, scale)


def is_anti_hermitian(M: np.ndarray, rtol: float = SYMMETRY_RTOL) -> bool:
    scale = np.linalg.norm(M)
    return np.linalg.norm(M + M.conj().T) <= _effective_tol(rtol, scale)


@dataclass
class SemiDissipativeSystem:
    """Hermitian/anti-Hermitian split of a system matrix B.

    Both parts are exactly structured (Hermitian resp. anti-Hermitian to the
    last bit) and their sum reproduces ``matrix`` to round-off. ``psd_margin``
    is the smallest eigenvalue of the Hermitian part, so the system is
    semi-dissipative iff ``psd_margin >= -tol``.
    """

    matrix: np.ndarray
    hermitian_part: np.ndarray
    anti_part: np.ndarray
    psd_margin: float

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def sqrt_hermitian_part(self, tol_psd: float = DEFAULT_TOL_PSD) -> np.ndarray:
        return hermitian_sqrt(self.hermitian_part, tol_psd)


def hermitian_split(B) -> SemiDissipativeSystem:
    """Split B into its Hermitian and anti-Hermitian parts.

    No definiteness is enforced here; use ``require_semi_dissipative`` for
    validation so that diagnostic code can still inspect indefinite splits.
    """
    B = as_complex_matrix(B)
    H = (B + B.conj().T) / 2.0
    A = (B - B.conj().T) / 2.0
    margin = float(np.linalg.eigvalsh(H)[0])
    return SemiDissipativeSystem(B, H, A, margin)


def is_semi_dissipative(sys: SemiDissipativeSystem, tol_psd: float = DEFAULT_TOL_PSD) -> bool:
    scale = float(np.linalg.eigvalsh(sys.hermitian_part)[-1])
    return sys.psd_margin >= -_effective_tol(tol_psd, abs(scale))


def require_semi_dissipative(sys: SemiDissipativeSystem, tol_psd: float = DEFAULT_TOL_PSD) -> SemiDissipativeSystem:
    if not is_semi_dissipative(sys, tol_psd):
        raise NotSemiDissipativeError(
            f"Hermitian part has eigenvalue {sys.psd_margin:.3e} below the PSD tolerance"
        )
    return sys


@dataclass
class HermitianEigen:
    """Eigendecomposition of a Hermitian matrix.

    ``eigenvalues`` ascending, ``eigenvectors`` orthonormal columns with
    ``H @ eigenvectors[:, i] == eigenvalues[i] * eigenvectors[:, i]``.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def hermitian_eigensystem(H, rtol: float = SYMMETRY_RTOL) -> HermitianEigen:
    H = as_complex_matrix(H)
    if not is_hermitian(H, rtol):
        raise SymmetryError("matrix is not Hermitian within tolerance")
    w, V = np.linalg.eigh(H)
    return HermitianEigen(w, V)


def hermitian_sqrt(H, tol_psd: float = DEFAULT_TOL_PSD) -> np.ndarray:
    """Principal square root of a Hermitian PSD matrix.

    Eigenvalues with |lambda| <= tol are treated as round-off zeros and
    clamped to exactly 0; anything below -tol raises. The clamp must be
    two-sided: a true zero eigenvalue computed as +1e-16 noise would
    otherwise come out of the square root as a spurious 1e-8 direction,
    large enough to disturb downstream rank decisions. The result is
    re-Hermitized so that chained products stay exactly Hermitian.
    """
    eig = hermitian_eigensystem(H)
    w, V = eig.eigenvalues, eig.eigenvectors
    scale = float(abs(w).max()) if w.size else 0.0
    tol = _effective_tol(tol_psd, scale)
    if w[0] < -tol:
        raise NotPsdError(f"eigenvalue {w[0]:.3e} below -{tol:.3e}")
    w = np.where(np.abs(w) <= tol, 0.0, w)
    root = V @ np.diag(np.sqrt(np.clip(w, 0.0, None))) @ V.conj().T
    return (root + root.conj().T) / 2.0


def spectral_norm(M) -> float:
    M = np.asarray(M, dtype=np.complex128)
    if M.size == 0:
        return 0.0
    return float(np.linalg.norm(M, 2))


def matrix_exponential(M) -> np.ndarray:
    """e^M via scaling-and-squaring (Pade approximant, scipy backend)."""
    return scipy.linalg.expm(as_complex_matrix(M))


def rank_with_tolerance(M, tol_rank: float = DEFAULT_TOL_RANK) -> int:
    """Number of singular values above ``tol_rank * sigma_max``."""
    M = np.asarray(M, dtype=np.complex128)
    if M.size == 0:
        return 0
    sigma = np.linalg.svd(M, compute_uv=False)
    if sigma[0] == 0.0:
        return 0
    return int(np.count_nonzero(sigma > tol_rank * sigma[0]))


def singular_values(M) -> np.ndarray:
    M = np.asarray(M, dtype=np.complex128)
    return np.linalg.svd(M, compute_uv=False)


def kernel_basis(H, tol_rank: float = DEFAULT_TOL_RANK) -> np.ndarray:
    """Orthonormal basis (columns) of the near-null eigenspace of Hermitian PSD H.

    Returns an (n, 0) array when H is definite at the tolerance. A zero matrix
    yields the full identity basis.
    """
    eig = hermitian_eigensystem(H)
    w, V = eig.eigenvalues, eig.eigenvectors
    scale = float(abs(w).max())
    tol = _effective_tol(tol_rank, scale)
    if w[0] < -tol:
        raise NotPsdError(f"matrix is not PSD: eigenvalue {w[0]:.3e}")
    mask = w <= tol
    return V[:, mask]


def general_eigenvalues(M) -> np.ndarray:
    """Eigenvalues of a general complex matrix, sorted by (Re, Im) ascending."""
    M = as_complex_matrix(M)
    lam = np.linalg.eigvals(M)
    order = np.lexsort((lam.imag, lam.real))
    return lam[order]
