"""Hypocoercivity index of a semi-dissipative system x' = -Bx.

The index m_hc is the smallest m >= 0 at which any one of eight equivalent
criteria fires, four definiteness chains

    T_anti(m)       = sum_{j<=m} B_A^j  B_H (B_A*)^j
    T_forward(m)    = sum_{j<=m} B^j    B_H (B*)^j
    T_adjoint(m)    = sum_{j<=m} (B*)^j B_H B^j
    T_commutator(m) = sum_{j<=m} C_j* C_j,   C_0 = sqrt(B_H), C_{j+1} = [C_j, B_A]

becoming positive definite, and four Kalman rank conditions

    rank [R, M R, ..., M^m R] = n,   R = sqrt(B_H), M in {B_A, B, B*}
    rank [C_0, C_1, ..., C_m] = n

reaching full rank. All eight agree in exact arithmetic; compute_index runs
them all and refuses to return a value if they disagree numerically. m_hc = 0
means coercive (B_H definite), INFINITE means no decay of the propagator norm.
"""

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import BorderlineSpectrumError, InconsistencyError, ValidationError, VariantDisagreementError
from .linalg import (
    DEFAULT_TOL_PSD,
    DEFAULT_TOL_RANK,
    SemiDissipativeSystem,
    _effective_tol,
    general_eigenvalues,
    hermitian_split,
    require_semi_dissipative,
    spectral_norm,
)

INFINITE = math.inf

# A decision (definiteness or rank) whose margin is within this factor of its
# tolerance threshold marks the report as low confidence.
BORDERLINE_FACTOR = 10.0


class IndexVariant(Enum):
    """The eight equivalent index characterizations."""

    T_ANTI = "T_anti"
    T_FORWARD = "T_forward"
    T_ADJOINT = "T_adjoint"
    T_COMMUTATOR = "T_commutator"
    K_ANTI = "K_anti"
    K_FORWARD = "K_forward"
    K_ADJOINT = "K_adjoint"
    K_COMMUTATOR = "K_commutator"

    @property
    def is_definiteness(self) -> bool:
        return self.name.startswith("T_")

    @property
    def is_rank(self) -> bool:
        return self.name.startswith("K_")


def _chain_factors(sys: SemiDissipativeSystem, variant: IndexVariant):
    """Left/right multipliers generating term j+1 from term j of a T chain."""
    B, B_A = sys.matrix, sys.anti_part
    if variant is IndexVariant.T_ANTI:
        return B_A, B_A.conj().T
    if variant is IndexVariant.T_FORWARD:
        return B, B.conj().T
    if variant is IndexVariant.T_ADJOINT:
        return B.conj().T, B
    raise ValidationError(f"no multiplier form for variant {variant.value}")


def commutator_chain(sys: SemiDissipativeSystem, m: int, tol_psd: float = DEFAULT_TOL_PSD) -> list[np.ndarray]:
    """[C_0, ..., C_m] with C_0 = sqrt(B_H) and C_{j+1} = C_j B_A - B_A C_j.

    Each C_j is Hermitian (commutator of Hermitian with anti-Hermitian);
    this is asserted to round-off and then enforced exactly.
    """
    if m < 0:
        raise ValidationError("chain length must be >= 0")
    C = sys.sqrt_hermitian_part(tol_psd)
    B_A = sys.anti_part
    chain = [C]
    for _ in range(m):
        X = chain[-1] @ B_A - B_A @ chain[-1]
        drift = np.linalg.norm(X - X.conj().T)
        if drift > 1e-10 * max(1.0, np.linalg.norm(X)):
            raise InconsistencyError(f"commutator chain lost Hermiticity (drift {drift:.3e})")
        chain.append((X + X.conj().T) / 2.0)
    return chain


def t_chain(sys: SemiDissipativeSystem, variant: IndexVariant, m: int, tol_psd: float = DEFAULT_TOL_PSD) -> np.ndarray:
    """Accumulated Hermitian chain matrix T_variant(m)."""
    if not variant.is_definiteness:
        raise ValidationError(f"t_chain needs a T_* variant, got {variant.value}")
    if m < 0:
        raise ValidationError("chain length must be >= 0")
    if variant is IndexVariant.T_COMMUTATOR:
        chain = commutator_chain(sys, m, tol_psd)
        T = sum(C.conj().T @ C for C in chain)
    else:
        L, R = _chain_factors(sys, variant)
        X = sys.hermitian_part
        T = X.copy()
        for _ in range(m):
            X = L @ X @ R
            T = T + X
    return (T + T.conj().T) / 2.0


def kalman_block(sys: SemiDissipativeSystem, variant: IndexVariant, m: int, tol_psd: float = DEFAULT_TOL_PSD) -> np.ndarray:
    """Horizontal block matrix whose rank realizes the variant at step m."""
    if not variant.is_rank:
        raise ValidationError(f"kalman_block needs a K_* variant, got {variant.value}")
    if m < 0:
        raise ValidationError("block length must be >= 0")
    if variant is IndexVariant.K_COMMUTATOR:
        return np.hstack(commutator_chain(sys, m, tol_psd))
    M = {
        IndexVariant.K_ANTI: sys.anti_part,
        IndexVariant.K_FORWARD: sys.matrix,
        IndexVariant.K_ADJOINT: sys.matrix.conj().T,
    }[variant]
    cols = sys.sqrt_hermitian_part(tol_psd)
    blocks = [cols]
    for _ in range(m):
        cols = M @ cols
        blocks.append(cols)
    return np.hstack(blocks)


@dataclass
class _Scan:
    index: float  # int when found, INFINITE otherwise
    rank_trace: list[int] = field(default_factory=list)
    borderline: bool = False


def _definiteness_scan(sys, variant, tol_psd, m_cap, clamp_tol=None) -> _Scan:
    # clamp_tol feeds the sqrt(B_H) clamping inside the commutator chain; by
    # default it matches the decision tolerance, but tolerance-sweep probes
    # keep it fixed so only the definiteness decision moves.
    clamp = tol_psd if clamp_tol is None else clamp_tol
    scan = _Scan(INFINITE)
    for m in range(m_cap + 1):
        w = np.linalg.eigvalsh(t_chain(sys, variant, m, clamp))
        scale = float(abs(w).max()) if w.size else 0.0
        thr = _effective_tol(tol_psd, scale)
        lam_min = float(w[0])
        if thr / BORDERLINE_FACTOR < lam_min < thr * BORDERLINE_FACTOR:
            scan.borderline = True
        if lam_min > thr:
            scan.index = m
            return scan
    return scan


def _rank_scan(sys, variant, tol_rank, tol_psd, m_cap) -> _Scan:
    scan = _Scan(INFINITE)
    n = sys.n
    for m in range(m_cap + 1):
        sigma = np.linalg.svd(kalman_block(sys, variant, m, tol_psd), compute_uv=False)
        thr = _effective_tol(tol_rank, float(sigma[0]))
        above = sigma[sigma > thr]
        below = sigma[sigma <= thr]
        rank = int(above.size)
        if above.size and above[-1] < thr * BORDERLINE_FACTOR:
            scan.borderline = True
        if below.size and below[0] > thr / BORDERLINE_FACTOR:
            scan.borderline = True
        scan.rank_trace.append(rank)
        if rank == n:
            scan.index = m
            return scan
    return scan


def definiteness_index(
    sys: SemiDissipativeSystem,
    variant: IndexVariant = IndexVariant.T_ANTI,
    tol_psd: float = DEFAULT_TOL_PSD,
    m_cap: int | None = None,
) -> float:
    """Smallest m with T_variant(m) positive definite, else INFINITE."""
    require_semi_dissipative(sys, tol_psd)
    cap = sys.n - 1 if m_cap is None else min(m_cap, sys.n - 1)
    return _definiteness_scan(sys, variant, tol_psd, cap).index


def kalman_rank_index(
    sys: SemiDissipativeSystem,
    variant: IndexVariant = IndexVariant.K_ANTI,
    tol_rank: float = DEFAULT_TOL_RANK,
    tol_psd: float = DEFAULT_TOL_PSD,
    m_cap: int | None = None,
) -> float:
    """Smallest m at which the variant's block reaches full rank, else INFINITE.

    The rank sequence is non-decreasing and saturates by m = n - 1, so the
    scan never needs to look further.
    """
    require_semi_dissipative(sys, tol_psd)
    cap = sys.n - 1 if m_cap is None else min(m_cap, sys.n - 1)
    return _rank_scan(sys, variant, tol_rank, tol_psd, cap).index


@dataclass
class IndexReport:
    """Agreed index value plus the evidence backing it.

    ``kappa`` is the smallest eigenvalue of the adjoint chain at m_hc (0 when
    the index is infinite). ``rank_trace`` is the rank growth of the K_anti
    block. ``low_confidence`` is set when any decision margin sat within a
    factor 10 of its tolerance threshold.
    """

    m_hc: float
    per_variant: dict[IndexVariant, float]
    kappa: float
    rank_trace: list[int]
    hypocoercive_spectral: bool
    spectrum: np.ndarray
    low_confidence: bool


def compute_index(
    sys: SemiDissipativeSystem,
    tol_rank: float = DEFAULT_TOL_RANK,
    tol_psd: float = DEFAULT_TOL_PSD,
    m_cap: int | None = None,
) -> IndexReport:
    """Run all eight characterizations and return the agreed index.

    Raises VariantDisagreementError (carrying all eight values) if they do not
    agree, and BorderlineSpectrumError if index finiteness contradicts the
    spectral test min Re(lambda) > 0.
    """
    require_semi_dissipative(sys, tol_psd)
    cap = sys.n - 1 if m_cap is None else min(m_cap, sys.n - 1)

    scans: dict[IndexVariant, _Scan] = {}
    for variant in IndexVariant:
        if variant.is_definiteness:
            scans[variant] = _definiteness_scan(sys, variant, tol_psd, cap)
        else:
            scans[variant] = _rank_scan(sys, variant, tol_rank, tol_psd, cap)
    per_variant = {v: s.index for v, s in scans.items()}

    values = set(per_variant.values())
    if len(values) != 1:
        detail = ", ".join(f"{v.value}={s.index}" for v, s in scans.items())
        raise VariantDisagreementError(f"index variants disagree: {detail}", per_variant)
    m_hc = values.pop()

    spectrum = general_eigenvalues(sys.matrix)
    tol_sp = _effective_tol(tol_rank, spectral_norm(sys.matrix))
    min_re = float(spectrum.real.min())
    hypocoercive_spectral = min_re > tol_sp
    if (m_hc != INFINITE) != hypocoercive_spectral:
        raise BorderlineSpectrumError(
            f"index {m_hc} vs min Re(spectrum) = {min_re:.3e} at tolerance {tol_sp:.3e}"
        )

    kappa = 0.0
    if m_hc != INFINITE:
        T = t_chain(sys, IndexVariant.T_ADJOINT, int(m_hc), tol_psd)
        kappa = float(np.linalg.eigvalsh(T)[0])

    spectral_borderline = bool(np.any(np.abs(spectrum.real) <= BORDERLINE_FACTOR * tol_sp)) and hypocoercive_spectral
    low_confidence = any(s.borderline for s in scans.values()) or spectral_borderline

    return IndexReport(
        m_hc=m_hc,
        per_variant=per_variant,
        kappa=kappa,
        rank_trace=scans[IndexVariant.K_ANTI].rank_trace,
        hypocoercive_spectral=hypocoercive_spectral,
        spectrum=spectrum,
        low_confidence=low_confidence,
    )


def stable_index(
    sys: SemiDissipativeSystem,
    tol_rank: float = DEFAULT_TOL_RANK,
    tol_psd: float = DEFAULT_TOL_PSD,
    widen: float = 100.0,
) -> float | None:
    """Index value if it is insensitive to the tolerance choice, else None.

    The definiteness chains are Grams of the Kalman blocks, so a rank test at
    relative tolerance s on singular values corresponds to a definiteness
    test at s^2 on eigenvalues. The default tolerances (tol_rank on sigma,
    tol_psd on lambda) therefore probe different effective scales, and an
    instance whose critical sigma-ratio falls between them makes the eight
    variants legitimately disagree. This helper widens the ambiguous band by
    ``widen`` on both sides and recomputes at the two extremes; a value is
    returned only when every decision lands outside the widened band, i.e.
    the same index would be found for any tolerance choice in between.

    Only decision thresholds are swept; input validation and the sqrt(B_H)
    clamping stay at the caller's tol_psd, since those express float slack
    rather than a rank judgement.
    """
    require_semi_dissipative(sys, tol_psd)
    cap = sys.n - 1
    # Probe thresholds are floored at ~100x machine epsilon: below that the
    # measured quantities are solver noise and a stricter probe would reject
    # systems whose default-tolerance decisions are perfectly stable.
    sigma_floor, lambda_floor = 1e-14, 1e-13
    sigma_lo = max(tol_rank / widen, sigma_floor)
    sigma_hi = max(math.sqrt(tol_psd), tol_rank) * widen

    probes = ((sigma_lo, max(sigma_lo**2, lambda_floor)), (sigma_hi, sigma_hi**2))
    values = []
    for sigma, lam in probes:
        per = []
        for variant in IndexVariant:
            if variant.is_definiteness:
                scan = _definiteness_scan(sys, variant, lam, cap, clamp_tol=tol_psd)
            else:
                scan = _rank_scan(sys, variant, sigma, tol_psd, cap)
            per.append(scan.index)
        if len(set(per)) != 1:
            return None
        values.append(per[0])
    if values[0] != values[1]:
        return None
    m = values[0]

    min_re = float(general_eigenvalues(sys.matrix).real.min())
    nrm = spectral_norm(sys.matrix)
    for sigma in (sigma_lo, sigma_hi):
        if (m != INFINITE) != (min_re > _effective_tol(sigma, nrm)):
            return None
    return m


@dataclass
class BorderCriterion:
    """Two-sided test for an infinite index (purely oscillatory directions)."""

    agrees: bool
    kernel_side: bool
    spectral_side: bool


def verify_border_criterion(sys: SemiDissipativeSystem, tol: float = 1e-8) -> BorderCriterion:
    """Check: some B_A eigenspace meets ker(B_H)  <=>  some Re(lambda(B)) = 0.

    Eigenspaces of B_A are handled as a whole (via i*B_A, which is Hermitian),
    so degenerate eigenvalues cannot hide a kernel direction that no single
    returned eigenvector exposes.
    """
    require_semi_dissipative(sys)
    B_H = sys.hermitian_part
    w, V = np.linalg.eigh(1j * sys.anti_part)
    gap = _effective_tol(1e-8, float(abs(w).max())) if w.size else 0.0

    tol_k = _effective_tol(tol, spectral_norm(B_H))
    kernel_side = False
    start = 0
    for stop in range(1, len(w) + 1):
        if stop == len(w) or w[stop] - w[stop - 1] > gap:
            block = B_H @ V[:, start:stop]
            sigma = np.linalg.svd(block, compute_uv=False)
            if float(sigma[-1]) <= tol_k:
                kernel_side = True
            start = stop

    spectrum = general_eigenvalues(sys.matrix)
    tol_s = _effective_tol(tol, spectral_norm(sys.matrix))
    spectral_side = bool(np.any(np.abs(spectrum.real) <= tol_s))
    return BorderCriterion(kernel_side == spectral_side, kernel_side, spectral_side)


def index_of_matrix(B, tol_rank: float = DEFAULT_TOL_RANK, tol_psd: float = DEFAULT_TOL_PSD) -> float:
    """Convenience wrapper: split, compute, and return just the index value."""
    return compute_index(hermitian_split(B), tol_rank=tol_rank, tol_psd=tol_psd).m_hc
