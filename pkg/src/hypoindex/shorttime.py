"""Short-time decay law of the propagator norm.

For a hypocoercive semi-dissipative system with index m the norm obeys
||e^{-Bt}||_2 = 1 - c t^a + O(t^{a+1}) with odd exponent a = 2m + 1 and

    c = 1 / ((2m+1)! C(2m, m)) * min { <x, (B*)^m B_H B^m x> :
            x in ker(T_adjoint(m-1)), ||x|| = 1 }            (m >= 1)
    c = lambda_min(B_H)                                      (m = 0).

The same minimum with B_A in place of B is provably equal (powers of B and
B_A agree on the kernel); both routes are computed and must agree to 1e-9.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from .errors import (
    EmptyKernelError,
    InconsistencyError,
    InsufficientDataError,
    NoExpansionError,
    NotInKernelError,
    ValidationError,
)
from .extrap import default_t_start, richardson_leading_coefficient, solution_norm_deficit
from .index import INFINITE, IndexReport, IndexVariant, compute_index, t_chain
from .linalg import (
    DEFAULT_TOL_PSD,
    DEFAULT_TOL_RANK,
    SemiDissipativeSystem,
    _effective_tol,
    hermitian_split,
    is_anti_hermitian,
    is_hermitian,
    kernel_basis,
)
from .propagator import DecayCurve, decay_curve, log_grid, waiting_time

FIT_VALID_LO = 1e-13
FIT_VALID_HI = 0.1
AUTO_WINDOW_LO = 1e-10
AUTO_WINDOW_HI = 1e-2
AUTO_SLOPE_BAND = 0.05
FIT_WINDOW_RULE = "auto-v1"

CROSS_FORM_RTOL = 1e-9
EPS_SCALING_RTOL = 1e-10


class ShortTimeLaw(NamedTuple):
    """Theoretical leading term: norm ~ 1 - c t^a."""

    a: int
    c: float
    degenerate: bool = False


def decay_prefactor(m: int) -> Fraction:
    """Exact rational 1 / ((2m+1)! * C(2m, m))."""
    return Fraction(1, math.factorial(2 * m + 1) * math.comb(2 * m, m))


def power_form(sys: SemiDissipativeSystem, m: int, anti: bool = False) -> np.ndarray:
    """(M*)^m B_H M^m for M = B (default) or M = B_A."""
    M = sys.anti_part if anti else sys.matrix
    F = sys.hermitian_part
    for _ in range(m):
        F = M.conj().T @ F @ M
    return (F + F.conj().T) / 2.0


def constrained_min(F: np.ndarray, K: np.ndarray) -> tuple[float, np.ndarray]:
    """Minimum of <x, F x> over unit x in the column span of K, with argmin.

    K must have orthonormal columns; the minimum is the smallest eigenvalue
    of the compressed matrix K* F K.
    """
    if K.ndim != 2 or K.shape[1] == 0:
        raise EmptyKernelError("constraint space is trivial")
    gram_defect = np.linalg.norm(K.conj().T @ K - np.eye(K.shape[1]))
    if gram_defect > 1e-10:
        raise ValidationError(f"constraint basis not orthonormal (defect {gram_defect:.3e})")
    G = K.conj().T @ F @ K
    G = (G + G.conj().T) / 2.0
    w, V = np.linalg.eigh(G)
    x = K @ V[:, 0]
    return float(w[0]), x / np.linalg.norm(x)


def adjoint_kernel(
    sys: SemiDissipativeSystem,
    m: int,
    tol_rank: float = DEFAULT_TOL_RANK,
    tol_psd: float = DEFAULT_TOL_PSD,
) -> np.ndarray:
    """Orthonormal basis of ker(T_adjoint(m-1)), the admissible directions."""
    if m < 1:
        raise ValidationError("kernel constraint exists only for m >= 1")
    return kernel_basis(t_chain(sys, IndexVariant.T_ADJOINT, m - 1, tol_psd), tol_rank)


def kernel_minimizer(
    sys: SemiDissipativeSystem,
    m: int,
    tol_rank: float = DEFAULT_TOL_RANK,
    tol_psd: float = DEFAULT_TOL_PSD,
) -> tuple[float, np.ndarray]:
    """Kernel minimum of the order-m form and a unit minimizer, dual-checked.

    The forward-power and anti-power forms agree on the kernel in exact
    arithmetic; a mismatch beyond 1e-9 relative means the index or kernel
    computation is broken, so it raises rather than returning either value.
    """
    K = adjoint_kernel(sys, m, tol_rank, tol_psd)
    if K.shape[1] == 0:
        raise InconsistencyError(
            f"chain at step {m - 1} is not definite but its kernel came back empty"
        )
    val_fwd, x = constrained_min(power_form(sys, m, anti=False), K)
    val_anti, _ = constrained_min(power_form(sys, m, anti=True), K)
    scale = max(abs(val_fwd), abs(val_anti), 1e-300)
    if abs(val_fwd - val_anti) > CROSS_FORM_RTOL * scale:
        raise InconsistencyError(
            f"kernel minimum differs between B-power ({val_fwd:.17g}) and "
            f"B_A-power ({val_anti:.17g}) routes"
        )
    return val_fwd, x


def theoretical_coefficient(
    sys: SemiDissipativeSystem,
    report: IndexReport | None = None,
    tol_rank: float = DEFAULT_TOL_RANK,
    tol_psd: float = DEFAULT_TOL_PSD,
) -> ShortTimeLaw:
    """Exact-prefactor decay law (a, c) for a finite-index system."""
    if report is None:
        report = compute_index(sys, tol_rank, tol_psd)
    m = report.m_hc
    if m == INFINITE:
        raise NoExpansionError("infinite index: no polynomial short-time decay")
    m = int(m)
    if m == 0:
        return ShortTimeLaw(1, sys.psd_margin, False)
    val, _ = kernel_minimizer(sys, m, tol_rank, tol_psd)
    K = adjoint_kernel(sys, m, tol_rank, tol_psd)
    G = K.conj().T @ power_form(sys, m) @ K
    thr = _effective_tol(tol_psd, float(np.abs(np.linalg.eigvalsh(G)).max()))
    if val <= thr:
        return ShortTimeLaw(2 * m + 1, 0.0, True)
    return ShortTimeLaw(2 * m + 1, float(decay_prefactor(m)) * val, False)


def trajectory_prefactor(m: int) -> Fraction:
    """Exact rational 2 C(2m, m) / (2m+1)! from the squared-norm expansion."""
    return Fraction(2 * math.comb(2 * m, m), math.factorial(2 * m + 1))


def predicted_trajectory_coefficient(sys: SemiDissipativeSystem, x0, m: int) -> float:
    """Leading coefficient of 1 - ||e^{-Bt}x0||^2, i.e. of t^{2m+1}."""
    x0 = np.asarray(x0, dtype=np.complex128)
    x0 = x0 / np.linalg.norm(x0)
    form = float(np.real(np.vdot(x0, power_form(sys, m) @ x0)))
    return float(trajectory_prefactor(m)) * form


def solution_norm_expansion_check(
    sys: SemiDissipativeSystem,
    x0,
    report: IndexReport | None = None,
    t_start: float | None = None,
    kernel_tol: float = 1e-8,
    nodes: int = 48,
) -> float:
    """Observed t^{2m+1} coefficient of 1 - ||e^{-Bt}x0||^2.

    x0 must lie in ker(T_adjoint(m-1)) (checked as sqrt(B_H) B^j x0 = 0 for
    j < m); the deficit is sampled through the dissipation identity and the
    coefficient extracted by the Richardson ladder. Compare the result with
    predicted_trajectory_coefficient.
    """
    if report is None:
        report = compute_index(sys)
    if report.m_hc == INFINITE:
        raise NoExpansionError("infinite index: no polynomial short-time decay")
    m = int(report.m_hc)
    x0 = np.asarray(x0, dtype=np.complex128)
    x0 = x0 / np.linalg.norm(x0)
    R = sys.sqrt_hermitian_part()
    v = x0.copy()
    for j in range(m):
        if np.linalg.norm(R @ v) > kernel_tol * max(1.0, np.linalg.norm(v)):
            raise NotInKernelError(
                f"sqrt(B_H) B^{j} x0 is not zero; x0 outside the order-{m} kernel"
            )
        v = sys.matrix @ v
    if t_start is None:
        t_start = default_t_start(sys)
    return richardson_leading_coefficient(
        lambda t: solution_norm_deficit(sys, x0, t, nodes), 2 * m + 1, t_start
    )


@dataclass
class EmpiricalFit:
    a_fit: float
    c_fit: float
    residual: float
    window: tuple[float, float]


def auto_fit_window(curve: DecayCurve) -> tuple[float, float]:
    """Default fit window on a sampled curve.

    Longest contiguous run of grid points whose drop 1 - norm lies in
    [1e-10, 1e-2] and whose local log-log slopes all stay within 5% of the
    run median (rule "auto-v1").
    """
    t = curve.grid.points
    drop = 1.0 - curve.norms
    ok = (t > 0.0) & (drop >= AUTO_WINDOW_LO) & (drop <= AUTO_WINDOW_HI)
    idx = np.flatnonzero(ok)
    if idx.size < 3:
        raise InsufficientDataError("fewer than 3 samples in the auto-window value range")

    best_len = 0
    best: tuple[float, float] | None = None
    # split into runs of consecutive grid indices, scan each for slope stability
    breaks = np.flatnonzero(np.diff(idx) > 1)
    for run in np.split(idx, breaks + 1):
        if run.size < 3:
            continue
        logt = np.log(t[run])
        logd = np.log(drop[run])
        slopes = np.diff(logd) / np.diff(logt)
        for i in range(slopes.size):
            j = i
            while j < slopes.size:
                window = slopes[i : j + 1]
                med = float(np.median(window))
                if float(np.max(np.abs(window - med))) > AUTO_SLOPE_BAND * abs(med):
                    break
                j += 1
            # slopes i..j-1 held, so points run[i]..run[j] form the window
            npts = j - i + 1
            if j - i >= 2 and npts > best_len:
                best_len = npts
                best = (float(t[run[i]]), float(t[run[j]]))
    if best is None:
        raise InsufficientDataError("no slope-stable window found")
    return best


def empirical_fit(curve: DecayCurve, window: tuple[float, float] | None = None) -> EmpiricalFit:
    """Log-log least squares of the drop 1 - norm against t.

    Samples outside (1e-13, 0.1) are excluded as numerically meaningless or
    beyond the leading-order regime regardless of the window.
    """
    if window is None:
        window = auto_fit_window(curve)
    lo, hi = window
    t = curve.grid.points
    drop = 1.0 - curve.norms
    mask = (t >= lo) & (t <= hi) & (drop > FIT_VALID_LO) & (drop < FIT_VALID_HI) & (t > 0.0)
    if int(mask.sum()) < 3:
        raise InsufficientDataError("fit window holds fewer than 3 valid samples")
    logt, logd = np.log(t[mask]), np.log(drop[mask])
    slope, intercept = np.polyfit(logt, logd, 1)
    pred = intercept + slope * logt
    residual = float(np.max(np.abs(logd - pred) / np.maximum(1.0, np.abs(logd))))
    return EmpiricalFit(float(slope), float(np.exp(intercept)), residual, (float(lo), float(hi)))


@dataclass
class ShortTimeResult:
    """Theoretical law plus (optional) empirical fit on a sampled curve."""

    a_theory: int
    c_theory: float
    degenerate: bool
    a_fit: float | None
    c_fit: float | None
    fit_window: tuple[float, float] | None
    fit_residual: float | None


def analyze_short_time(
    sys: SemiDissipativeSystem,
    report: IndexReport | None = None,
    curve: DecayCurve | None = None,
    window: tuple[float, float] | None = None,
    tol_rank: float = DEFAULT_TOL_RANK,
    tol_psd: float = DEFAULT_TOL_PSD,
) -> ShortTimeResult:
    law = theoretical_coefficient(sys, report, tol_rank, tol_psd)
    fit = None
    if curve is not None:
        fit = empirical_fit(curve, window)
    return ShortTimeResult(
        a_theory=law.a,
        c_theory=law.c,
        degenerate=law.degenerate,
        a_fit=None if fit is None else fit.a_fit,
        c_fit=None if fit is None else fit.c_fit,
        fit_window=None if fit is None else fit.window,
        fit_residual=None if fit is None else fit.residual,
    )


def law_fit_grid(law: ShortTimeLaw, points: int = 400):
    """Log grid spanning the drop range [1e-10, 1e-2] predicted by the law."""
    if law.c <= 0.0:
        raise NoExpansionError("degenerate law: no predicted drop range to span")
    t_lo = 0.5 * (AUTO_WINDOW_LO / law.c) ** (1.0 / law.a)
    t_hi = 2.0 * (AUTO_WINDOW_HI / law.c) ** (1.0 / law.a)
    return log_grid(t_lo, t_hi, points)


@dataclass
class EpsilonSweep:
    """Decay-law data for the family B_eps = eps * A + C on a list of eps.

    The index is eps-independent; c scales exactly as eps^{2m} * c_tilde and
    the waiting time roughly as eps^{-2}.
    """

    eps_values: tuple[float, ...]
    m_hc: int
    a: int
    c_values: tuple[float, ...]
    c_fit_values: tuple[float | None, ...]
    t0_values: tuple[float | None, ...]
    c_tilde: float


def epsilon_sweep(
    A,
    C,
    eps_values,
    tol_rank: float = DEFAULT_TOL_RANK,
    tol_psd: float = DEFAULT_TOL_PSD,
    points: int = 400,
    with_fit: bool = True,
    with_waiting: bool = True,
    horizon: float | None = None,
) -> EpsilonSweep:
    A = np.asarray(A, dtype=np.complex128)
    C = np.asarray(C, dtype=np.complex128)
    if A.shape != C.shape or A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValidationError(f"split shapes do not match: {A.shape} vs {C.shape}")
    if not is_anti_hermitian(A):
        raise ValidationError("A is not anti-Hermitian within tolerance")
    if not is_hermitian(C):
        raise ValidationError("C is not Hermitian within tolerance")
    eps_values = tuple(float(e) for e in eps_values)
    if not eps_values:
        raise ValidationError("empty eps list")
    if any(e == 0.0 or not math.isfinite(e) for e in eps_values):
        raise ValidationError("eps values must be finite and nonzero")

    laws, m_values = [], []
    for eps in eps_values:
        sys_eps = hermitian_split(eps * A + C)
        report = compute_index(sys_eps, tol_rank, tol_psd)
        if report.m_hc == INFINITE:
            raise NoExpansionError(f"member eps={eps} has infinite index")
        m_values.append(int(report.m_hc))
        laws.append((sys_eps, report, theoretical_coefficient(sys_eps, report, tol_rank, tol_psd)))
    if len(set(m_values)) != 1:
        raise InconsistencyError(f"index varies across the family: {m_values}")
    m = m_values[0]
    a = 2 * m + 1

    # the law at eps = 1 anchors the exact scaling identity c_eps = eps^{2m} c_1
    ref_law = theoretical_coefficient(hermitian_split(A + C), None, tol_rank, tol_psd)
    c_values = []
    for eps, (_, _, law) in zip(eps_values, laws):
        c_values.append(law.c)
        expected = ref_law.c * eps ** (2 * m)
        scale = max(abs(law.c), abs(expected), 1e-300)
        if abs(law.c - expected) > EPS_SCALING_RTOL * scale:
            raise InconsistencyError(
                f"c(eps={eps}) = {law.c:.17g} breaks the exact eps^{2 * m} scaling "
                f"(expected {expected:.17g})"
            )

    positive = [c for c in c_values if c > 0.0]
    if positive:
        logs = [math.log(c) - 2 * m * math.log(abs(e)) for c, e in zip(c_values, eps_values) if c > 0.0]
        c_tilde = math.exp(sum(logs) / len(logs))
    else:
        c_tilde = 0.0

    c_fits: list[float | None] = []
    t0s: list[float | None] = []
    for (sys_eps, report, law), eps in zip(laws, eps_values):
        fit_value = None
        if with_fit and law.c > 0.0:
            curve = decay_curve(sys_eps, law_fit_grid(law, points))
            fit_value = empirical_fit(curve).c_fit
        c_fits.append(fit_value)
        if with_waiting:
            wt = waiting_time(sys_eps, horizon=horizon)
            t0s.append(wt.t0 if wt.reached else None)
        else:
            t0s.append(None)

    return EpsilonSweep(
        eps_values=eps_values,
        m_hc=m,
        a=a,
        c_values=tuple(c_values),
        c_fit_values=tuple(c_fits),
        t0_values=tuple(t0s),
        c_tilde=c_tilde,
    )
