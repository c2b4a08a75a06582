"""Series identities behind the short-time decay law, checked numerically.

Three groups of machinery:

* the coefficients of Q(t) = e^{-B*t} e^{-Bt} = sum t^j/j! U_j, with the two
  equivalent closed forms of U_j and the growth bound ||U_j|| <= (2||B||)^j,
* the weighted sum-of-squares rearrangement of the double series sum_{j,k}
  t^j/j! C(j-1,k) U^k V W^{j-k-1}, whose correction weights Delta stay in
  (0, 1] and whose diagonal value Delta^{(m)}_{2m+1,m} = C(2m,m)^{-2} is what
  produces the decay-law prefactor,
* the trajectory family x_tau = x0 + sum b_l tau^l B^l x0 whose norm deficit
  realizes the decay law with the same constant (sharpness witness).

Rational coefficients are exact (fractions.Fraction); matrices are float.
"""

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import (
    FailedOrderError,
    InsufficientDataError,
    NoExpansionError,
    NotInKernelError,
    ValidationError,
)
from .extrap import default_t_start, richardson_leading_coefficient, solution_norm_deficit
from .index import INFINITE, compute_index
from .linalg import (
    DEFAULT_TOL_PSD,
    DEFAULT_TOL_RANK,
    SemiDissipativeSystem,
    as_complex_matrix,
    matrix_exponential,
    spectral_norm,
)
from .propagator import propagator_norm_at
from .shorttime import decay_prefactor, kernel_minimizer

MARGIN_FLOOR = 1e-12
RESOLVABLE_DROP = 1e-11


def delta_coefficient(m: int, j: int, k: int) -> Fraction:
    """Delta^{(m)}_{j,k} = C(k,m) C(j-k-1,m) / (C(k+m,m) C(j-k-1+m,m)).

    Defined on the triangular domain m <= k and m <= j - k - 1; each factor
    is a ratio of a binomial to a larger one, so the value lies in (0, 1].
    """
    if m < 0 or k < 0 or j < 0:
        raise ValidationError("delta_coefficient needs nonnegative indices")
    if k < m or j - k - 1 < m:
        raise ValidationError(f"(m={m}, j={j}, k={k}) outside the triangular domain")
    i = j - k - 1
    return Fraction(math.comb(k, m) * math.comb(i, m), math.comb(k + m, m) * math.comb(i + m, m))


def u_coefficient(B, j: int) -> np.ndarray:
    """U_j = (-1)^j sum_k C(j,k) (B*)^k B^{j-k} (Taylor coefficient of Q)."""
    B = as_complex_matrix(B)
    if j < 0:
        raise ValidationError("coefficient order must be >= 0")
    Bs = B.conj().T
    n = B.shape[0]
    total = np.zeros((n, n), dtype=np.complex128)
    left = np.eye(n, dtype=np.complex128)
    for k in range(j + 1):
        total += math.comb(j, k) * (left @ np.linalg.matrix_power(B, j - k))
        left = left @ Bs
    return (-1.0) ** j * total


def u_coefficient_factored(sys: SemiDissipativeSystem, j: int) -> np.ndarray:
    """U_j = (-1)^j 2 sum_{k<j} C(j-1,k) (B*)^k B_H B^{j-1-k}, valid for j >= 1.

    Equivalent to u_coefficient because B + B* = 2 B_H telescopes the binomial
    sum; comparing the two is a consistency check on the whole expansion.
    """
    if j < 1:
        raise ValidationError("factored form exists only for j >= 1")
    B, H = sys.matrix, sys.hermitian_part
    Bs = B.conj().T
    n = B.shape[0]
    total = np.zeros((n, n), dtype=np.complex128)
    left = np.eye(n, dtype=np.complex128)
    for k in range(j):
        total += math.comb(j - 1, k) * (left @ H @ np.linalg.matrix_power(B, j - 1 - k))
        left = left @ Bs
    return (-1.0) ** j * 2.0 * total


def u_norm_bound(B, j: int) -> tuple[float, float]:
    """(||U_j||_2, (2 ||B||_2)^j), the observed value and its growth bound."""
    return spectral_norm(u_coefficient(B, j)), (2.0 * spectral_norm(B)) ** j


class _MonomialCache:
    """Cached products U^p V W^q for the identity comparison."""

    def __init__(self, U, V, W, max_power: int):
        U = as_complex_matrix(U)
        V = as_complex_matrix(V)
        W = as_complex_matrix(W)
        self.V = V
        self.Upow = [np.eye(U.shape[0], dtype=np.complex128)]
        self.Wpow = [np.eye(U.shape[0], dtype=np.complex128)]
        for _ in range(max_power):
            self.Upow.append(self.Upow[-1] @ U)
            self.Wpow.append(self.Wpow[-1] @ W)
        self._cache: dict[tuple[int, int], np.ndarray] = {}

    def term(self, p: int, q: int) -> np.ndarray:
        key = (p, q)
        if key not in self._cache:
            self._cache[key] = self.Upow[p] @ self.V @ self.Wpow[q]
        return self._cache[key]


def _series_coeff(j: int, k: int) -> Fraction:
    # weight of t^k U^{k+j} inside the order-j bracket series
    return Fraction(math.factorial(2 * j + 1), math.factorial(k + 2 * j + 1)) * math.comb(k + j, j)


def _lhs_coefficient(cache: _MonomialCache, d: int) -> np.ndarray:
    total = np.zeros_like(cache.V)
    for k in range(d):
        total = total + math.comb(d - 1, k) * cache.term(k, d - 1 - k)
    return np.asarray(total * float(Fraction(1, math.factorial(d))))


def _rhs_coefficient(cache: _MonomialCache, d: int, m: int) -> np.ndarray:
    total = np.zeros_like(cache.V)
    for j in range(m + 1):
        rem = d - (2 * j + 1)
        if rem < 0:
            continue
        lead = Fraction(1, math.factorial(2 * j + 1) * math.comb(2 * j, j))
        for k in range(rem + 1):
            ell = rem - k
            scalar = lead * _series_coeff(j, k) * _series_coeff(j, ell)
            total = total + float(scalar) * cache.term(k + j, ell + j)
    if d >= 2 * m + 3:
        for k in range(m + 1, d - m - 1):
            scalar = Fraction(math.comb(d - 1, k), math.factorial(d)) * delta_coefficient(
                m + 1, d, k
            )
            total = total + float(scalar) * cache.term(k, d - 1 - k)
    return np.asarray(total)


def sum_of_squares_residual(
    U,
    V,
    W,
    m: int,
    degree: int | None = None,
    mode: str = "polynomial",
    t: float = 0.25,
) -> float:
    """Relative residual of the sum-of-squares series rearrangement at level m.

    In polynomial mode the two sides are compared coefficient by coefficient
    for every power of t up to ``degree`` (default 2m + 6); each degree is
    complete on both sides, so the residual measures only float round-off.
    In sampled mode both truncations are evaluated at the given t instead.
    """
    if m < 0:
        raise ValidationError("level m must be >= 0")
    if degree is None:
        degree = 2 * m + 6
    if degree < 1:
        raise ValidationError("truncation degree must be >= 1")
    cache = _MonomialCache(U, V, W, degree)
    if mode == "polynomial":
        worst = 0.0
        scale = 0.0
        for d in range(1, degree + 1):
            L = _lhs_coefficient(cache, d)
            R = _rhs_coefficient(cache, d, m)
            worst = max(worst, spectral_norm(L - R))
            scale = max(scale, spectral_norm(L), spectral_norm(R))
        return worst / scale if scale > 0.0 else worst
    if mode == "sampled":
        L = np.zeros_like(cache.V)
        R = np.zeros_like(cache.V)
        for d in range(1, degree + 1):
            L = L + t**d * _lhs_coefficient(cache, d)
            R = R + t**d * _rhs_coefficient(cache, d, m)
        scale = max(spectral_norm(L), spectral_norm(R))
        diff = spectral_norm(L - R)
        return diff / scale if scale > 0.0 else diff
    raise ValidationError(f"unknown mode {mode!r}")


def tau_coefficients(m: int) -> tuple[Fraction, ...]:
    """Exact trajectory coefficients (b_1, ..., b_m) for the level-m family.

    b_1 = 1/2 for every m; the rest follow the triangular recursion that
    cancels all deficit orders below tau^{2m+1}. The values depend on m
    (for example b_2 = 1/12 at m = 2 but 1/10 at m = 3).
    """
    if m < 0:
        raise ValidationError("family level must be >= 0")
    b = [Fraction(1)]
    for ell in range(1, m + 1):
        acc = Fraction(0)
        base = math.factorial(2 * m - 2 * ell + 1)
        for k in range(1, ell + 1):
            acc += (
                Fraction(base, math.factorial(k + 2 * m - 2 * ell + 1))
                * math.comb(k + m - ell, m - ell)
                * b[ell - k]
                * (-1) ** (ell - k)
            )
        b.append(-((-1) ** ell) * acc)
    return tuple(b[1:])


@dataclass
class TauFamily:
    """Trajectory family x_tau = x0 + sum_l b_l tau^l B^l x0 (unnormalized).

    c1_x0 is the predicted half-coefficient: the squared-norm deficit of the
    family satisfies -g(x_tau; tau) = 2 c1_x0 tau^{2m+1} + O(tau^{2m+2}).
    """

    m: int
    b: tuple[Fraction, ...]
    x0: np.ndarray
    c1_x0: float


def build_tau_family(
    sys: SemiDissipativeSystem,
    x0=None,
    report=None,
    tol_rank: float = DEFAULT_TOL_RANK,
    tol_psd: float = DEFAULT_TOL_PSD,
    kernel_tol: float = 1e-8,
) -> TauFamily:
    """Family at the system's own index; x0 defaults to the kernel minimizer."""
    if report is None:
        report = compute_index(sys, tol_rank, tol_psd)
    if report.m_hc == INFINITE:
        raise NoExpansionError("infinite index: no decay law to witness")
    m = int(report.m_hc)
    if x0 is None:
        if m == 0:
            w, V = np.linalg.eigh(sys.hermitian_part)
            x0 = V[:, 0]
        else:
            _, x0 = kernel_minimizer(sys, m, tol_rank, tol_psd)
    x0 = np.asarray(x0, dtype=np.complex128)
    x0 = x0 / np.linalg.norm(x0)
    R = sys.sqrt_hermitian_part(tol_psd)
    v = x0.copy()
    for j in range(m):
        if np.linalg.norm(R @ v) > kernel_tol * max(1.0, np.linalg.norm(v)):
            raise NotInKernelError(f"sqrt(B_H) B^{j} x0 != 0; x0 outside the order-{m} kernel")
        v = sys.matrix @ v
    form = float(np.real(np.vdot(v, R @ (R @ v))))  # ||sqrt(B_H) B^m x0||^2
    return TauFamily(m, tau_coefficients(m), x0, float(decay_prefactor(m)) * form)


def tau_vector(sys: SemiDissipativeSystem, fam: TauFamily, tau: float) -> np.ndarray:
    x = fam.x0.astype(np.complex128, copy=True)
    v = fam.x0
    for ell, b in enumerate(fam.b, start=1):
        v = sys.matrix @ v
        x = x + float(b) * tau**ell * v
    return x


def g_function(sys: SemiDissipativeSystem, x, t: float) -> float:
    """g(x; t) = ||e^{-Bt} x||^2 - ||x||^2, evaluated via the exponential."""
    x = np.asarray(x, dtype=np.complex128)
    y = matrix_exponential(-sys.matrix * t) @ x
    return float(np.real(np.vdot(y, y)) - np.real(np.vdot(x, x)))


def verify_family_order(
    sys: SemiDissipativeSystem,
    fam: TauFamily,
    t_start: float | None = None,
    nodes: int = 48,
    rtol: float = 0.01,
) -> float:
    """Extract the tau^{2m+1} coefficient of -g(x_tau; tau) and check it.

    The observed coefficient must match 2 * c1_x0 within ``rtol``; a mismatch
    raises FailedOrderError since it means the family construction (the b_l)
    or the predicted constant is wrong.
    """
    if t_start is None:
        t_start = default_t_start(sys)
    power = 2 * fam.m + 1

    def deficit(tau: float) -> float:
        return solution_norm_deficit(sys, tau_vector(sys, fam, tau), tau, nodes)

    observed = richardson_leading_coefficient(deficit, power, t_start)
    expected = 2.0 * fam.c1_x0
    if abs(observed - expected) > rtol * max(abs(expected), 1e-300):
        raise FailedOrderError(
            f"family deficit coefficient {observed:.6e} vs predicted {expected:.6e}"
        )
    return observed


@dataclass
class SandwichReport:
    """Margins ||e^{-Bt}|| - (1 - c t^a) and their t^{a+1} ratios."""

    times: np.ndarray
    margins: np.ndarray
    ratio_times: np.ndarray
    ratios: np.ndarray
    next_order_constant: float
    min_margin: float


def verify_sandwich(
    sys: SemiDissipativeSystem,
    law,
    t_max: float = 1.0,
    samples: int = 33,
    octaves: int = 10,
) -> SandwichReport:
    """Check 1 - c t^a <= ||e^{-Bt}|| <= 1 - c t^a + O(t^{a+1}) on (0, t_max].

    ``law`` is (a, c, ...) as produced by theoretical_coefficient. Ratios
    margin / t^{a+1} are formed only where the predicted drop c t^a exceeds
    the float cancellation floor; they must stay bounded as t decreases
    (no systematic growth), else FailedOrderError. The median small-t ratio
    estimates the next-order constant.
    """
    a, c = int(law[0]), float(law[1])
    if t_max <= 0.0:
        raise ValidationError("t_max must be positive")
    times = np.geomspace(t_max * 2.0 ** (-octaves), t_max, samples)
    margins = np.array([propagator_norm_at(sys, t) - (1.0 - c * t**a) for t in times])
    min_margin = float(margins.min())
    if min_margin < -1e-10:
        raise FailedOrderError(f"lower sandwich bound violated: margin {min_margin:.3e}")

    usable = (c * times**a >= RESOLVABLE_DROP) & (np.abs(margins) >= MARGIN_FLOOR)
    if int(usable.sum()) < 5:
        raise InsufficientDataError("too few samples above the cancellation floor")
    rt = times[usable]
    ratios = margins[usable] / rt ** (a + 1)
    half = ratios.size // 2
    small_t, large_t = ratios[:half], ratios[half:]
    reference = float(np.median(np.abs(large_t)))
    if float(np.max(np.abs(small_t))) > max(50.0 * reference, 1e-9):
        raise FailedOrderError(
            "margin / t^(a+1) grows toward t = 0; remainder is not O(t^(a+1))"
        )
    return SandwichReport(
        times=times,
        margins=margins,
        ratio_times=rt,
        ratios=ratios,
        next_order_constant=float(np.median(small_t)),
        min_margin=min_margin,
    )
