"""Propagator norm ||e^{-Bt}||_2: curves, waiting times, exponential tails.

For a semi-dissipative system the norm starts at exactly 1, never exceeds 1,
and is non-increasing (submultiplicativity plus ||e^{-Bs}|| <= 1). Raw values
are never clamped; the invariants are enforced as checks with explicit slack
so that genuine violations surface as errors instead of being hidden.
"""

import hashlib
import math
from dataclasses import dataclass

import numpy as np

from .errors import InsufficientDataError, MonotonicityError, ValidationError
from .linalg import SemiDissipativeSystem, matrix_exponential, spectral_norm

MONOTONE_SLACK = 1e-10
UNIT_SLACK = 1e-12
WAITING_THRESHOLD = 1.0 / math.e


@dataclass
class TimeGrid:
    points: np.ndarray
    spacing: str  # "linear" | "log"
    t_min: float
    t_max: float


def linear_grid(t_max: float, points: int = 400, t_min: float = 0.0) -> TimeGrid:
    if points < 2:
        raise ValidationError("grid needs at least 2 points")
    if not (0.0 <= t_min < t_max) or not math.isfinite(t_max):
        raise ValidationError(f"bad time range [{t_min}, {t_max}]")
    return TimeGrid(np.linspace(t_min, t_max, points), "linear", t_min, t_max)


def log_grid(t_min: float, t_max: float, points: int = 400) -> TimeGrid:
    if points < 2:
        raise ValidationError("grid needs at least 2 points")
    if not (0.0 < t_min < t_max) or not math.isfinite(t_max):
        raise ValidationError(f"log grid needs 0 < t_min < t_max, got [{t_min}, {t_max}]")
    return TimeGrid(np.geomspace(t_min, t_max, points), "log", t_min, t_max)


def system_fingerprint(sys: SemiDissipativeSystem) -> str:
    """Short content hash of the system matrix (entry bytes, fixed layout)."""
    B = np.ascontiguousarray(sys.matrix, dtype=np.complex128)
    digest = hashlib.sha256(f"{B.shape[0]}:".encode() + B.tobytes())
    return digest.hexdigest()[:16]


@dataclass
class DecayCurve:
    grid: TimeGrid
    norms: np.ndarray
    system_fingerprint: str


def propagator_norm_at(sys: SemiDissipativeSystem, t: float) -> float:
    if t < 0:
        raise ValidationError(f"time must be >= 0, got {t}")
    return spectral_norm(matrix_exponential(-sys.matrix * t))


def decay_curve(sys: SemiDissipativeSystem, grid: TimeGrid) -> DecayCurve:
    """Sample the propagator norm on the grid, checking monotonicity bounds."""
    norms = np.array([propagator_norm_at(sys, t) for t in grid.points])
    if float(norms.max()) > 1.0 + UNIT_SLACK:
        raise MonotonicityError(f"norm {norms.max():.17g} exceeds 1 beyond slack")
    rises = np.diff(norms)
    if rises.size and float(rises.max()) > MONOTONE_SLACK:
        i = int(np.argmax(rises))
        raise MonotonicityError(
            f"norm increases by {rises.max():.3e} between t={grid.points[i]:.6g} "
            f"and t={grid.points[i + 1]:.6g}"
        )
    return DecayCurve(grid, norms, system_fingerprint(sys))


@dataclass
class WaitingTimeResult:
    """First time the norm reaches the 1/e threshold, if within the horizon."""

    t0: float | None
    reached: bool
    last_bracket: tuple[float, float]


def default_horizon(sys: SemiDissipativeSystem) -> float:
    lam = np.linalg.eigvals(sys.matrix)
    min_re = float(lam.real.min())
    if min_re > 1e-300:
        return max(100.0, 100.0 / min_re)
    return 100.0


def waiting_time(
    sys: SemiDissipativeSystem,
    tol_t: float = 1e-9,
    horizon: float | None = None,
    threshold: float = WAITING_THRESHOLD,
) -> WaitingTimeResult:
    """Locate the threshold crossing by doubling bracket plus bisection.

    The norm is non-increasing, so the crossing is unique; NOT_REACHED (with
    the last bracket examined) is reported when the horizon is exhausted.
    """
    if horizon is None:
        horizon = default_horizon(sys)
    lo, hi = 0.0, 1.0
    while propagator_norm_at(sys, hi) > threshold:
        lo = hi
        hi *= 2.0
        if hi > horizon:
            return WaitingTimeResult(None, False, (lo, hi))
    while hi - lo > tol_t * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if propagator_norm_at(sys, mid) > threshold:
            lo = mid
        else:
            hi = mid
    return WaitingTimeResult(0.5 * (lo + hi), True, (lo, hi))


@dataclass
class TailFit:
    """Exponential tail model norm(t) ~ c_star * exp(-mu * t)."""

    mu: float
    c_star: float
    window: tuple[float, float]
    residual: float


def tail_fit(curve: DecayCurve, window: tuple[float, float] | None = None) -> TailFit:
    """Least squares on (t, log norm) over a time window.

    Default window: the sampled region at or below the 1/e threshold, where
    the decay is tail-dominated. Residual is the largest log-space deviation
    relative to max(1, |log norm|) at that sample.
    """
    t = curve.grid.points
    norms = curve.norms
    if window is None:
        mask = norms <= WAITING_THRESHOLD
    else:
        lo, hi = window
        mask = (t >= lo) & (t <= hi)
    mask &= norms > 0.0
    if int(mask.sum()) < 3:
        raise InsufficientDataError("tail fit needs at least 3 usable samples")
    tw, logn = t[mask], np.log(norms[mask])
    slope, intercept = np.polyfit(tw, logn, 1)
    pred = intercept + slope * tw
    residual = float(np.max(np.abs(logn - pred) / np.maximum(1.0, np.abs(logn))))
    return TailFit(
        mu=float(-slope),
        c_star=float(np.exp(intercept)),
        window=(float(tw[0]), float(tw[-1])),
        residual=residual,
    )
