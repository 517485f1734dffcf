"""Brute-force geodesic lengths in ``T(t)^2 dx^2 + dt^2`` via the Clairaut integral.

A geodesic joining two points of the horosphere ``t = 0`` at horizontal
separation ``D`` climbs to an apex ``t_m`` where ``T(t_m) = c`` and comes back.
With ``q = c/T(t)``,

    D      = 2 int_0^{t_m} (c/T^2) / sqrt(1 - q^2) dt
    length = 2 int_0^{t_m} 1 / sqrt(1 - q^2) dt

The square-root singularity at the apex disappears under a quadratic
substitution in the coordinate where ``ln T`` is linear.
"""
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from . import kernels
from .errors import AccuracyError, DomainError, GeometryError
from .profiles import height_log
from .quadrature import integrate

ABS_TOL = 1e-9
REL_TOL = 1e-12
MAX_PANELS = 10_000


@dataclass(frozen=True)
class GeodesicSolution:
    D: float
    clairaut_c: float
    apex_t: float
    length: float
    width: float  # horizontal extent actually reached, equals D to root tolerance


def _pieces(metric, lam):
    """Integrands for width and length, each as a list of (f, lo, hi) pieces.

    ``lam = -ln c``.  Inside the stripe ``t <= a`` the metric is hyperbolic;
    above it the profile coordinate ``sigma`` (with ``t = a + V(sigma)`` and
    ``ln T = -a - sigma``) is used, so ``ln(c/T)`` is always exact.
    """
    code, alpha, eps, a = metric.params
    pieces = []

    def stripe(base):
        # t = base - w^2 covering the stripe part; ln(c/T) = -w^2
        def width(w):
            t = base - w * w
            return 4.0 * w * np.exp(2.0 * t - lam) / np.sqrt(-np.expm1(-2.0 * w * w))

        def length(w):
            return 4.0 * w / np.sqrt(-np.expm1(-2.0 * w * w))
        return width, length

    if lam <= a or code == kernels.PURE_LOG:
        t_m = lam
        width, length = stripe(t_m)
        pieces.append((width, length, 0.0, math.sqrt(t_m)))
        return pieces

    sig_m = lam - a

    def width_up(tau):
        sig = sig_m - tau * tau
        Vs = kernels.profile_eval_array(code, alpha, eps, sig)[1]
        return (4.0 * tau * Vs * np.exp(a + 2.0 * sig - sig_m)
                / np.sqrt(-np.expm1(-2.0 * tau * tau)))

    def length_up(tau):
        sig = sig_m - tau * tau
        Vs = kernels.profile_eval_array(code, alpha, eps, sig)[1]
        return 4.0 * tau * Vs / np.sqrt(-np.expm1(-2.0 * tau * tau))

    top = math.sqrt(sig_m)
    if code == kernels.LEMMA22 and sig_m > 1.0:
        knot = math.sqrt(sig_m - 1.0)
        pieces.append((width_up, length_up, 0.0, knot))
        pieces.append((width_up, length_up, knot, top))
    else:
        pieces.append((width_up, length_up, 0.0, top))
    if a > 0.0:
        width, length = stripe(a + sig_m)
        pieces.append((width, length, top, math.sqrt(a + sig_m)))
    return pieces


def _measure(metric, lam, which):
    if lam <= 0.0:
        return 0.0
    total = 0.0
    for width, length, lo, hi in _pieces(metric, lam):
        f = width if which == "width" else length
        total += integrate(f, lo, hi, ABS_TOL, REL_TOL, MAX_PANELS).value
    return total


def horizontal_width(metric, lam):
    """Horizontal separation spanned by the geodesic with ``-ln c = lam``."""
    return _measure(metric, lam, "width")


def arc_length(metric, lam):
    return _measure(metric, lam, "length")


def apex_height(metric, lam):
    if lam <= metric.a:
        return lam
    return metric.a + kernels.profile_eval(*metric.profile.params, lam - metric.a)[0]


def clairaut_distance(metric, D, lam_max=700.0):
    """Geodesic joining ``(0, 0)`` and ``(D, 0)``, found by shooting on ``c``."""
    D = float(D)
    if not (D > 0.0 and math.isfinite(D)):
        raise DomainError("D must be positive and finite")
    if kernels.profile_eval(*metric.profile.params, 0.0)[0] != 0.0:
        raise GeometryError("T is discontinuous at the stripe boundary; "
                            "the Clairaut integral does not apply")
    lo, hi = 0.0, max(1.0, math.log(D) + 2.0)
    while horizontal_width(metric, hi) < D:
        lo, hi = hi, 2.0 * hi
        if hi > lam_max:
            raise GeometryError(f"Clairaut constant for D={D} not bracketed")
    try:
        lam = brentq(lambda x: horizontal_width(metric, x) - D, lo, hi,
                     xtol=1e-15, rtol=4.0 * np.finfo(float).eps, maxiter=200)
    except ValueError as exc:
        raise GeometryError(str(exc)) from exc
    w = horizontal_width(metric, lam)
    if abs(w - D) > 1e-10 * max(1.0, D):
        raise AccuracyError(f"shooting reached width {w!r} for target {D!r}")
    return GeodesicSolution(D, math.exp(-lam), apex_height(metric, lam),
                            arc_length(metric, lam), w)


@dataclass(frozen=True)
class DeviationTable:
    D: np.ndarray
    length: np.ndarray
    model: np.ndarray
    deviation: np.ndarray

    def max_abs_deviation(self, lo=-math.inf, hi=math.inf):
        mask = (self.D >= lo) & (self.D <= hi)
        if not mask.any():
            raise DomainError(f"no grid point in [{lo}, {hi}]")
        return float(np.max(np.abs(self.deviation[mask])))

    @property
    def max_dev(self):
        return float(np.max(np.abs(self.deviation)))

    @property
    def growth_ratio(self):
        """Max deviation over the upper half of the grid divided by the lower half's."""
        n = len(self.D) // 2
        low = np.max(np.abs(self.deviation[:max(n, 1)]))
        high = np.max(np.abs(self.deviation[n:]))
        return float(high / low) if low > 0 else math.inf

    def bounded(self, slack=0.10):
        """Empirical boundedness: the upper half does not outgrow the lower half."""
        return self.growth_ratio <= 1.0 + slack

    def summary(self):
        return {"max_dev": self.max_dev, "growth_ratio": self.growth_ratio}


def deviation_scan(metric, D_grid):
    """Compare the oracle length with the model distance ``2 height(D)``."""
    D = np.asarray(D_grid, dtype=float)
    if D.ndim != 1 or D.size == 0:
        raise DomainError("D grid must be a nonempty 1-d sequence")
    if np.any(np.diff(D) <= 0):
        raise DomainError("D grid must be increasing")
    lengths = np.array([clairaut_distance(metric, d).length for d in D])
    model = np.array([2.0 * height_log(metric, math.log(d)) for d in D])
    return DeviationTable(D, lengths, model, lengths - model)
