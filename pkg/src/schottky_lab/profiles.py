"""Height profiles u, the cusp coefficient T_{a,u}, and curvature.

Everything is evaluated in the logarithmic coordinate ``sigma = ln s`` so that
arguments as large as ``s = e^400`` stay representable.  Internally a profile
is the function ``V(sigma) = u(e^sigma)``.
"""
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import CalibrationError, DegenerateProfileError, DomainError, RangeError

VARIANTS = {"pure_log": kernels.PURE_LOG, "lemma22": kernels.LEMMA22,
            "remark24": kernels.REMARK24}

GRID_SIGMA_MIN = 1.0
GRID_SIGMA_MAX = 400.0
GRID_POINTS = 4000
EPSILON_FLOOR = 2.0 ** -20


def verification_grid(points=GRID_POINTS, lo=GRID_SIGMA_MIN, hi=GRID_SIGMA_MAX):
    return np.geomspace(lo, hi, points)


@dataclass(frozen=True)
class UProfile:
    """A height profile u.

    ``lemma22`` is ``ln s + phi(eps ln ln s) ln ln s`` for ``s >= e`` and
    ``ln s`` below, with ``phi`` the quintic smoothstep scaled to ``[0, alpha]``.
    ``remark24`` has ``u^{-1}(t) = exp(t/2 - sqrt t)`` for ``s >= 1``, extended
    linearly in ``ln s`` below 1.
    """
    variant: str = "pure_log"
    alpha: float = 0.0
    epsilon0: float = 1.0
    kappa: float = 0.9

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise DomainError(f"unknown profile variant {self.variant!r}")
        if not (self.alpha >= 0.0 and math.isfinite(self.alpha)):
            raise DomainError("alpha must be finite and nonnegative")
        if not (self.epsilon0 > 0.0 and math.isfinite(self.epsilon0)):
            raise DomainError("epsilon0 must be positive")
        if not 0.0 < self.kappa <= 1.0:
            raise DomainError("kappa must lie in ]0, 1]")

    @classmethod
    def pure_log(cls, kappa=0.9):
        return cls("pure_log", 0.0, 1.0, kappa)

    @classmethod
    def lemma22(cls, alpha, kappa=0.9, epsilon0=None):
        """Ramp profile; ``epsilon0`` defaults to the calibrated value."""
        if epsilon0 is None:
            epsilon0 = calibrate_epsilon(alpha, kappa).epsilon0
        return cls("lemma22", float(alpha), float(epsilon0), kappa)

    @classmethod
    def remark24(cls, kappa=0.15):
        return cls("remark24", 0.0, 1.0, kappa)

    @property
    def code(self):
        return VARIANTS[self.variant]

    @property
    def params(self):
        """Flat ``(code, alpha, eps)`` triple consumed by the kernels."""
        return self.code, self.alpha, self.epsilon0

    @property
    def log_s_alpha(self):
        """``ln s_alpha = exp(1/eps)``: beyond it the ramp is saturated."""
        if self.variant != "lemma22":
            return 1.0
        return math.exp(1.0 / self.epsilon0) if self.epsilon0 > 1.0 / 700 else math.inf

    def bump(self, x):
        """The ramp phi and its first two derivatives at ``x``."""
        S, S1, S2 = kernels.smoothstep(float(x))
        return self.alpha * S, self.alpha * S1, self.alpha * S2

    def as_dict(self):
        return {"variant": self.variant, "alpha": self.alpha,
                "epsilon0": self.epsilon0, "kappa": self.kappa}


@dataclass(frozen=True)
class CuspMetric:
    """The warped metric ``T_{a,u}(t)^2 dx^2 + dt^2``."""
    a: float
    profile: UProfile

    def __post_init__(self):
        if not (self.a >= 0.0 and math.isfinite(self.a)):
            raise DomainError("a must be finite and nonnegative")

    @classmethod
    def hyperbolic(cls, a=0.0):
        return cls(a, UProfile.pure_log())

    @property
    def params(self):
        code, alpha, eps = self.profile.params
        return code, alpha, eps, self.a

    def with_a(self, a):
        return CuspMetric(a, self.profile)


def _check_sigma(sigma):
    if not math.isfinite(sigma):
        raise DomainError(f"sigma must be finite, got {sigma}")


def eval_log(profile, sigma):
    """``(V, dV/dsigma, d2V/dsigma2)`` with ``V(sigma) = u(e^sigma)``."""
    sigma = float(sigma)
    _check_sigma(sigma)
    return kernels.profile_eval(*profile.params, sigma)


def eval_u(profile, sigma):
    """``(u(s), u'(s), u''(s))`` at ``s = e^sigma``."""
    V, Vs, Vss = eval_log(profile, sigma)
    inv_s = math.exp(-sigma)
    return V, Vs * inv_s, (Vss - Vs) * inv_s * inv_s


def curvature(profile, sigma):
    """Radial curvature ``K(u(s)) = -(2u' + s u'')/(s^2 u'^3)``.

    Accepts a scalar or an array of ``sigma`` values.
    """
    if np.ndim(sigma) == 0:
        V, Vs, Vss = eval_log(profile, sigma)
        if Vs <= 0.0:
            raise DegenerateProfileError(f"u' vanishes at sigma={sigma}")
        return -(Vs + Vss) / (Vs * Vs * Vs)
    sigma = np.asarray(sigma, dtype=float)
    if not np.all(np.isfinite(sigma)):
        raise DomainError("sigma must be finite")
    V, Vs, Vss = kernels.profile_eval_array(*profile.params, sigma)
    if np.any(Vs <= 0.0):
        raise DegenerateProfileError("u' vanishes on the grid")
    return -(Vs + Vss) / Vs ** 3


def curvature_nd(profile, sigma):
    """Curvature of the ramp profile from its closed numerator/denominator form."""
    if profile.variant != "lemma22":
        raise DomainError("the numerator/denominator form applies to the lemma22 variant")
    sigma = float(sigma)
    _check_sigma(sigma)
    if sigma <= 1.0:
        return -1.0
    L = sigma
    ell = math.log(L)
    eps = profile.epsilon0
    phi, dphi, ddphi = profile.bump(eps * ell)
    s_dphi = eps * dphi / L                                # s * d/ds phi(eps ln ln s)
    s2_ddphi = (eps * eps * ddphi - eps * (1.0 + L) * dphi) / (L * L)
    N = (1.0 + phi / L - phi / (L * L) + 2.0 * s_dphi * (ell + 1.0 / L)
         + s2_ddphi * ell)
    D = (1.0 + phi / L + s_dphi * ell) ** 3
    return -N / D


@dataclass(frozen=True)
class PinchingCertificate:
    """Outcome of the empirical pinching check on the verification grid."""
    epsilon0: float
    log_s_alpha: float
    k_max: float
    k_min: float
    attempts: int

    @property
    def lower_bound_B(self):
        return math.sqrt(-self.k_min)


def pinching_on_grid(profile, grid=None):
    """Return ``(max K, min K)`` over the grid."""
    K = curvature(profile, verification_grid() if grid is None else grid)
    return float(K.max()), float(K.min())


def calibrate_epsilon(alpha, kappa, grid=None):
    """Largest ``eps`` in ``1, 1/2, 1/4, ...`` with ``K <= -kappa^2`` on the grid."""
    if not 0.0 < kappa < 1.0:
        raise DomainError("kappa must lie in ]0, 1[")
    if alpha < 0.0:
        raise DomainError("alpha must be nonnegative")
    grid = verification_grid() if grid is None else grid
    eps = 1.0
    attempts = 0
    while eps >= EPSILON_FLOOR:
        attempts += 1
        prof = UProfile("lemma22", float(alpha), eps, kappa)
        k_max, k_min = pinching_on_grid(prof, grid)
        if k_max <= -kappa * kappa:
            return PinchingCertificate(eps, prof.log_s_alpha, k_max, k_min, attempts)
        eps *= 0.5
    raise CalibrationError(
        f"no ramp rate down to 2^-20 pinches curvature below -{kappa}^2 for alpha={alpha}")


def t_profile(metric, t):
    """``T_{a,u}(t)``: ``e^{-t}`` up to depth ``a``, then ``e^{-a}/u^{-1}(t-a)``."""
    return math.exp(log_t_profile(metric, t))


def log_t_profile(metric, t):
    t = float(t)
    if math.isnan(t):
        raise DomainError("t is NaN")
    if t == math.inf:
        return -math.inf
    if t == -math.inf:
        return math.inf
    return kernels.log_T(*metric.params, t)


def height_log(metric, log_D):
    """Horospherical height of a point at horizontal distance ``e^log_D``."""
    log_D = float(log_D)
    if not math.isfinite(log_D):
        raise DomainError("log D must be finite")
    return kernels.height_log(*metric.params, log_D)


def height(metric, D):
    """Solve ``T_{a,u}(t) D = 1``: ``ln D`` for ``D <= e^a``, else ``a + u(D e^{-a})``."""
    if not D > 0.0:
        raise DomainError("D must be positive")
    return height_log(metric, math.log(D))


def invert_u_log(profile, t):
    """``ln u^{-1}(t)``, i.e. the ``sigma`` with ``V(sigma) = t``."""
    t = float(t)
    if not math.isfinite(t):
        raise RangeError(f"cannot bracket u^-1 at t={t}")
    sigma = kernels.profile_invert(*profile.params, t)
    V = kernels.profile_eval(*profile.params, sigma)[0]
    if abs(V - t) > 1e-12 * max(1.0, abs(t)) * 4:
        raise RangeError(f"inversion failed to converge at t={t}")
    return sigma


def invert_u(profile, t):
    return math.exp(invert_u_log(profile, t))


def is_continuous_at_stripe(metric):
    """Whether ``u(1) = 0``, which makes ``T_{a,u}`` continuous at ``t = a``."""
    return eval_log(metric.profile, 0.0)[0] == 0.0


def curvature_scan(profile, grid=None):
    """Rows ``(sigma, u, du, d2u, K)`` over a sigma-grid, as a dict of arrays."""
    grid = verification_grid() if grid is None else np.asarray(grid, dtype=float)
    V, Vs, Vss = kernels.profile_eval_array(*profile.params, grid)
    inv_s = np.exp(-grid)
    with np.errstate(under="ignore"):
        du = Vs * inv_s
        d2u = (Vss - Vs) * inv_s * inv_s
    return {"sigma": grid, "u": V, "du": du, "d2u": d2u, "K": curvature(profile, grid)}
