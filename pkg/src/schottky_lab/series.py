"""Poincare series: parabolic lattices, the two-generator group, exponents.

Tails are controlled by the integral test.  Writing ``r = exp(exp(tau))``
turns every tail integrand ``r^(k-1) e^{-2 s h(r)} dr`` into ``exp(G(tau))``
with ``G`` slowly varying, so convergence is read off the slope of ``G`` at a
far-out abscissa rather than assumed from the closed-form dichotomy.
"""
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import kernels
from .errors import BracketError, BudgetError, DomainError
from .quadrature import integrate

CONVERGES = "converges"
DIVERGES = "diverges"
UNDECIDED = "undecided"

MIN_TRUNCATION = 1000
DEFAULT_TRUNCATION = 10_000
TAU_FAR = 690.0
SLOPE_FLAT = -1e-9      # slope above this: the tail integrand does not decay
SLOPE_DECAY = -1e-6     # slope below this (and steepening): geometric decay
ENUMERATION_BUDGET = 28.0


@dataclass(frozen=True)
class SeriesEstimate:
    """Partial sum plus a one-sided tail bound.

    The true total lies in ``[partial_sum + tail_lower, partial_sum + tail_bound]``;
    ``tail_estimate`` is a point estimate of the tail inside that interval.
    """
    partial_sum: float
    tail_bound: float
    verdict: str
    exponent_in: float
    truncation: int
    tail_estimate: float = 0.0
    kind: str = "series"
    params: dict = field(default_factory=dict, compare=False)
    tail_lower: float = 0.0

    @property
    def total(self):
        return self.partial_sum + self.tail_estimate

    @property
    def interval(self):
        return self.partial_sum + self.tail_lower, self.partial_sum + self.tail_bound

    def as_dict(self):
        return {"kind": self.kind, "s": self.exponent_in, "truncation": self.truncation,
                "partial_sum": self.partial_sum, "tail_bound": self.tail_bound,
                "tail_estimate": self.tail_estimate, "tail_lower": self.tail_lower,
                "verdict": self.verdict,
                **self.params}


# -- tail integrals --------------------------------------------------------

def _unit_sphere_area(k):
    return 2.0 * math.pi ** (k / 2.0) / math.gamma(k / 2.0)


def _height_split(metric):
    """Write ``h(e^sigma) = lam * sigma + R(sigma)`` with ``R = o(sigma)``.

    Returns ``(lam, R)``.  Keeping the linear part separate lets the
    coefficient of ``sigma`` in the tail exponent cancel exactly at the
    critical exponent, even where ``sigma`` is astronomically large.
    """
    code, alpha, eps, a = metric.params
    if code == kernels.REMARK24:
        def rest(sigma):
            inner = sigma > a
            r = np.sqrt(1.0 + 2.0 * np.where(inner, sigma - a, 0.0))
            return np.where(inner, 2.0 - a + 2.0 * r, -sigma)
        return 2.0, rest

    def rest(sigma):
        return kernels.height_excess_array(code, alpha, eps, a, sigma)
    return 1.0, rest


def _log_integrand(metric, k, s, shift, weighted):
    """``G(tau)`` for ``r^(k-1)`` (or ``(r+shift)^(k-1)``) ``* e^{-2s h(r)} dr``."""
    lam, rest = _height_split(metric)

    def G(tau):
        tau = np.asarray(tau, dtype=float)
        sigma = np.exp(tau)
        R = rest(sigma)
        g = (k - 2.0 * s * lam) * sigma - 2.0 * s * R + tau
        if shift and k > 1:
            g = g + (k - 1) * np.log1p(shift * np.exp(-sigma))
        if weighted:
            g = g + np.log(2.0 * (lam * sigma + R))
        return g
    return G


@dataclass(frozen=True)
class TailIntegral:
    value: float
    verdict: str
    slope: float


def tail_integral(metric, k, s, r0, shift=0.0, weighted=False):
    """``int_{r0}^inf (r+shift)^(k-1) e^{-2 s h(r)} [2 h(r)] dr`` with a verdict."""
    if r0 <= 1.0:
        raise DomainError("tail integrals start beyond r = 1")
    G = _log_integrand(metric, k, s, shift, weighted)
    tau0 = math.log(math.log(r0))
    g_far, g_mid, g_near = (float(v) for v in G(np.array([TAU_FAR, TAU_FAR - 1.0, TAU_FAR - 2.0])))
    d1, d2 = g_far - g_mid, g_mid - g_near
    if not math.isfinite(g_far) or d1 > SLOPE_FLAT:
        return TailIntegral(math.inf, DIVERGES, d1)
    if not (d1 < SLOPE_DECAY and d1 <= d2 + 1e-12):
        return TailIntegral(math.nan, UNDECIDED, d1)
    body = integrate(lambda t: np.exp(G(t)), tau0, TAU_FAR, abs_tol=1e-300,
                     rel_tol=1e-11, max_panels=20_000).value
    far = 2.0 * math.exp(g_far) / abs(d1)
    return TailIntegral(body + far, CONVERGES, d1)


# -- parabolic series --------------------------------------------------------

@lru_cache(maxsize=8)
def _shell_counts(k, M):
    counts = kernels.shell_counts(k, M)
    counts.setflags(write=False)
    return counts


def _check_truncation(M):
    M = int(M)
    if M < MIN_TRUNCATION:
        raise DomainError(f"truncation M must be at least {MIN_TRUNCATION}")
    return M


def _lattice_sum(metric, k, s, M, weighted, scale):
    code, alpha, eps, a = metric.params
    if k == 1:
        return 2.0 * kernels.parabolic_partial_sum(code, alpha, eps, a, math.log(scale),
                                                   s, M, weighted)
    counts = _shell_counts(k, M)
    return kernels.shell_sum(code, alpha, eps, a, math.log(scale), s, counts, weighted)


def _lattice_tail(metric, k, s, M, weighted, scale):
    """Tail over ``|n| > M``: verdict, upper bound, midpoint estimate, lower bound.

    For ``k = 1`` the terms decrease, so the tail lies between the integrals
    from ``M + 1`` and from ``M``.  For ``k >= 2`` each lattice point owns a
    unit cube whose points are within ``c = sqrt(k)/2`` of it in norm.
    """
    if k == 1:
        upper = tail_integral(metric, 1, s, M * scale, weighted=weighted)
        if upper.verdict != CONVERGES:
            return upper.verdict, math.nan, math.nan, math.nan
        est = tail_integral(metric, 1, s, (M + 0.5) * scale, weighted=weighted)
        lower = tail_integral(metric, 1, s, (M + 1) * scale, weighted=weighted)
        factor = 2.0 / scale
        return CONVERGES, factor * upper.value, factor * est.value, factor * lower.value
    c = math.sqrt(k) / 2.0
    area = _unit_sphere_area(k) / scale ** k
    upper = tail_integral(metric, k, s, (M - 2.0 * c) * scale, shift=c * scale, weighted=weighted)
    if upper.verdict != CONVERGES:
        return upper.verdict, math.nan, math.nan, math.nan
    est = tail_integral(metric, k, s, M * scale, weighted=weighted)
    lower = tail_integral(metric, k, s, (M + 2.0 * c) * scale, shift=-c * scale,
                          weighted=weighted)
    return CONVERGES, area * upper.value, area * est.value, area * lower.value


def _lattice_series(metric, k, s, M, weighted, scale, kind):
    if k < 1:
        raise DomainError("rank must be at least 1")
    M = _check_truncation(M)
    verdict, bound, est, low = _lattice_tail(metric, k, s, M, weighted, scale)
    partial = _lattice_sum(metric, k, s, M, weighted, scale)
    if verdict != CONVERGES:
        bound = est = math.inf if verdict == DIVERGES else math.nan
        low = 0.0
    params = {"rank": k, "a": metric.a, **metric.profile.as_dict()}
    return SeriesEstimate(partial, bound, verdict, s, M, est, kind, params, low)


def parabolic_series(metric, k, s, M=DEFAULT_TRUNCATION, scale=1.0):
    """``sum_{0 < |n| <= M} exp(-2 s height(|n| scale))`` over ``Z^k`` with a tail test."""
    return _lattice_series(metric, k, s, M, False, scale, "parabolic")


def ps_finiteness_series(metric, delta, M=DEFAULT_TRUNCATION, scale=1.0):
    """``sum_{m != 0} 2 height(m) exp(-2 delta height(m))``."""
    if not delta > 0.0:
        raise DomainError("delta must be positive")
    return _lattice_series(metric, 1, delta, M, True, scale, "ps_finiteness")


def ps_finiteness(metric, delta, M=DEFAULT_TRUNCATION):
    """``finite``, ``infinite`` or ``undecided``."""
    verdict = ps_finiteness_series(metric, delta, M).verdict
    return {CONVERGES: "finite", DIVERGES: "infinite"}.get(verdict, UNDECIDED)


def exponent_estimate(series, bracket=(0.05, 2.0), tol=1e-3):
    """Bisection on the convergence verdict of ``series(s)``.

    ``series`` maps ``s`` to a ``SeriesEstimate``; the low end must diverge
    and the high end converge.
    """
    lo, hi = bracket
    v_lo, v_hi = series(lo).verdict, series(hi).verdict
    if v_lo != DIVERGES or v_hi != CONVERGES:
        raise BracketError(f"verdicts {v_lo!r} at {lo} and {v_hi!r} at {hi} do not bracket")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        v = series(mid).verdict
        if v == CONVERGES:
            hi = mid
        elif v == DIVERGES:
            lo = mid
        else:
            raise BracketError(f"undecided verdict at s={mid}")
    return 0.5 * (lo + hi)


# -- two-generator group -----------------------------------------------------

def one_letter_sum(model, letter, s, M=DEFAULT_TRUNCATION):
    """``sum_{n != 0} exp(-s d(letter^n))`` as a SeriesEstimate."""
    if letter == "h":
        q = math.exp(-s * model.l_h)
        tail = 2.0 * q ** (M + 1) / (1.0 - q) if q < 1.0 else math.inf
        partial = 2.0 * q * (1.0 - q ** M) / (1.0 - q) if q < 1.0 else math.inf
        verdict = CONVERGES if q < 1.0 else DIVERGES
        return SeriesEstimate(partial, tail, verdict, s, M, tail, "one_letter_h", {}, tail)
    est = parabolic_series(model.metric, 1, s, M, scale=model.s_p)
    return SeriesEstimate(est.partial_sum, est.tail_bound, est.verdict, s, M,
                          est.tail_estimate, "one_letter_p", {}, est.tail_lower)


def truncated_product_sum(x, y, q, K):
    """Sum over alternating words of at most K syllables with letter sums x, y."""
    total = 1.0
    start_p, start_h = x, y          # words of the current length, by first letter
    for k in range(1, K + 1):
        total += start_p + start_h
        # append one syllable: the new last letter alternates
        if k % 2:
            start_p, start_h = start_p * y * q, start_h * x * q
        else:
            start_p, start_h = start_p * x * q, start_h * y * q
    return total


def full_product_sum(x, y, q):
    """Closed form of the alternating sum over all lengths; ``inf`` if it diverges."""
    r = x * y * q * q
    if not r < 1.0:
        return math.inf
    return 1.0 + (2.0 * r / q + x + y) / (1.0 - r)


def direct_enumeration(model, s, K, M):
    """Brute-force sum over all reduced words with at most K syllables, |exponents| <= M."""
    if K < 1 or M < 1:
        raise DomainError("K and M must be positive")
    if K * math.log2(2 * M) > ENUMERATION_BUDGET:
        raise BudgetError(f"enumeration of K={K}, M={M} exceeds the budget")
    dp = model.syllable_table("p", M)
    dh = model.syllable_table("h", M)
    return kernels.enumerate_words_sum(np.concatenate([dp, dp]), np.concatenate([dh, dh]),
                                       K, s, model.c)


def truncated_formula(model, s, K, M):
    x = 2.0 * math.fsum(np.exp(-s * model.syllable_table("p", M)))
    y = 2.0 * math.fsum(np.exp(-s * model.syllable_table("h", M)))
    return truncated_product_sum(x, y, math.exp(s * model.c), K)


@dataclass(frozen=True)
class GroupSeriesEstimate(SeriesEstimate):
    direct_sum: float = math.nan
    formula_sum: float = math.nan
    ratio: float = math.nan


def group_series(model, s, K=4, M=50, M_tail=DEFAULT_TRUNCATION):
    """Group Poincare series at ``s``.

    Compares direct enumeration against the product formula at ``(K, M)``
    when the enumeration budget allows, and classifies the full series by
    the geometric ratio ``W_p W_h e^{2 s c}``.
    """
    formula = truncated_formula(model, s, K, M)
    try:
        direct = direct_enumeration(model, s, K, M)
    except BudgetError:
        direct = math.nan
    wp = one_letter_sum(model, "p", s, M_tail)
    wh = one_letter_sum(model, "h", s, M_tail)
    q = math.exp(s * model.c)
    params = {"a": model.a, "K": K, "M": M, "c": model.c}
    if wp.verdict == DIVERGES or wh.verdict == DIVERGES:
        return GroupSeriesEstimate(formula, math.inf, DIVERGES, s, M, math.inf,
                                   "group", params, direct_sum=direct,
                                   formula_sum=formula, ratio=math.inf)
    (x_lo, x_hi), x_est = wp.interval, wp.total
    y = wh.partial_sum + wh.tail_estimate
    ratio = x_est * y * q * q
    r_lo, r_hi = x_lo * y * q * q, x_hi * y * q * q
    if wp.verdict == CONVERGES and r_hi < 1.0:
        verdict = CONVERGES
        low, high = full_product_sum(x_lo, y, q), full_product_sum(x_hi, y, q)
        return GroupSeriesEstimate(low, high - low, verdict, s, M,
                                   full_product_sum(x_est, y, q) - low, "group", params,
                                   direct_sum=direct, formula_sum=formula, ratio=ratio)
    verdict = DIVERGES if r_lo >= 1.0 else UNDECIDED
    return GroupSeriesEstimate(formula, math.inf if verdict == DIVERGES else math.nan,
                               verdict, s, M, math.nan, "group", params,
                               direct_sum=direct, formula_sum=formula, ratio=ratio)
