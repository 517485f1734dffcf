"""Pure-Python/numpy implementation of the numerical kernels.

This module is the reference backend. ``_kernels.pyx`` mirrors every public
function here with the same signature; ``kernels`` picks one at import time.

Profiles are passed as ``(code, alpha, eps)`` triples so that both backends
share a flat calling convention:

    code 0  pure logarithm, u(s) = ln s
    code 1  log-log ramp, u(s) = ln s + phi(eps ln ln s) ln ln s for s >= e
    code 2  square-root cusp, u^{-1}(t) = exp(t/2 - sqrt t) for t >= 4

All profile quantities are expressed in sigma = ln s.  ``profile_eval``
returns ``(V, V', V'')`` where ``V(sigma) = u(e^sigma)`` and primes are
sigma-derivatives.
"""
import math

import numpy as np

PURE_LOG = 0
LEMMA22 = 1
REMARK24 = 2

NEWTON_MAX_ITER = 60
NEWTON_RTOL = 1e-12


def smoothstep(x):
    """Quintic smoothstep on [0, 1] and its first two derivatives."""
    if x <= 0.0:
        return 0.0, 0.0, 0.0
    if x >= 1.0:
        return 1.0, 0.0, 0.0
    y = 1.0 - x
    return (x * x * x * (10.0 - 15.0 * x + 6.0 * x * x),
            30.0 * x * x * y * y,
            60.0 * x * y * (1.0 - 2.0 * x))


def profile_eval(code, alpha, eps, sigma):
    if code == PURE_LOG:
        return sigma, 1.0, 0.0
    if code == LEMMA22:
        if sigma <= 1.0:
            return sigma, 1.0, 0.0
        ell = math.log(sigma)
        S, S1, S2 = smoothstep(eps * ell)
        phi, dphi, ddphi = alpha * S, alpha * S1, alpha * S2
        V = sigma + phi * ell
        Vs = 1.0 + (dphi * eps * ell + phi) / sigma
        Vss = (ddphi * eps * eps * ell + 2.0 * eps * dphi
               - eps * dphi * ell - phi) / (sigma * sigma)
        return V, Vs, Vss
    if code == REMARK24:
        if sigma < 0.0:
            return 4.0 + 4.0 * sigma, 4.0, 0.0
        r = math.sqrt(1.0 + 2.0 * sigma)
        return (1.0 + r) ** 2, 2.0 * (1.0 + r) / r, -2.0 / (r * r * r)
    raise ValueError(f"unknown profile code {code}")


def profile_excess(code, alpha, eps, sigma):
    """``V(sigma) - sigma`` evaluated without cancellation."""
    if code == PURE_LOG:
        return 0.0
    if code == LEMMA22:
        if sigma <= 1.0:
            return 0.0
        ell = math.log(sigma)
        return alpha * smoothstep(eps * ell)[0] * ell
    if code == REMARK24:
        if sigma < 0.0:
            return 4.0 + 3.0 * sigma
        return 2.0 + 2.0 * math.sqrt(1.0 + 2.0 * sigma) + sigma
    raise ValueError(f"unknown profile code {code}")


def _bracket(code, alpha, eps, t):
    if code == LEMMA22:
        return t - profile_excess(code, alpha, eps, t), t
    lo = hi = t
    step = 1.0
    while profile_eval(code, alpha, eps, lo)[0] > t:
        lo -= step
        step *= 2.0
    step = 1.0
    while profile_eval(code, alpha, eps, hi)[0] < t:
        hi += step
        step *= 2.0
    return lo, hi


def profile_invert(code, alpha, eps, t):
    """Solve ``V(sigma) = t`` by Newton's method safeguarded by bisection."""
    if not math.isfinite(t):
        raise ValueError("cannot invert a non-finite height")
    if code == PURE_LOG:
        return t
    lo, hi = _bracket(code, alpha, eps, t)
    sigma = min(max(t - profile_excess(code, alpha, eps, t), lo), hi)
    tol = NEWTON_RTOL * max(1.0, abs(t))
    for _ in range(NEWTON_MAX_ITER):
        V, Vs, _ = profile_eval(code, alpha, eps, sigma)
        f = V - t
        if abs(f) <= tol:
            return sigma
        if f > 0.0:
            hi = sigma
        else:
            lo = sigma
        nxt = sigma - f / Vs
        if not lo < nxt < hi:
            nxt = 0.5 * (lo + hi)
        if nxt == sigma:
            return sigma
        sigma = nxt
    return sigma


def height_log(code, alpha, eps, a, logD):
    """Horospherical height solving ``T(t) D = 1``, in terms of ``ln D``."""
    if logD <= a:
        return logD
    return a + profile_eval(code, alpha, eps, logD - a)[0]


def height_excess(code, alpha, eps, a, logD):
    if logD <= a:
        return 0.0
    return profile_excess(code, alpha, eps, logD - a)


def log_T(code, alpha, eps, a, t):
    if t <= a:
        return -t
    return -a - profile_invert(code, alpha, eps, t - a)


# -- array versions -------------------------------------------------------

def _smoothstep_array(x):
    x = np.clip(x, 0.0, 1.0)
    y = 1.0 - x
    return (x ** 3 * (10.0 - 15.0 * x + 6.0 * x * x),
            30.0 * x * x * y * y,
            60.0 * x * y * (1.0 - 2.0 * x))


def profile_eval_array(code, alpha, eps, sigma):
    sigma = np.asarray(sigma, dtype=float)
    if code == PURE_LOG:
        return sigma.copy(), np.ones_like(sigma), np.zeros_like(sigma)
    if code == LEMMA22:
        inner = sigma > 1.0
        sg = np.where(inner, sigma, 2.0)
        ell = np.log(sg)
        S, S1, S2 = _smoothstep_array(eps * ell)
        phi, dphi, ddphi = alpha * S, alpha * S1, alpha * S2
        V = sg + phi * ell
        Vs = 1.0 + (dphi * eps * ell + phi) / sg
        Vss = (ddphi * eps * eps * ell + 2.0 * eps * dphi
               - eps * dphi * ell - phi) / (sg * sg)
        return (np.where(inner, V, sigma), np.where(inner, Vs, 1.0),
                np.where(inner, Vss, 0.0))
    if code == REMARK24:
        neg = sigma < 0.0
        r = np.sqrt(1.0 + 2.0 * np.where(neg, 0.0, sigma))
        return (np.where(neg, 4.0 + 4.0 * sigma, (1.0 + r) ** 2),
                np.where(neg, 4.0, 2.0 * (1.0 + r) / r),
                np.where(neg, 0.0, -2.0 / r ** 3))
    raise ValueError(f"unknown profile code {code}")


def profile_excess_array(code, alpha, eps, sigma):
    sigma = np.asarray(sigma, dtype=float)
    if code == PURE_LOG:
        return np.zeros_like(sigma)
    if code == LEMMA22:
        inner = sigma > 1.0
        ell = np.log(np.where(inner, sigma, 2.0))
        return np.where(inner, alpha * _smoothstep_array(eps * ell)[0] * ell, 0.0)
    if code == REMARK24:
        neg = sigma < 0.0
        return np.where(neg, 4.0 + 3.0 * sigma,
                        2.0 + 2.0 * np.sqrt(1.0 + 2.0 * np.where(neg, 0.0, sigma)) + sigma)
    raise ValueError(f"unknown profile code {code}")


def profile_invert_array(code, alpha, eps, t):
    t = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(t)):
        raise ValueError("cannot invert a non-finite height")
    if code == PURE_LOG:
        return t.copy()
    if code != LEMMA22:
        return np.array([profile_invert(code, alpha, eps, float(x)) for x in t.ravel()]).reshape(t.shape)
    lo = t - profile_excess_array(code, alpha, eps, t)
    hi = t.copy()
    sigma = lo.copy()
    tol = NEWTON_RTOL * np.maximum(1.0, np.abs(t))
    active = np.ones(t.shape, dtype=bool)
    for _ in range(NEWTON_MAX_ITER):
        V, Vs, _ = profile_eval_array(code, alpha, eps, sigma)
        f = V - t
        active &= np.abs(f) > tol
        if not active.any():
            break
        hi = np.where(active & (f > 0.0), sigma, hi)
        lo = np.where(active & (f <= 0.0), sigma, lo)
        nxt = sigma - f / Vs
        bad = ~((lo < nxt) & (nxt < hi))
        nxt = np.where(bad, 0.5 * (lo + hi), nxt)
        sigma = np.where(active, nxt, sigma)
    return sigma


def height_excess_array(code, alpha, eps, a, logD):
    logD = np.asarray(logD, dtype=float)
    inner = logD > a
    return np.where(inner, profile_excess_array(code, alpha, eps, np.where(inner, logD - a, 0.0)), 0.0)


def log_T_array(code, alpha, eps, a, t):
    t = np.asarray(t, dtype=float)
    inner = t > a
    sig = profile_invert_array(code, alpha, eps, np.where(inner, t - a, 0.0))
    return np.where(inner, -a - sig, -t)


# -- series ---------------------------------------------------------------

def _terms(code, alpha, eps, a, logD, s, weighted):
    h = logD + height_excess_array(code, alpha, eps, a, logD)
    terms = np.exp(-2.0 * s * h)
    if weighted:
        terms = terms * (2.0 * h)
    return terms


def parabolic_partial_sum(code, alpha, eps, a, log_scale, s, M, weighted):
    """Sum over n = 1..M of exp(-2 s h(n)), times 2 h(n) when ``weighted``."""
    n = np.arange(1, M + 1, dtype=float)
    return math.fsum(_terms(code, alpha, eps, a, np.log(n) + log_scale, s, weighted))


def shell_counts(k, M):
    """Exact number of points of Z^k with squared norm m, for m = 0..M^2."""
    L = M * M + 1
    base = np.zeros(L, dtype=np.int64)
    for j in range(M + 1):
        base[j * j] += 1 if j == 0 else 2
    counts = base.copy()
    for _ in range(k - 1):
        nxt = np.zeros(L, dtype=np.int64)
        for j in range(M + 1):
            sq = j * j
            nxt[sq:] += base[j * j] * counts[:L - sq]
        counts = nxt
    return counts


def shell_sum(code, alpha, eps, a, log_scale, s, counts, weighted):
    counts = np.asarray(counts)
    m = np.nonzero(counts)[0]
    m = m[m > 0]
    logD = 0.5 * np.log(m.astype(float)) + log_scale
    return math.fsum(counts[m] * _terms(code, alpha, eps, a, logD, s, weighted))


# -- word enumeration -----------------------------------------------------

_CHUNK = 1 << 20


def _word_chunks(tables, k, letter, c):
    if k == 1:
        yield tables[letter]
        return
    d = tables[letter]
    per = max(1, _CHUNK // d.size)
    for prev in _word_chunks(tables, k - 1, 1 - letter, c):
        for i in range(0, prev.size, per):
            yield (prev[i:i + per, None] + d[None, :] - c).ravel()


def enumerate_words_sum(dist_p, dist_h, K, s, c):
    """Brute-force Poincare sum over reduced words of at most K syllables.

    Every word's distance is assembled from its syllable distances minus the
    junction defect before exponentiation; the identity contributes 1.
    """
    tables = (np.asarray(dist_p, dtype=float), np.asarray(dist_h, dtype=float))
    parts = [1.0]
    for k in range(1, K + 1):
        for letter in (0, 1):
            for chunk in _word_chunks(tables, k, letter, c):
                parts.append(float(np.sum(np.exp(-s * chunk))))
    return math.fsum(parts)
