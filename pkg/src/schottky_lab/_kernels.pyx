# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels; signatures mirror ``_kernels_py``."""
import numpy as np

from libc.math cimport log, exp, sqrt, fabs, isfinite

DEF PURE_LOG = 0
DEF LEMMA22 = 1
DEF REMARK24 = 2
DEF NEWTON_MAX_ITER = 60
DEF NEWTON_RTOL = 1e-12


cdef inline void _smooth(double x, double* S, double* S1, double* S2) noexcept nogil:
    cdef double y
    if x <= 0.0:
        S[0] = 0.0; S1[0] = 0.0; S2[0] = 0.0
    elif x >= 1.0:
        S[0] = 1.0; S1[0] = 0.0; S2[0] = 0.0
    else:
        y = 1.0 - x
        S[0] = x * x * x * (10.0 - 15.0 * x + 6.0 * x * x)
        S1[0] = 30.0 * x * x * y * y
        S2[0] = 60.0 * x * y * (1.0 - 2.0 * x)


cdef void _eval(int code, double alpha, double eps, double sigma,
                double* V, double* Vs, double* Vss) noexcept nogil:
    cdef double ell, S, S1, S2, phi, dphi, ddphi, r
    if code == LEMMA22 and sigma > 1.0:
        ell = log(sigma)
        _smooth(eps * ell, &S, &S1, &S2)
        phi = alpha * S
        dphi = alpha * S1
        ddphi = alpha * S2
        V[0] = sigma + phi * ell
        Vs[0] = 1.0 + (dphi * eps * ell + phi) / sigma
        Vss[0] = (ddphi * eps * eps * ell + 2.0 * eps * dphi
                  - eps * dphi * ell - phi) / (sigma * sigma)
    elif code == REMARK24:
        if sigma < 0.0:
            V[0] = 4.0 + 4.0 * sigma; Vs[0] = 4.0; Vss[0] = 0.0
        else:
            r = sqrt(1.0 + 2.0 * sigma)
            V[0] = (1.0 + r) * (1.0 + r)
            Vs[0] = 2.0 * (1.0 + r) / r
            Vss[0] = -2.0 / (r * r * r)
    else:
        V[0] = sigma; Vs[0] = 1.0; Vss[0] = 0.0


cdef double _excess(int code, double alpha, double eps, double sigma) noexcept nogil:
    cdef double ell, S, S1, S2
    if code == LEMMA22:
        if sigma <= 1.0:
            return 0.0
        ell = log(sigma)
        _smooth(eps * ell, &S, &S1, &S2)
        return alpha * S * ell
    if code == REMARK24:
        if sigma < 0.0:
            return 4.0 + 3.0 * sigma
        return 2.0 + 2.0 * sqrt(1.0 + 2.0 * sigma) + sigma
    return 0.0


cdef double _invert(int code, double alpha, double eps, double t) noexcept nogil:
    cdef double lo, hi, step, sigma, V, Vs, Vss, f, nxt, tol
    cdef int i
    if code != LEMMA22 and code != REMARK24:
        return t
    if code == LEMMA22:
        lo = t - _excess(code, alpha, eps, t)
        hi = t
    else:
        lo = t
        hi = t
        step = 1.0
        _eval(code, alpha, eps, lo, &V, &Vs, &Vss)
        while V > t:
            lo -= step
            step *= 2.0
            _eval(code, alpha, eps, lo, &V, &Vs, &Vss)
        step = 1.0
        _eval(code, alpha, eps, hi, &V, &Vs, &Vss)
        while V < t:
            hi += step
            step *= 2.0
            _eval(code, alpha, eps, hi, &V, &Vs, &Vss)
    sigma = t - _excess(code, alpha, eps, t)
    if sigma < lo:
        sigma = lo
    if sigma > hi:
        sigma = hi
    tol = NEWTON_RTOL * (fabs(t) if fabs(t) > 1.0 else 1.0)
    for i in range(NEWTON_MAX_ITER):
        _eval(code, alpha, eps, sigma, &V, &Vs, &Vss)
        f = V - t
        if fabs(f) <= tol:
            return sigma
        if f > 0.0:
            hi = sigma
        else:
            lo = sigma
        nxt = sigma - f / Vs
        if not (lo < nxt < hi):
            nxt = 0.5 * (lo + hi)
        if nxt == sigma:
            return sigma
        sigma = nxt
    return sigma


cdef inline double _height_excess(int code, double alpha, double eps, double a, double logD) noexcept nogil:
    if logD <= a:
        return 0.0
    return _excess(code, alpha, eps, logD - a)


def smoothstep(double x):
    cdef double S, S1, S2
    _smooth(x, &S, &S1, &S2)
    return S, S1, S2


def profile_eval(int code, double alpha, double eps, double sigma):
    cdef double V, Vs, Vss
    if code < 0 or code > 2:
        raise ValueError(f"unknown profile code {code}")
    _eval(code, alpha, eps, sigma, &V, &Vs, &Vss)
    return V, Vs, Vss


def profile_excess(int code, double alpha, double eps, double sigma):
    if code < 0 or code > 2:
        raise ValueError(f"unknown profile code {code}")
    return _excess(code, alpha, eps, sigma)


def profile_invert(int code, double alpha, double eps, double t):
    if not isfinite(t):
        raise ValueError("cannot invert a non-finite height")
    return _invert(code, alpha, eps, t)


def height_log(int code, double alpha, double eps, double a, double logD):
    cdef double V, Vs, Vss
    if logD <= a:
        return logD
    _eval(code, alpha, eps, logD - a, &V, &Vs, &Vss)
    return a + V


def height_excess(int code, double alpha, double eps, double a, double logD):
    return _height_excess(code, alpha, eps, a, logD)


def log_T(int code, double alpha, double eps, double a, double t):
    if not isfinite(t):
        raise ValueError("cannot invert a non-finite height")
    if t <= a:
        return -t
    return -a - _invert(code, alpha, eps, t - a)


def profile_eval_array(int code, double alpha, double eps, sigma):
    cdef const double[::1] x = np.ascontiguousarray(sigma, dtype=float).ravel()
    cdef Py_ssize_t i, n = x.shape[0]
    V = np.empty(n)
    Vs = np.empty(n)
    Vss = np.empty(n)
    cdef double[::1] v0 = V, v1 = Vs, v2 = Vss
    with nogil:
        for i in range(n):
            _eval(code, alpha, eps, x[i], &v0[i], &v1[i], &v2[i])
    shape = np.shape(sigma)
    return V.reshape(shape), Vs.reshape(shape), Vss.reshape(shape)


def profile_excess_array(int code, double alpha, double eps, sigma):
    cdef const double[::1] x = np.ascontiguousarray(sigma, dtype=float).ravel()
    cdef Py_ssize_t i, n = x.shape[0]
    out = np.empty(n)
    cdef double[::1] o = out
    with nogil:
        for i in range(n):
            o[i] = _excess(code, alpha, eps, x[i])
    return out.reshape(np.shape(sigma))


def profile_invert_array(int code, double alpha, double eps, t):
    arr = np.ascontiguousarray(t, dtype=float).ravel()
    if not np.all(np.isfinite(arr)):
        raise ValueError("cannot invert a non-finite height")
    cdef const double[::1] x = arr
    cdef Py_ssize_t i, n = x.shape[0]
    out = np.empty(n)
    cdef double[::1] o = out
    with nogil:
        for i in range(n):
            o[i] = _invert(code, alpha, eps, x[i])
    return out.reshape(np.shape(t))


def height_excess_array(int code, double alpha, double eps, double a, logD):
    cdef const double[::1] x = np.ascontiguousarray(logD, dtype=float).ravel()
    cdef Py_ssize_t i, n = x.shape[0]
    out = np.empty(n)
    cdef double[::1] o = out
    with nogil:
        for i in range(n):
            o[i] = _height_excess(code, alpha, eps, a, x[i])
    return out.reshape(np.shape(logD))


def log_T_array(int code, double alpha, double eps, double a, t):
    arr = np.ascontiguousarray(t, dtype=float).ravel()
    if not np.all(np.isfinite(arr)):
        raise ValueError("cannot invert a non-finite height")
    cdef const double[::1] x = arr
    cdef Py_ssize_t i, n = x.shape[0]
    out = np.empty(n)
    cdef double[::1] o = out
    with nogil:
        for i in range(n):
            if x[i] <= a:
                o[i] = -x[i]
            else:
                o[i] = -a - _invert(code, alpha, eps, x[i] - a)
    return out.reshape(np.shape(t))


# -- series ---------------------------------------------------------------

cdef inline void _neumaier(double x, double* total, double* comp) noexcept nogil:
    cdef double t = total[0] + x
    if fabs(total[0]) >= fabs(x):
        comp[0] += (total[0] - t) + x
    else:
        comp[0] += (x - t) + total[0]
    total[0] = t


cdef inline double _term(int code, double alpha, double eps, double a,
                         double logD, double s, bint weighted) noexcept nogil:
    cdef double h = logD + _height_excess(code, alpha, eps, a, logD)
    if weighted:
        return 2.0 * h * exp(-2.0 * s * h)
    return exp(-2.0 * s * h)


def parabolic_partial_sum(int code, double alpha, double eps, double a,
                          double log_scale, double s, long M, bint weighted):
    cdef double total = 0.0, comp = 0.0
    cdef long n
    with nogil:
        for n in range(1, M + 1):
            _neumaier(_term(code, alpha, eps, a, log(<double>n) + log_scale, s, weighted),
                      &total, &comp)
    return total + comp


def shell_counts(int k, long M):
    cdef long L = M * M + 1
    cdef long j, sq, m
    cdef int step
    base = np.zeros(L, dtype=np.int64)
    cdef long long[::1] b = base
    for j in range(M + 1):
        b[j * j] += 1 if j == 0 else 2
    counts = base.copy()
    cdef long long[::1] c
    cdef long long[::1] o
    for step in range(k - 1):
        nxt = np.zeros(L, dtype=np.int64)
        c = counts
        o = nxt
        with nogil:
            for j in range(M + 1):
                sq = j * j
                for m in range(L - sq):
                    o[m + sq] += b[sq] * c[m]
        counts = nxt
    return counts


def shell_sum(int code, double alpha, double eps, double a, double log_scale,
              double s, counts, bint weighted):
    cdef const long long[::1] c = np.ascontiguousarray(counts, dtype=np.int64)
    cdef Py_ssize_t m, n = c.shape[0]
    cdef double total = 0.0, comp = 0.0
    with nogil:
        for m in range(1, n):
            if c[m] != 0:
                _neumaier(c[m] * _term(code, alpha, eps, a, 0.5 * log(<double>m) + log_scale,
                                       s, weighted), &total, &comp)
    return total + comp


# -- word enumeration -----------------------------------------------------

cdef void _walk(const double[::1] dp, const double[::1] dh, int K, int depth, int letter,
                double dist, double s, double c, double* total, double* comp) noexcept nogil:
    cdef Py_ssize_t j, n
    cdef double nd
    if letter == 0:
        n = dp.shape[0]
    else:
        n = dh.shape[0]
    for j in range(n):
        if letter == 0:
            nd = dist + dp[j]
        else:
            nd = dist + dh[j]
        if depth > 0:
            nd -= c
        _neumaier(exp(-s * nd), total, comp)
        if depth + 1 < K:
            _walk(dp, dh, K, depth + 1, 1 - letter, nd, s, c, total, comp)


def enumerate_words_sum(dist_p, dist_h, int K, double s, double c):
    cdef const double[::1] dp = np.ascontiguousarray(dist_p, dtype=float)
    cdef const double[::1] dh = np.ascontiguousarray(dist_h, dtype=float)
    cdef double total = 1.0, comp = 0.0
    with nogil:
        _walk(dp, dh, K, 0, 0, 0.0, s, c, &total, &comp)
        _walk(dp, dh, K, 0, 1, 0.0, s, c, &total, &comp)
    return total + comp
