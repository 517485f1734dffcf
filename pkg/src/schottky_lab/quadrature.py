"""Globally adaptive Gauss-Legendre quadrature for vectorised integrands."""
import heapq
import math
from dataclasses import dataclass

import numpy as np

from .errors import AccuracyError

_NODES, _WEIGHTS = np.polynomial.legendre.leggauss(10)


@dataclass(frozen=True)
class QuadResult:
    value: float
    error: float
    panels: int


def _rule(f, a, b):
    half = 0.5 * (b - a)
    x = 0.5 * (a + b) + half * _NODES
    return half * float(np.dot(_WEIGHTS, f(x)))


def _panel(f, a, b):
    whole = _rule(f, a, b)
    m = 0.5 * (a + b)
    left, right = _rule(f, a, m), _rule(f, m, b)
    return left + right, abs(left + right - whole)


def integrate(f, a, b, abs_tol=1e-9, rel_tol=1e-12, max_panels=10_000):
    """Integrate ``f`` over ``[a, b]``.

    ``f`` maps a numpy array of abscissae to an array of values.  The panel
    with the largest error estimate (10-point rule versus its two halves) is
    bisected until the summed estimate meets ``max(abs_tol, rel_tol*|I|)``.
    """
    if a == b:
        return QuadResult(0.0, 0.0, 0)
    value, err = _panel(f, a, b)
    heap = [(-err, a, b, value)]
    total, total_err = value, err
    while total_err > max(abs_tol, rel_tol * abs(total)):
        if len(heap) >= max_panels:
            raise AccuracyError(
                f"quadrature did not reach tolerance with {max_panels} panels "
                f"(estimate {total_err:.3g})")
        neg_err, lo, hi, val = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            raise AccuracyError("quadrature panel collapsed below machine resolution")
        v1, e1 = _panel(f, lo, mid)
        v2, e2 = _panel(f, mid, hi)
        heapq.heappush(heap, (-e1, lo, mid, v1))
        heapq.heappush(heap, (-e2, mid, hi, v2))
        total += v1 + v2 - val
        total_err += e1 + e2 + neg_err
    return QuadResult(math.fsum(p[3] for p in heap), math.fsum(-p[0] for p in heap), len(heap))
