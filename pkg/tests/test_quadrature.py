import math

import numpy as np
import pytest

from schottky_lab.errors import AccuracyError
from schottky_lab.quadrature import integrate


def test_polynomial_exact():
    r = integrate(lambda x: 5 * x ** 4 - 3 * x ** 2 + 1, -1.0, 2.0)
    assert r.value == pytest.approx((2 ** 5 - 2 ** 3 + 2) - (-1 + 1 - 1), rel=1e-14)


def test_oscillatory():
    r = integrate(np.cos, 0.0, 50.0)
    assert r.value == pytest.approx(math.sin(50.0), abs=1e-11)


def test_endpoint_singularity_after_substitution():
    # int_0^1 x^{-1/2} dx = 2, with x = w^2 the integrand becomes 2
    r = integrate(lambda w: 2.0 * np.ones_like(w), 0.0, 1.0)
    assert r.value == pytest.approx(2.0, rel=1e-15)
    raw = integrate(lambda x: 1.0 / np.sqrt(x), 0.0, 1.0, abs_tol=1e-6, rel_tol=1e-6)
    assert raw.value == pytest.approx(2.0, rel=1e-5)


def test_empty_interval():
    assert integrate(np.exp, 1.0, 1.0).value == 0.0


def test_panel_cap_raises():
    with pytest.raises(AccuracyError):
        integrate(lambda x: np.sin(1.0 / x), 1e-8, 1.0, abs_tol=1e-14, rel_tol=1e-15,
                  max_panels=50)
