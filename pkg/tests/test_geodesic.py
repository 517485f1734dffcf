import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from schottky_lab import kernels
from schottky_lab.errors import DomainError, GeometryError
from schottky_lab.geodesic import (apex_height, arc_length, clairaut_distance, deviation_scan,
                                   horizontal_width)
from schottky_lab.profiles import CuspMetric, UProfile


def _dlogT(metric, t):
    code, alpha, eps, a = metric.params
    if t <= a:
        return -1.0
    sig = kernels.profile_invert(code, alpha, eps, t - a)
    return -1.0 / kernels.profile_eval(code, alpha, eps, sig)[1]


def _shoot(metric, theta):
    """Integrate the geodesic equations from (0, 0) until it returns to t = 0."""
    def rhs(_, y):
        x, t, xd, td = y
        g = _dlogT(metric, t)
        T2 = math.exp(2.0 * kernels.log_T(*metric.params, t))
        return [xd, td, -2.0 * g * xd * td, g * T2 * xd * xd]

    def back(_, y):
        return y[1]
    back.terminal, back.direction = True, -1
    sol = solve_ivp(rhs, (0.0, 1e4), [0.0, 0.0, math.cos(theta), math.sin(theta)],
                    events=back, rtol=1e-12, atol=1e-13, method="DOP853", first_step=1e-6)
    return sol.y_events[0][0][0], sol.t_events[0][0]


def ode_length(metric, D):
    theta = brentq(lambda th: _shoot(metric, th)[0] - D, 1e-9, math.pi / 2 - 1e-9, xtol=1e-14)
    return _shoot(metric, theta)[1]


@pytest.mark.parametrize("D", np.geomspace(0.1, 100.0, 7))
def test_hyperbolic_closed_form(D):
    sol = clairaut_distance(CuspMetric.hyperbolic(), D)
    assert sol.length == pytest.approx(math.acosh(1 + D * D / 2), abs=1e-9)
    assert sol.width == pytest.approx(D, rel=1e-10)


def test_hyperbolic_far_separation():
    sol = clairaut_distance(CuspMetric.hyperbolic(), 1e12)
    assert sol.length == pytest.approx(2 * math.log(1e12), abs=1e-8)


@pytest.mark.parametrize("a,D", [(0.0, 3.0), (0.0, 40.0), (0.0, 300.0), (1.0, 60.0)])
def test_ramp_matches_ode_shooting(a, D):
    metric = CuspMetric(a, UProfile.lemma22(1.5))
    assert clairaut_distance(metric, D).length == pytest.approx(ode_length(metric, D),
                                                                abs=1e-7)


def test_frozen_deviations():
    # length - 2 height(D) for alpha = 1.5, a = 0, cross-checked by ODE shooting
    metric = CuspMetric(0.0, UProfile.lemma22(1.5))
    table = deviation_scan(metric, np.exp([2.0, 4.0, 6.0, 9.2]))
    np.testing.assert_allclose(table.deviation, [0.02397561646536417, -0.09239259754115992,
                                                 -0.13749103853479028, -0.15765042473494262],
                               atol=1e-8)


def test_deviation_stays_bounded_far_out():
    metric = CuspMetric(0.0, UProfile.lemma22(1.5))
    table = deviation_scan(metric, np.exp([15.0, 60.0, 250.0]))
    assert np.all(np.abs(table.deviation) < 0.2)
    assert abs(table.deviation[-1]) < abs(table.deviation[0])


def test_apex_and_width_monotone():
    metric = CuspMetric(0.5, UProfile.lemma22(1.5))
    lams = [0.3, 1.0, 4.0, 12.0]
    widths = [horizontal_width(metric, x) for x in lams]
    assert all(w1 < w2 for w1, w2 in zip(widths, widths[1:]))
    assert apex_height(metric, 0.3) == 0.3
    assert arc_length(metric, 0.0) == 0.0


def test_discontinuous_profile_rejected():
    with pytest.raises(GeometryError):
        clairaut_distance(CuspMetric(1.0, UProfile.remark24()), 5.0)


@pytest.mark.parametrize("D", [0.0, -1.0, math.inf])
def test_bad_separation(D):
    with pytest.raises(DomainError):
        clairaut_distance(CuspMetric.hyperbolic(), D)


def test_deviation_grid_validation():
    with pytest.raises(DomainError):
        deviation_scan(CuspMetric.hyperbolic(), [3.0, 2.0])
    table = deviation_scan(CuspMetric.hyperbolic(), [10.0, 100.0])
    with pytest.raises(DomainError):
        table.max_abs_deviation(1e3, 1e4)
