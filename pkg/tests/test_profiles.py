import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from schottky_lab import profiles as P
from schottky_lab.errors import CalibrationError, DomainError, RangeError


def _u_ramp(s, alpha, eps):
    """Ramp profile written directly in s, evaluated with mpmath."""
    L = mpmath.log(s)
    if L <= 1:
        return L
    ell = mpmath.log(L)
    x = eps * ell
    S = 0 if x <= 0 else (1 if x >= 1 else x ** 3 * (10 - 15 * x + 6 * x ** 2))
    return L + alpha * S * ell


def _oracle_curvature(alpha, eps, sigma):
    with mpmath.workdps(250):
        s0 = mpmath.e ** mpmath.mpf(sigma)
        du = mpmath.diff(lambda s: _u_ramp(s, alpha, eps), s0, 1)
        d2u = mpmath.diff(lambda s: _u_ramp(s, alpha, eps), s0, 2)
        return float(-(2 * du + s0 * d2u) / (s0 ** 2 * du ** 3))


@pytest.mark.parametrize("sigma", [1.7, 20.0, 150.0])
@pytest.mark.parametrize("alpha,eps", [(1.5, 0.125), (2.5, 0.0625), (0.5, 0.25)])
def test_curvature_matches_high_precision_oracle(alpha, eps, sigma):
    prof = P.UProfile.lemma22(alpha, epsilon0=eps)
    assert P.curvature(prof, sigma) == pytest.approx(_oracle_curvature(alpha, eps, sigma),
                                                     rel=1e-10)


def test_closed_form_ratio_agrees():
    prof = P.UProfile.lemma22(1.5)
    for sigma in np.geomspace(1.01, 400, 37):
        assert P.curvature_nd(prof, sigma) == pytest.approx(P.curvature(prof, sigma), rel=1e-12)


# Calibrated ramp rates with kappa = 0.9, frozen from the calibration scan.
@pytest.mark.parametrize("alpha,eps,k_max", [(1.5, 0.125, -0.8627766271601537),
                                             (2.5, 0.0625, -0.9556697087143812),
                                             (2.0, 0.125, -0.823267548132641),
                                             (1.0, 0.125, -0.9051995720035247),
                                             (0.5, 0.25, -0.8219282494450576),
                                             (0.0, 1.0, -1.0)])
def test_calibrated_rates(alpha, eps, k_max):
    cert = P.calibrate_epsilon(alpha, 0.9)
    assert cert.epsilon0 == eps
    assert cert.k_max == pytest.approx(k_max, rel=1e-9)
    assert cert.k_max <= -0.81
    assert cert.log_s_alpha == pytest.approx(math.exp(1 / eps))


def test_calibration_floor_error():
    with pytest.raises(CalibrationError):
        P.calibrate_epsilon(1e6, 1.0 - 1e-14)


def test_pure_log_is_hyperbolic():
    K = P.curvature(P.UProfile.pure_log(), P.verification_grid())
    assert np.max(np.abs(K + 1.0)) <= 1e-12


def test_remark24_curvature_tends_to_quarter():
    prof = P.UProfile.remark24()
    assert P.curvature(prof, 1e8) == pytest.approx(-0.25, abs=1e-3)
    assert P.pinching_on_grid(prof)[0] <= -prof.kappa ** 2


def test_remark24_inverse_closed_form():
    prof = P.UProfile.remark24()
    for t in (4.5, 9.0, 30.0, 200.0):
        assert P.invert_u_log(prof, t) == pytest.approx(t / 2 - math.sqrt(t), rel=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.floats(0.0, 3000.0), st.sampled_from(["pure_log", "lemma22", "remark24"]))
def test_inverse_roundtrip(sigma, variant):
    prof = {"pure_log": P.UProfile.pure_log(), "lemma22": P.UProfile.lemma22(1.5),
            "remark24": P.UProfile.remark24()}[variant]
    V = P.eval_log(prof, sigma)[0]
    assert P.invert_u_log(prof, V) == pytest.approx(sigma, rel=1e-11, abs=1e-11)


def test_u_derivatives_from_log_form():
    prof = P.UProfile.lemma22(1.5)
    sigma = 3.0
    u, du, d2u = P.eval_u(prof, sigma)
    with mpmath.workdps(40):
        s0 = mpmath.e ** 3
        assert du == pytest.approx(float(mpmath.diff(lambda s: _u_ramp(s, 1.5, 0.125), s0)),
                                   rel=1e-10)
        assert d2u == pytest.approx(
            float(mpmath.diff(lambda s: _u_ramp(s, 1.5, 0.125), s0, 2)), rel=1e-9)


def test_t_profile_and_height_are_inverse():
    metric = P.CuspMetric(1.5, P.UProfile.lemma22(1.5))
    for D in (0.5, 3.0, 1e3, 1e40):
        t = P.height(metric, D)
        assert P.t_profile(metric, t) * D == pytest.approx(1.0, rel=1e-10)
    assert P.height(metric, math.exp(1.0)) == pytest.approx(1.0)


def test_t_profile_stripe_and_limits():
    metric = P.CuspMetric(2.0, P.UProfile.lemma22(1.5))
    assert P.t_profile(metric, 1.0) == pytest.approx(math.exp(-1.0))
    assert P.log_t_profile(metric, math.inf) == -math.inf
    assert P.log_t_profile(metric, -math.inf) == math.inf


def test_continuity_at_stripe():
    assert P.is_continuous_at_stripe(P.CuspMetric(1.0, P.UProfile.lemma22(1.5)))
    assert not P.is_continuous_at_stripe(P.CuspMetric(1.0, P.UProfile.remark24()))


def test_height_monotone_in_a():
    prof = P.UProfile.lemma22(1.5)
    for logD in (5.0, 50.0, 500.0):
        hs = [P.height_log(P.CuspMetric(a, prof), logD) for a in (0.0, 1.0, 2.0, 4.0)]
        assert all(x >= y for x, y in zip(hs, hs[1:]))


def test_domain_errors():
    with pytest.raises(DomainError):
        P.UProfile("cubic")
    with pytest.raises(DomainError):
        P.CuspMetric(-1.0, P.UProfile.pure_log())
    with pytest.raises(DomainError):
        P.eval_log(P.UProfile.pure_log(), math.nan)
    with pytest.raises(DomainError):
        P.height(P.CuspMetric.hyperbolic(), 0.0)
    with pytest.raises(RangeError):
        P.invert_u_log(P.UProfile.lemma22(1.5), math.inf)
    with pytest.raises(DomainError):
        P.curvature_nd(P.UProfile.pure_log(), 3.0)


def test_curvature_scan_columns():
    scan = P.curvature_scan(P.UProfile.lemma22(1.5), np.array([2.0, 10.0]))
    assert set(scan) == {"sigma", "u", "du", "d2u", "K"}
    assert scan["u"][0] == pytest.approx(P.eval_log(P.UProfile.lemma22(1.5), 2.0)[0])
