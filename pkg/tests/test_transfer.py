import math

import numpy as np
import pytest

from schottky_lab import transfer as T
from schottky_lab.errors import BudgetError, DomainError, SpectralError
from schottky_lab.profiles import CuspMetric, UProfile
from schottky_lab.schottky import BoundaryPoint, SchottkyModel, Word
from schottky_lab.series import CONVERGES, DIVERGES, UNDECIDED, one_letter_sum


def dense(m):
    return T.TransferMatrix(0, [str(i) for i in range(len(m))], np.asarray(m, dtype=float))


def test_two_cycle():
    res = T.power_iterate(dense([[0, 2], [0.5, 0]]))
    assert res.rho == pytest.approx(1.0, abs=1e-10)
    np.testing.assert_allclose(res.eigenfunction, [1.0, 0.5], rtol=1e-12)


def test_identity():
    res = T.power_iterate(dense(np.eye(2)))
    assert res.rho == pytest.approx(1.0, abs=1e-14)
    np.testing.assert_allclose(res.eigenfunction, [1.0, 1.0])


def test_trivial_level0_values():
    res = T.power_iterate(dense([[0, 0.5], [2.0, 0]]))
    assert res.rho == pytest.approx(1.0, abs=1e-12)


def test_random_matrix_against_iterate_norms():
    rng = np.random.default_rng(7)
    # (|M^{2k} 1|)^{1/2k} carries an O(ln C / 2k) bias, C = <left vector, 1>; entries
    # near a common value keep C close to 1 so the k = 200 limit resolves 1e-4
    M = (0.9 + 0.2 * rng.random((50, 50))) / 50.0
    res = T.power_iterate(dense(M))
    v, log_norm, ratio = np.ones(50), 0.0, math.nan
    for _ in range(400):
        w = M @ v
        ratio = np.max(w) / np.max(v)
        log_norm += math.log(np.max(w))
        v = w / np.max(w)
    assert res.rho == pytest.approx(math.exp(log_norm / 400), abs=1e-4)
    assert res.rho == pytest.approx(ratio, rel=1e-12)
    assert res.residual <= 1e-8 * res.rho
    assert np.all(res.eigenfunction > 0)


def test_zero_matrix_rejected():
    with pytest.raises(SpectralError):
        T.power_iterate(dense(np.zeros((2, 2))))


def test_level0_structure(calibrated15):
    _, model, _ = calibrated15
    tm = T.build_level0(model, 0.0, 0.5)
    assert tm.states == ["U_h", "U_p"]
    assert tm.entries[0, 0] == tm.entries[1, 1] == 0.0
    S_p = one_letter_sum(model, "p", 0.5).total
    S_h = one_letter_sum(model, "h", 0.5).total
    assert tm.entries[0, 1] == pytest.approx(S_p)
    assert T.level0_rho(model, 0.0, 0.5) == pytest.approx(math.sqrt(S_p * S_h))
    res = T.power_iterate(tm)
    assert res.rho == pytest.approx(T.level0_rho(model, 0.0, 0.5), rel=1e-12)
    assert res.residual <= 1e-8 and np.all(res.eigenfunction > 0)


def test_junction_scaling():
    model = SchottkyModel(CuspMetric(0.0, UProfile.lemma22(1.5)), l_h=9.0, c=0.4)
    plain = T.level0_rho(model.with_c(0.0), 1.0, 0.6)
    assert T.level0_rho(model, 1.0, 0.6) == pytest.approx(plain * math.exp(0.6 * 0.4))


def test_below_half_is_infinite(calibrated15):
    _, model, _ = calibrated15
    tm = T.build_level0(model, 0.0, 0.45)
    assert tm.infinite and T.level0_rho(model, 0.0, 0.45) == math.inf
    with pytest.raises(SpectralError):
        T.power_iterate(tm)
    assert T.divergence_diagnostic(tm).verdict == DIVERGES


def test_rho_increasing_in_a(calibrated15):
    _, model, _ = calibrated15
    r = [T.level0_rho(model, a, 0.55) for a in np.linspace(0, 8, 17)]
    assert all(x < y for x, y in zip(r, r[1:]))


def test_rho_decreasing_in_s(calibrated15):
    _, model, _ = calibrated15
    r = [T.level0_rho(model, 1.0, s) for s in np.linspace(0.5, 2.0, 16)]
    assert all(x > y for x, y in zip(r, r[1:]))


def test_rho_continuous_in_a(calibrated15):
    _, model, a_star = calibrated15
    gaps = [abs(T.level0_rho(model, a_star + h, 0.5) - T.level0_rho(model, a_star, 0.5))
            for h in (1e-1, 1e-2, 1e-3, 1e-4)]
    assert all(x > y for x, y in zip(gaps, gaps[1:])) and gaps[-1] < 1e-5


def test_positivity_preserving(calibrated15):
    _, model, _ = calibrated15
    tm = T.build_level1(model, 1.0, 0.5, depth=1, M=10)
    rng = np.random.default_rng(3)
    for _ in range(20):
        phi = rng.random(tm.size)
        psi = phi + rng.random(tm.size)
        assert np.all(tm.matvec(phi) <= tm.matvec(psi))


def test_level1_entries_and_alternation(calibrated15):
    _, model, _ = calibrated15
    tm = T.build_level1(model, 1.0, 0.5, depth=2, M=6)
    coo = tm.entries.tocoo()
    assert np.all(coo.data >= 0)
    n_local = tm.size // 2
    assert np.all((coo.row < n_local) != (coo.col < n_local))
    assert tm.states[0] == "h^1 p^1" and tm.states[n_local] == "p^1 h^1"
    assert tm.states[n_local - 1] == "h^-T p^-T"
    rows, cols, vals = zip(*tm.triplets()[:3])
    assert rows == (0, 0, 0)


def _direct_row(model, s, x, n_max):
    """Transfer operator applied to 1 at x: explicit sum of weights over |n| <= n_max."""
    letter = "p" if x.cell == "h" else "h"
    total = []
    for n in range(1, n_max + 1):
        for sign in (1, -1):
            total.append(math.exp(-s * model.busemann(Word.letter(letter, sign * n), x)))
    return math.fsum(total)


def test_level1_row_sums_match_direct_evaluation():
    model = SchottkyModel(CuspMetric(0.5, UProfile.lemma22(1.5)), l_h=9.0, c=0.3)
    s = 3.0                    # terms decay like n^-6, so 2e4 explicit terms suffice
    tm = T.build_level1(model, 0.5, s, depth=1, M=20)
    sums = np.asarray(tm.entries.sum(axis=1)).ravel()
    for idx in (0, 7, tm.size // 2 + 3, tm.size - 1):
        cell = "h" if idx < tm.size // 2 else "p"
        label = tm.states[idx].replace("-T", "-21").replace("T", "21")
        x = BoundaryPoint(Word.parse(label))
        assert x.cell == cell
        direct = _direct_row(model, s, x, 20_000)
        assert sums[idx] == pytest.approx(direct, rel=1e-10)


def test_level1_row_sums_at_half(calibrated15):
    _, model, _ = calibrated15
    tm = T.build_level1(model, 0.0, 0.5, depth=1, M=50)
    sums = np.asarray(tm.entries.sum(axis=1)).ravel()
    n = tm.size // 2
    assert np.allclose(sums[:n], one_letter_sum(model, "p", 0.5).total, rtol=1e-12)
    assert np.allclose(sums[n:], one_letter_sum(model, "h", 0.5).total, rtol=1e-12)


def test_level1_matches_level0(calibrated15):
    _, model, a_star = calibrated15
    for a in (0.0, a_star, a_star + 3):
        r0 = T.power_iterate(T.build_level0(model, a, 0.5))
        r1 = T.power_iterate(T.build_level1(model, a, 0.5, depth=1))
        r2 = T.power_iterate(T.build_level1(model, a, 0.5, depth=2))
        assert abs(r1.rho - r2.rho) <= 0.02
        assert r1.rho == pytest.approx(r0.rho, rel=1e-10)
        for r in (r1, r2):
            assert r.residual <= 1e-8 and np.all(r.eigenfunction > 0)


def test_level_sign_consistency(calibrated15):
    _, model, a_star = calibrated15
    for a in (a_star - 0.5, a_star + 0.5):
        r0 = T.level0_rho(model, a, 0.5)
        r1 = T.power_iterate(T.build_level1(model, a, 0.5)).rho
        assert np.sign(r0 - 1) == np.sign(r1 - 1)


def test_level1_guards(calibrated15):
    _, model, _ = calibrated15
    with pytest.raises(BudgetError):
        T.build_level1(model, 0.0, 0.5, depth=3, M=50)
    with pytest.raises(DomainError):
        T.build_level1(model, 0.0, 0.5, depth=0)
    with pytest.raises(DomainError):
        T.build_level1(model, 0.0, 0.5, M=1)


def test_divergence_diagnostic_cases(calibrated15):
    conv = T.divergence_diagnostic(dense([[0, 0.9], [0.9, 0]]))
    assert conv.verdict == CONVERGES
    assert conv.tail_bound == pytest.approx(0.81 / 0.19)
    assert T.divergence_diagnostic(dense([[0, 1.1], [1.1, 0]])).verdict == DIVERGES
    near = dense([[0, 0.9995], [0.9995, 0]])
    assert T.divergence_diagnostic(near).verdict == DIVERGES
    assert T.divergence_diagnostic(near, k_max=5000).verdict == UNDECIDED
    _, model, a_star = calibrated15
    at = T.divergence_diagnostic(T.build_level0(model, a_star, 0.5))
    assert at.verdict == DIVERGES and at.min_norm >= at.threshold > 0


def test_holder_diagnostic(calibrated15):
    _, model, _ = calibrated15
    model = model.with_c(0.2)
    rep = T.holder_diagnostic(model, 1.0, 0.5, omega=0.5, sample_size=10, n_max=100)
    assert rep.max_seminorm == 0.0
    assert rep.bounded
    np.testing.assert_allclose(rep.scaled, math.exp(0.5 * 0.2), rtol=1e-12)
    for omega in (0.1, 1.0):
        assert T.holder_diagnostic(model, 1.0, 0.5, omega, 6, 10).max_seminorm == 0.0
    with pytest.raises(DomainError):
        T.holder_diagnostic(model, 1.0, 0.5, omega=1.5)


def test_spectral_report(calibrated15):
    _, model, _ = calibrated15
    tm = T.build_level0(model, 0.0, 0.5)
    rep = T.spectral_report(tm, T.power_iterate(tm))
    assert set(rep) == {"a", "s", "level", "rho", "residual", "iterations", "states"}
