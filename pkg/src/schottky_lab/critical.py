"""Critical exponents, the critical depth a*, and regime classification.

All solving uses the level-0 spectral radius ``rho(a, s)``, which is
nonincreasing in ``s`` and nondecreasing in ``a``; both monotonicities are
checked on grids before any bisection trusts them.
"""
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import transfer
from .errors import (AccuracyError, CalibrationError, DomainError, ModelConsistencyError,
                     RangeError)
from .series import CONVERGES, DIVERGES, UNDECIDED, DEFAULT_TRUNCATION, one_letter_sum, \
    parabolic_series, ps_finiteness

S_PARABOLIC = 0.5
S_MAX = 2.0
PGC_BAND = 5e-3
RHO_TOL = 1e-3
MONOTONE_SLACK = 1e-12


@dataclass
class Trace:
    """Every ``(a, s, rho)`` evaluated by a solver, in evaluation order."""
    rows: list = field(default_factory=list)

    def add(self, a, s, rho, level):
        self.rows.append((a, s, rho, level))


def rho(model, a, s, level=0, depth=1, M=DEFAULT_TRUNCATION, M_cyl=50, trace=None):
    """Leading eigenvalue of the operator at ``(a, s)``; ``inf`` when a sum diverges."""
    if level == 0:
        value = transfer.level0_rho(model, a, s, M)
    elif level == 1:
        tm = transfer.build_level1(model, a, s, depth, M_cyl, M)
        value = math.inf if tm.infinite else transfer.power_iterate(tm).rho
    else:
        raise DomainError(f"unknown operator level {level}")
    if trace is not None:
        trace.add(a, s, value, level)
    return value


def calibrate_h(model, a=0.0, s=S_PARABOLIC, k_max=100_000, M=DEFAULT_TRUNCATION):
    """Smallest power ``k`` of the hyperbolic generator making the group converge.

    Returns ``(k, model with l_h multiplied by k)``.
    """
    wp = one_letter_sum(model.with_a(a), "p", s, M)
    if wp.verdict != CONVERGES:
        raise CalibrationError(
            f"parabolic sum is {wp.verdict} at s={s}; no hyperbolic power can compensate")
    S_p = wp.total
    q2 = math.exp(2.0 * s * model.c)
    for k in range(1, k_max + 1):
        S_h = one_letter_sum(model.with_l_h(k * model.l_h), "h", s, M).total
        if S_p * S_h * q2 < 1.0:
            return k, model.with_l_h(k * model.l_h)
    raise CalibrationError(f"no power up to {k_max} calibrates the model")


def _assert_monotone(values, increasing, what):
    v = np.asarray(values, dtype=float)
    finite = np.isfinite(v)
    steps = np.diff(v[finite])
    bad = steps < -MONOTONE_SLACK * np.abs(v[finite][1:]) if increasing else \
        steps > MONOTONE_SLACK * np.abs(v[finite][1:])
    if np.any(bad):
        raise ModelConsistencyError(f"rho is not monotone in {what} on the check grid")


def find_delta(model, a, tol=1e-6, level=0, s_max=S_MAX, grid_points=9, trace=None, **kw):
    """``sup {s : rho(a, s) >= 1}`` by bisection on ``[1/2, s_max]``, clamped at 1/2."""
    if not tol > 0.0:
        raise DomainError("tol must be positive")
    grid = np.linspace(S_PARABOLIC, s_max, grid_points)
    values = [rho(model, a, s, level, trace=trace, **kw) for s in grid]
    _assert_monotone(values, False, "s")
    if values[0] <= 1.0:
        return S_PARABOLIC
    if values[-1] >= 1.0:
        raise RangeError(f"rho(a={a}, s={s_max}) >= 1; raise s_max")
    idx = int(np.argmax(np.asarray(values) < 1.0))
    lo, hi = grid[idx - 1], grid[idx]
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if rho(model, a, mid, level, trace=trace, **kw) >= 1.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def find_a_star(model, a_max=64.0, tol=1e-10, grid_points=20, trace=None):
    """Depth at which ``rho(a, 1/2)`` crosses 1."""
    s = S_PARABOLIC
    r0 = rho(model, 0.0, s, trace=trace)
    if not r0 < 1.0:
        raise CalibrationError(f"rho(0, 1/2) = {r0} >= 1; calibrate the model first")
    lo, hi = 0.0, 1.0
    while rho(model, hi, s, trace=trace) <= 1.0:
        lo, hi = hi, 2.0 * hi
        if hi > a_max:
            raise RangeError(f"rho(a, 1/2) stays below 1 up to a_max={a_max}")
    grid = np.linspace(0.0, hi, grid_points)
    _assert_monotone([rho(model, a, s, trace=trace) for a in grid], True, "a")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if rho(model, mid, s, trace=trace) >= 1.0:
            hi = mid
        else:
            lo = mid
    a_star = 0.5 * (lo + hi)
    r = rho(model, a_star, s, trace=trace)
    if abs(r - 1.0) > RHO_TOL:
        raise AccuracyError(f"rho(a*, 1/2) = {r} is not within {RHO_TOL} of 1")
    return a_star


def length_sums(x, y, q, K):
    """Sums over alternating words of exactly ``1..K`` syllables."""
    out = np.empty(K)
    start_p, start_h = x, y
    for k in range(1, K + 1):
        out[k - 1] = start_p + start_h
        if k % 2:
            start_p, start_h = start_p * y * q, start_h * x * q
        else:
            start_p, start_h = start_p * x * q, start_h * y * q
    return out


@dataclass(frozen=True)
class Certificate:
    C_emp: float
    rho_emp: float
    ratios: np.ndarray

    def __iter__(self):
        return iter((self.C_emp, self.rho_emp))


def monotonicity_certificate(model, a, a_prime, k_max=20, M=DEFAULT_TRUNCATION):
    """Fit ``R_k <= C rho^k`` for the ratio of length-``2k`` sums at depths ``a``, ``a'``."""
    if a > a_prime:
        raise DomainError("need a <= a_prime")
    if k_max < 2:
        raise DomainError("k_max must be at least 2")
    if a == a_prime:
        return Certificate(1.0, 1.0, np.ones(k_max))
    s = S_PARABOLIC
    q = math.exp(s * model.c)
    y = one_letter_sum(model, "h", s, M).total
    sums = []
    for depth in (a, a_prime):
        wp = one_letter_sum(model.with_a(depth), "p", s, M)
        if wp.verdict != CONVERGES:
            raise ModelConsistencyError(f"parabolic sum {wp.verdict} at a={depth}")
        sums.append(length_sums(wp.total, y, q, 2 * k_max)[1::2])
    ks = np.arange(1, k_max + 1)
    log_r = np.log(sums[0]) - np.log(sums[1])
    slope, _ = np.polyfit(ks, log_r, 1)
    rho_emp = math.exp(slope)
    C_emp = float(np.exp(np.max(log_r - ks * slope)))
    if not rho_emp < 1.0:
        raise ModelConsistencyError(f"certificate failed: rho_emp = {rho_emp} >= 1")
    return Certificate(C_emp, rho_emp, np.exp(log_r))


@dataclass(frozen=True)
class RegimeReport:
    a: float
    alpha: float
    c: float
    l_h: float
    delta: float
    rho_at_half: float
    type: str
    pgc: str
    ps_measure: str
    divergence_verdict: str
    parabolic_verdict: str
    level: int = 0

    def as_dict(self):
        return asdict(self)


def classify(model, a, level=0, band=PGC_BAND, delta_tol=1e-6, trace=None):
    """Regime of the calibrated model at depth ``a``."""
    delta = find_delta(model, a, tol=delta_tol, level=level, trace=trace)
    r_half = rho(model, a, S_PARABOLIC, level, trace=trace)
    tm = transfer.build_level0(model, a, delta) if level == 0 else \
        transfer.build_level1(model, a, delta)
    verdict = transfer.divergence_diagnostic(tm).verdict
    kind = {CONVERGES: "convergent", DIVERGES: "divergent"}.get(verdict, UNDECIDED)
    pgc = "fails" if abs(delta - S_PARABOLIC) <= band else "holds"
    metric = model.metric.with_a(a)
    if kind == "divergent" and pgc == "fails":
        measure = ps_finiteness(metric, S_PARABOLIC)
    elif kind == "divergent":
        measure = "finite"
    elif kind == UNDECIDED:
        measure = UNDECIDED
    else:
        measure = "n/a"
    parabolic = parabolic_series(metric, 1, S_PARABOLIC, scale=model.s_p).verdict
    return RegimeReport(a, model.metric.profile.alpha, model.c, model.l_h, delta, r_half,
                        kind, pgc, measure, verdict, parabolic, level)


@dataclass(frozen=True)
class BracketedRegime:
    """Classification repeated for each junction defect; fields agree or are undecided."""
    rows: tuple
    type: str
    pgc: str
    ps_measure: str

    @property
    def agreed(self):
        return UNDECIDED not in (self.type, self.pgc, self.ps_measure)

    def as_dict(self):
        return {"type": self.type, "pgc": self.pgc, "ps_measure": self.ps_measure,
                "rows": [r.as_dict() for r in self.rows]}


def classify_bracket(model, a="auto", c_values=(0.0,), level=0, band=PGC_BAND,
                     calibrate=True, trace=None):
    """Classify once per junction defect.

    Each row recalibrates the hyperbolic length for its own ``c``; with
    ``a="auto"`` each row is evaluated at its own critical depth.
    """
    rows = []
    for c in dict.fromkeys(float(x) for x in c_values):
        m = model.with_c(c)
        if calibrate:
            _, m = calibrate_h(m)
        depth = find_a_star(m, trace=trace) if a == "auto" else float(a)
        rows.append(classify(m, depth, level, band, trace=trace))

    def agree(name):
        vals = {getattr(r, name) for r in rows}
        return vals.pop() if len(vals) == 1 else UNDECIDED
    return BracketedRegime(tuple(rows), agree("type"), agree("pgc"), agree("ps_measure"))


def atlas(model, a_grid, level=0, band=PGC_BAND, trace=None):
    """Regime report at every depth of ``a_grid`` for an already calibrated model."""
    grid = np.asarray(a_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0 or np.any(grid < 0):
        raise DomainError("a grid must be a nonempty list of nonnegative depths")
    return [classify(model, float(a), level, band, trace=trace) for a in grid]
