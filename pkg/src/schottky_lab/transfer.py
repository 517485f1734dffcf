"""Discretized transfer operators of the two-generator group.

``L phi(x) = sum_gamma sum_n 1[x not in U_gamma] exp(-s b(gamma^n, x)) phi(gamma^n x)``

Level 0 restricts to functions constant on the two ping-pong cells; level 1
works on depth-``d`` cylinders with exponents up to ``M`` plus one tail state
per letter and sign.  Every word alternates letters, so the operator has
period two and its even iterates are used throughout.
"""
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from .errors import BudgetError, DomainError, ModelConsistencyError, SpectralError
from .schottky import BoundaryPoint, Word
from .series import CONVERGES, DIVERGES, UNDECIDED, DEFAULT_TRUNCATION, one_letter_sum

CELLS = ("h", "p")          # state order: U_h first, so row U_h carries the p-weights
MAX_STATES = 100_000
RESIDUAL_TOL = 1e-8
RHO_BAND = 1e-3
TOL_LEVEL0 = 1e-6
TOL_LEVEL1 = 1e-5


@dataclass(frozen=True)
class TransferMatrix:
    level: int
    states: list
    entries: object                 # dense ndarray (level 0) or CSR matrix (level 1)
    params: dict = field(default_factory=dict)
    infinite: bool = False

    @property
    def size(self):
        return len(self.states)

    def matvec(self, v):
        return self.entries @ v

    def triplets(self):
        """Nonzero entries as ``(row, col, value)`` rows."""
        coo = sparse.coo_matrix(self.entries)
        order = np.lexsort((coo.col, coo.row))
        return [(int(coo.row[i]), int(coo.col[i]), float(coo.data[i])) for i in order]


@dataclass(frozen=True)
class SpectralResult:
    rho: float
    eigenfunction: np.ndarray
    residual: float
    iterations: int

    def as_dict(self):
        return {"rho": self.rho, "residual": self.residual, "iterations": self.iterations,
                "eigenfunction_min": float(np.min(self.eigenfunction))
                if self.eigenfunction.size else math.nan}


def _letter_total(model, letter, s, M):
    est = one_letter_sum(model, letter, s, M)
    return est.total if est.verdict == CONVERGES else math.inf


def build_level0(model, a, s, M=DEFAULT_TRUNCATION):
    """2x2 operator on functions constant on ``U_h``, ``U_p``."""
    model = model.with_a(a)
    S_p = _letter_total(model, "p", s, M)
    S_h = _letter_total(model, "h", s, M)
    q = math.exp(s * model.c)
    infinite = not (math.isfinite(S_p) and math.isfinite(S_h))
    entries = np.array([[0.0, S_p * q], [S_h * q, 0.0]])
    params = {"a": a, "s": s, "M": M, "kappa": model.metric.profile.kappa,
              "S_p": S_p, "S_h": S_h, **model.as_dict()}
    return TransferMatrix(0, ["U_h", "U_p"], entries, params, infinite)


def level0_rho(model, a, s, M=DEFAULT_TRUNCATION):
    """Closed-form spectral radius ``sqrt(S_p S_h) e^{s c}`` of the level-0 operator."""
    tm = build_level0(model, a, s, M)
    if tm.infinite:
        return math.inf
    return math.sqrt(tm.entries[0, 1] * tm.entries[1, 0])


def _symbols(M):
    """Exponent symbols of one syllable; ``+-(M+1)`` stand for the lumped tails."""
    pos = np.arange(1, M + 2)
    return np.concatenate([pos, -pos])


def _cylinder_word(cell, exps):
    letters = CELLS if cell == 0 else CELLS[::-1]
    return Word(tuple((letters[i % 2], int(e)) for i, e in enumerate(exps)))


def _state_label(cell, exps, M):
    letters = CELLS if cell == 0 else CELLS[::-1]
    parts = []
    for i, e in enumerate(exps):
        sym = ("T" if e > 0 else "-T") if abs(e) == M + 1 else str(int(e))
        parts.append(f"{letters[i % 2]}^{sym}")
    return " ".join(parts)


def build_level1(model, a, s, depth=1, M=50, M_tail=DEFAULT_TRUNCATION, check_sample=32):
    """Operator on depth-``depth`` cylinders.

    Transition weights come from ``busemann`` on cylinder representatives.  In
    the additive word model they do not depend on the source cylinder beyond
    its cell, which is verified on a deterministic sample before the weights
    are broadcast.
    """
    if depth < 1:
        raise DomainError("depth must be at least 1")
    if M < 2:
        raise DomainError("M must be at least 2")
    B = 2 * M + 2
    n_local = B ** depth
    n_states = 2 * n_local
    if n_states >= MAX_STATES:
        raise BudgetError(f"{n_states} cylinder states exceed the limit {MAX_STATES}")
    model = model.with_a(a)
    symbols = _symbols(M)

    # digits of every local state, most significant first
    local = np.arange(n_local)
    digits = np.stack([(local // B ** (depth - 1 - i)) % B for i in range(depth)], axis=1)

    def representative(cell, idx):
        return BoundaryPoint(_cylinder_word(cell, symbols[digits[idx]]))

    infinite = False
    weights = {}
    for target_cell, letter in enumerate(CELLS):
        source_cell = 1 - target_cell
        rep = representative(source_cell, 0)
        tail = 0.5 * _letter_total(model, letter, s, M_tail)
        w = np.empty(B)
        for j, n in enumerate(symbols):
            if abs(n) <= M:
                w[j] = math.exp(-s * model.busemann(Word.letter(letter, int(n)), rep))
        # one-sign tail: half the full sum minus the explicit exponents 1..M
        rest = tail - math.fsum(np.exp(-s * model.syllable_table(letter, M)))
        for j in (M, 2 * M + 1):
            g = Word.letter(letter, int(symbols[j]))
            shift = model.busemann(g, rep) - model.orbit_distance(g)
            w[j] = math.exp(-s * shift) * rest if math.isfinite(rest) else math.inf
        if not np.all(np.isfinite(w)):
            infinite = True
        weights[letter] = w
        _check_cell_independence(model, s, letter, source_cell, symbols, digits, w, M,
                                 check_sample)

    rows, cols, data = [], [], []
    for source_cell in (0, 1):
        target_cell = 1 - source_cell
        letter = CELLS[target_cell]
        src = source_cell * n_local + local
        dst_base = target_cell * n_local + local // B
        rows.append(np.repeat(src, B))
        cols.append((dst_base[:, None] + np.arange(B)[None, :] * B ** (depth - 1)).ravel())
        data.append(np.tile(weights[letter], n_local))
    rows, cols, data = (np.concatenate(x) for x in (rows, cols, data))
    if infinite:
        data = np.where(np.isfinite(data), data, 0.0)
    entries = sparse.csr_matrix((data, (rows, cols)), shape=(n_states, n_states))
    states = [_state_label(cell, symbols[digits[i]], M)
              for cell in (0, 1) for i in range(n_local)]
    params = {"a": a, "s": s, "depth": depth, "M": M, "M_tail": M_tail,
              "kappa": model.metric.profile.kappa, **model.as_dict()}
    return TransferMatrix(1, states, entries, params, infinite)


def _check_cell_independence(model, s, letter, source_cell, symbols, digits, w, M, sample):
    n_local = digits.shape[0]
    picks = np.unique(np.linspace(0, n_local - 1, min(sample, n_local)).astype(int))
    probe = [j for j in (0, 1, M - 1, M + 1) if abs(symbols[j]) <= M]
    for idx in picks:
        rep = BoundaryPoint(_cylinder_word(source_cell, symbols[digits[idx]]))
        for j in probe:
            val = math.exp(-s * model.busemann(Word.letter(letter, int(symbols[j])), rep))
            if abs(val - w[j]) > 1e-12 * max(1.0, abs(w[j])):
                raise ModelConsistencyError(
                    f"transition weight of {letter}^{symbols[j]} depends on the cylinder")


def power_iterate(matrix, tol=1e-12, max_iter=100_000):
    """Leading eigenvalue and positive eigenfunction of a nonnegative operator.

    Iterates ``L^2`` from the all-ones vector with sup normalisation; the
    eigenfunction of ``L`` is then ``v + L v / rho``.
    """
    if matrix.infinite:
        raise SpectralError("operator has infinite entries")
    L = matrix.entries
    n = L.shape[0]
    v = np.ones(n)
    prev = math.inf
    rho2 = math.nan
    for it in range(1, max_iter + 1):
        w = L @ (L @ v)
        rho2 = float(v @ w) / float(v @ v)
        top = float(np.max(w))
        if not (top > 0.0 and math.isfinite(top)):
            raise SpectralError("iteration collapsed to zero or overflowed")
        v = w / top
        if abs(rho2 - prev) <= tol * max(1.0, rho2):
            result = _finish(L, v, rho2, it)
            if result.residual <= RESIDUAL_TOL * max(1.0, result.rho):
                return result
        prev = rho2
    raise SpectralError(f"power iteration did not converge in {max_iter} steps")


def _finish(L, v, rho2, iterations):
    rho = math.sqrt(rho2)
    phi = v + (L @ v) / rho
    phi = phi / np.max(phi)
    residual = float(np.max(np.abs(L @ phi - rho * phi)))
    if not np.all(phi > 0.0):
        raise SpectralError("leading eigenfunction is not strictly positive")
    return SpectralResult(rho, phi, residual, iterations)


def spectral_report(matrix, spectral):
    return {"a": matrix.params.get("a"), "s": matrix.params.get("s"), "level": matrix.level,
            "rho": spectral.rho, "residual": spectral.residual,
            "iterations": spectral.iterations, "states": matrix.size}


@dataclass(frozen=True)
class DivergenceReport:
    verdict: str
    rho: float
    tail_bound: float           # bound on sum_k |L^{2k} 1| when converging
    min_norm: float             # min_k |L^{2k} 1| over the checked range (band case)
    threshold: float
    k_max: int

    def as_dict(self):
        return dict(self.__dict__)


def divergence_diagnostic(matrix, k_max=100, spectral=None, band=RHO_BAND):
    """Convergence of ``sum_k |L^{2k} 1|_inf`` from the spectral data.

    Inside the band around ``rho = 1`` the sum diverges when the even iterates
    stay above ``phi_min / 2``; with a sup-normalised positive eigenfunction
    ``phi`` one has ``L^{2k} 1 >= rho^{2k} phi``.
    """
    if matrix.infinite:
        return DivergenceReport(DIVERGES, math.inf, math.inf, math.inf, 0.0, 0)
    spectral = spectral or power_iterate(matrix)
    rho = spectral.rho
    phi_min = float(np.min(spectral.eigenfunction))
    if rho < 1.0 - band:
        bound = rho * rho / (1.0 - rho * rho) / phi_min
        return DivergenceReport(CONVERGES, rho, bound, math.nan, 0.0, 0)
    if rho > 1.0 + band:
        return DivergenceReport(DIVERGES, rho, math.inf, math.nan, 0.0, 0)
    L = matrix.entries
    v = np.ones(L.shape[0])
    norms = []
    for _ in range(k_max):
        v = L @ (L @ v)
        norms.append(float(np.max(v)))
    threshold = 0.5 * phi_min
    min_norm = min(norms)
    verdict = DIVERGES if min_norm >= threshold else UNDECIDED
    return DivergenceReport(verdict, rho, math.inf if verdict == DIVERGES else math.nan,
                            min_norm, threshold, k_max)


@dataclass(frozen=True)
class HolderReport:
    omega: float
    n: np.ndarray
    seminorm: np.ndarray        # max over letters and signs of [w(gamma^n, .)]_omega
    scaled: np.ndarray          # e^{s d(gamma^n)} (|w|_inf + [w]_omega)
    pairs: int
    bounded: bool

    @property
    def max_seminorm(self):
        return float(np.max(self.seminorm))

    def as_dict(self):
        return {"omega": self.omega, "pairs": self.pairs, "bounded": self.bounded,
                "max_seminorm": self.max_seminorm, "max_scaled": float(np.max(self.scaled))}


def _random_points(rng, cell, count, depth, max_exp):
    pts = set()
    while len(pts) < count:
        exps = rng.integers(1, max_exp + 1, size=depth) * rng.choice((-1, 1), size=depth)
        pts.add(BoundaryPoint(_cylinder_word(cell, exps)))
    return sorted(pts, key=str)


def holder_diagnostic(model, a, s, omega=1.0, sample_size=32, n_max=100, kappa=None,
                      seed=0, depth=6, max_exp=5):
    """Empirical Holder seminorms of the weights ``exp(-s b(gamma^n, .))``."""
    if not 0.0 < omega <= 1.0:
        raise DomainError("omega must lie in ]0, 1]")
    model = model.with_a(a)
    kappa = model.metric.profile.kappa if kappa is None else kappa
    rng = np.random.default_rng(seed)
    samples = {cell: _random_points(rng, cell, sample_size, depth, max_exp) for cell in (0, 1)}
    ns = np.arange(1, n_max + 1)
    semi = np.zeros(n_max)
    scaled = np.zeros(n_max)
    pairs = 0
    for target_cell, letter in enumerate(CELLS):
        pts = samples[1 - target_cell]
        dists = [[model.visual_distance(kappa, x, y) ** omega for y in pts] for x in pts]
        for i, n in enumerate(ns):
            for sign in (1, -1):
                g = Word.letter(letter, int(sign * n))
                w = [math.exp(-s * model.busemann(g, x)) for x in pts]
                sup_w = max(w)
                coef = 0.0
                for p in range(len(pts)):
                    for r in range(p + 1, len(pts)):
                        if dists[p][r] > 0.0:
                            coef = max(coef, abs(w[p] - w[r]) / dists[p][r])
                semi[i] = max(semi[i], coef)
                scale = math.exp(s * model.orbit_distance(g))
                scaled[i] = max(scaled[i], scale * (sup_w + coef))
        pairs += len(pts) * (len(pts) - 1) // 2
    half = n_max // 2
    bounded = bool(np.max(scaled[half:]) <= 1.1 * np.max(scaled[:max(half, 1)]))
    return HolderReport(omega, ns, semi, scaled, pairs, bounded)
