"""Symbolic model of the two-generator group <p, h>.

Group elements are reduced words of syllables ``(letter, exponent)``.  The
orbit distance of a word is additive over syllables,

    d(gamma) = sum_syllables dist(syllable) - c * (syllables - 1),

with ``dist(p^m) = 2 height(|m| s_p)`` and ``dist(h^n) = |n| l_h``.  Boundary
points are finite truncations of infinite reduced words; Busemann functions
and Gromov products are differences of orbit distances that stop depending on
the truncation once it is deep enough.
"""
import math
import re
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import DepthError, DomainError, ModelConsistencyError
from .profiles import CuspMetric

LETTERS = ("p", "h")
STABILITY_TOL = 1e-9
MAX_DEPTH = 64

_SYLLABLE = re.compile(r"^([ph])(?:\^([+-]?\d+))?$")


@dataclass(frozen=True)
class Word:
    syllables: tuple = ()

    def __post_init__(self):
        syl = tuple((str(l), int(e)) for l, e in self.syllables)
        for i, (letter, exp) in enumerate(syl):
            if letter not in LETTERS:
                raise DomainError(f"unknown letter {letter!r}")
            if exp == 0:
                raise DomainError("zero exponent in a reduced word")
            if i and syl[i - 1][0] == letter:
                raise DomainError("adjacent syllables share a letter")
        object.__setattr__(self, "syllables", syl)

    @classmethod
    def identity(cls):
        return cls(())

    @classmethod
    def letter(cls, letter, exp=1):
        return cls(((letter, exp),))

    @classmethod
    def parse(cls, text):
        """Parse ``"p^2 h^-3 p"``; the empty string or ``"e"`` is the identity."""
        text = text.strip()
        if text in ("", "e", "1"):
            return cls.identity()
        out = []
        for token in text.split():
            m = _SYLLABLE.match(token)
            if not m:
                raise DomainError(f"bad syllable {token!r}")
            out.append((m.group(1), int(m.group(2) or 1)))
        return cls.identity().times_raw(out)

    def times_raw(self, syllables):
        """Append syllables one at a time with free reduction."""
        out = list(self.syllables)
        for letter, exp in syllables:
            if exp == 0:
                continue
            if out and out[-1][0] == letter:
                merged = out[-1][1] + exp
                out.pop()
                if merged:
                    out.append((letter, merged))
            else:
                out.append((letter, exp))
        return Word(tuple(out))

    def __mul__(self, other):
        return self.times_raw(other.syllables)

    def inverse(self):
        return Word(tuple((l, -e) for l, e in reversed(self.syllables)))

    def __len__(self):
        return len(self.syllables)

    def __bool__(self):
        return bool(self.syllables)

    def __getitem__(self, item):
        if isinstance(item, slice):
            return Word(self.syllables[item])
        return self.syllables[item]

    @property
    def first_letter(self):
        return self.syllables[0][0] if self.syllables else None

    @property
    def last_letter(self):
        return self.syllables[-1][0] if self.syllables else None

    def __str__(self):
        if not self.syllables:
            return "e"
        return " ".join(f"{l}^{e}" for l, e in self.syllables)


def reduce(w1, w2):
    """Reduced product ``w1 * w2``."""
    return w1 * w2


def cancellation_depth(g, w):
    """Number of leading syllables of ``w`` altered by left multiplication by ``g``."""
    i, j = len(g) - 1, 0
    while i >= 0 and j < len(w):
        (lg, eg), (lw, ew) = g[i], w[j]
        if lg != lw:
            return j
        if eg + ew != 0:
            return j + 1
        i -= 1
        j += 1
    return j


@dataclass(frozen=True)
class BoundaryPoint:
    """A limit point coded by the first ``depth`` syllables of an infinite reduced word."""
    code: Word

    def __post_init__(self):
        if len(self.code) < 1:
            raise DepthError("a boundary point needs at least one syllable")

    @property
    def depth(self):
        return len(self.code)

    @property
    def cell(self):
        """Ping-pong cell ``U_p`` or ``U_h`` containing the point."""
        return self.code.first_letter

    @classmethod
    def periodic(cls, word, depth):
        """The point ``word word word ...`` truncated to ``depth`` syllables."""
        if not word:
            raise DomainError("cannot repeat the identity")
        if depth < 1:
            raise DepthError("depth must be at least 1")
        if len(word) >= depth:
            return cls(word[:depth])
        if len(word) > 1 and word.first_letter == word.last_letter:
            raise DomainError(f"{word} is not cyclically reduced")
        if len(word) == 1:
            raise DomainError("a single syllable cannot be repeated in reduced form")
        syl = []
        while len(syl) < depth:
            syl.extend(word.syllables)
        return cls(Word(tuple(syl[:depth])))

    @classmethod
    def parse(cls, text):
        """``"p^2 h^-3 @5"``: syllables, optionally extended periodically to depth 5."""
        if "@" in text:
            body, _, depth = text.partition("@")
            return cls.periodic(Word.parse(body), int(depth))
        return cls(Word.parse(text))

    def truncate(self, depth):
        if depth < 1 or depth > self.depth:
            raise DepthError(f"cannot truncate depth {self.depth} code to {depth}")
        return BoundaryPoint(self.code[:depth])

    def act(self, g):
        """``g . x``: reduced product of ``g`` with the code."""
        if cancellation_depth(g, self.code) >= self.depth:
            raise DepthError(f"{g} cancels the entire code of depth {self.depth}")
        return BoundaryPoint(g * self.code)

    def __str__(self):
        return f"{self.code} @{self.depth}"


@dataclass(frozen=True)
class SchottkyModel:
    """Generator geometry plus a cusp metric; induces all orbit distances."""
    metric: CuspMetric
    s_p: float = 1.0
    l_h: float = 1.0
    c: float = 0.0
    _cache: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    def __post_init__(self):
        if not self.s_p > 0.0:
            raise DomainError("s_p must be positive")
        if not self.l_h > 0.0:
            raise DomainError("l_h must be positive")
        if not self.c >= 0.0:
            raise DomainError("the junction defect must be nonnegative")

    @property
    def a(self):
        return self.metric.a

    def with_a(self, a):
        return SchottkyModel(self.metric.with_a(a), self.s_p, self.l_h, self.c)

    def with_c(self, c):
        return SchottkyModel(self.metric, self.s_p, self.l_h, c)

    def with_l_h(self, l_h):
        return SchottkyModel(self.metric, self.s_p, l_h, self.c)

    def parabolic_distance(self, m):
        """``2 height(|m| s_p)``."""
        m = abs(int(m))
        if m == 0:
            return 0.0
        logD = math.log(m) + math.log(self.s_p)
        return 2.0 * (logD + kernels.height_excess(*self.metric.params, logD))

    def hyperbolic_distance(self, n):
        return abs(int(n)) * self.l_h

    def syllable_distance(self, letter, exp):
        if letter == "p":
            return self.parabolic_distance(exp)
        return self.hyperbolic_distance(exp)

    def syllable_table(self, letter, M):
        """Distances of ``letter^n`` for ``n = 1..M`` (each value twice in the group)."""
        key = (letter, int(M))
        if key not in self._cache:
            n = np.arange(1, M + 1, dtype=float)
            if letter == "p":
                logD = np.log(n) + math.log(self.s_p)
                table = 2.0 * (logD + kernels.height_excess_array(*self.metric.params, logD))
            else:
                table = n * self.l_h
            table.setflags(write=False)
            self._cache[key] = table
        return self._cache[key]

    def orbit_distance(self, word):
        if not word:
            return 0.0
        total = math.fsum(self.syllable_distance(l, e) for l, e in word.syllables)
        d = total - self.c * (len(word) - 1)
        if d < 0.0:
            raise ModelConsistencyError(
                f"junction defect {self.c} makes d({word}) = {d} negative")
        return d

    def distance_difference(self, w1, w2):
        """``d(w1) - d(w2)`` with the common syllable suffix cancelled exactly."""
        n = 0
        while n < min(len(w1), len(w2)) and w1[len(w1) - 1 - n] == w2[len(w2) - 1 - n]:
            n += 1
        head1, head2 = w1.syllables[:len(w1) - n], w2.syllables[:len(w2) - n]
        terms = [self.syllable_distance(l, e) for l, e in head1]
        terms += [-self.syllable_distance(l, e) for l, e in head2]
        return math.fsum(terms) - self.c * (len(w1) - len(w2))

    # -- boundary quantities ----------------------------------------------

    def busemann(self, g, x):
        """``b(g, x) = d(g.x) - d(x)`` on the truncated code."""
        return self.busemann_report(g, x)[0]

    def busemann_report(self, g, x):
        """Busemann value and whether it is unchanged one level shallower."""
        j = cancellation_depth(g, x.code)
        if j >= x.depth:
            raise DepthError(f"{g} cancels the whole code of {x}")
        value = self.distance_difference(g * x.code, x.code)
        stable = False
        if x.depth > 1 and j < x.depth - 1:
            shallow = x.truncate(x.depth - 1)
            other = self.distance_difference(g * shallow.code, shallow.code)
            stable = abs(other - value) <= STABILITY_TOL * max(1.0, abs(value))
        return value, stable

    def gromov_product(self, x, y):
        """``(x|y) = (d(x) + d(y) - d(x^-1 y)) / 2`` on the truncated codes.

        Returns ``inf`` when the codes coincide.
        """
        if x.code == y.code:
            return math.inf
        return 0.5 * (self.orbit_distance(x.code) + self.orbit_distance(y.code)
                      - self.orbit_distance(x.code.inverse() * y.code))

    def gromov_product_stable(self, x, y, max_depth=MAX_DEPTH):
        """Gromov product with a check that one more syllable would not change it."""
        depth = min(x.depth, y.depth, max_depth)
        xs, ys = x.truncate(depth), y.truncate(depth)
        value = self.gromov_product(xs, ys)
        if math.isinf(value):
            return value
        if depth < 2:
            raise DepthError("Gromov product needs depth at least 2 to certify stability")
        shallow = self.gromov_product(xs.truncate(depth - 1), ys.truncate(depth - 1))
        if not abs(shallow - value) <= STABILITY_TOL * max(1.0, abs(value)):
            raise DepthError(f"Gromov product of {x} and {y} not stable at depth {depth}")
        return value

    def visual_distance(self, kappa, x, y):
        """``D(x, y) = exp(-kappa (x|y))``, zero for equal codes."""
        if not 0.0 < kappa <= 1.0:
            raise DomainError("kappa must lie in ]0, 1]")
        g = self.gromov_product(x, y)
        return 0.0 if math.isinf(g) else math.exp(-kappa * g)

    def depth_ratios(self, a_prime, pairs):
        """``(x|y)_a / (x|y)_{a'}`` over pairs whose products are finite and positive.

        Both extremes tend to 1 as ``a' -> a``.  Pairs that part inside a
        parabolic syllable can dip slightly below 1, since their product
        subtracts the distance of the differing exponent.
        """
        if a_prime < self.a:
            raise DomainError("need a_prime >= a")
        deeper = self.with_a(a_prime)
        out = []
        for x, y in pairs:
            g, g2 = self.gromov_product(x, y), deeper.gromov_product(x, y)
            if math.isfinite(g) and g > 0.0 and g2 > 0.0:
                out.append(g / g2)
        return np.array(out)

    def visual_exponent(self, pairs):
        """Largest ``w`` in ]0, 1] with ``D_0^{1/w} <= D_a <= D_0^w`` on the sample.

        Both visual distances share ``kappa``, so it cancels from the exponent.
        """
        shallow = self.with_a(0.0)
        worst = 1.0
        for x, y in pairs:
            g0, g = shallow.gromov_product(x, y), self.gromov_product(x, y)
            if math.isfinite(g0) and g0 > 0.0 and g > 0.0:
                r = g / g0
                worst = min(worst, r, 1.0 / r)
        return worst

    def conformal_derivative(self, kappa, g, x):
        """``|g'(x)| = exp(-kappa b(g, x))``."""
        return math.exp(-kappa * self.busemann(g, x))

    def as_dict(self):
        return {"s_p": self.s_p, "l_h": self.l_h, "c": self.c, "a": self.a,
                **self.metric.profile.as_dict()}
