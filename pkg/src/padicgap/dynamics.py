"""Rational self-maps of P^1 with good reduction over Z_p.

Maps are pairs of homogeneous integer forms.  ``phi[i]`` is the coefficient
of ``a**i * b**(d-i)``, so on the affine chart z = a/b the map is
``sum(phi[i] z**i) / sum(psi[i] z**i)``.  Residue classes of P^1(F_p) are
the integers 0..p-1 and ``INF``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from math import gcd

from .errors import (
    BadReduction,
    ClassNotStable,
    DenominatorNotUnit,
    PrecisionExhausted,
)
from .padic_core import PadicInt, Prime, from_rational, vp
from .power_series import (
    TruncatedSeries,
    compose,
    derivative,
    evaluate,
    reciprocal,
)

INF = "inf"


def _det(mat: list[list[int]]) -> int:
    """Fraction-free Bareiss determinant of an integer matrix."""
    n = len(mat)
    if n == 0:
        return 1
    m = [row[:] for row in mat]
    sign, prev = 1, 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for i in range(k + 1, n):
                if m[i][k]:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def homogeneous_resultant(phi, psi) -> int:
    """Resultant of two binary forms of equal degree (Sylvester determinant)."""
    d = len(phi) - 1
    if d == 0:
        return 1
    # descending powers of a
    A, B = list(reversed(phi)), list(reversed(psi))
    size = 2 * d
    rows = []
    for i in range(d):
        rows.append([0] * i + A + [0] * (size - d - 1 - i))
    for i in range(d):
        rows.append([0] * i + B + [0] * (size - d - 1 - i))
    return _det(rows)


@dataclass(frozen=True)
class RationalMap:
    phi: tuple
    psi: tuple

    def __post_init__(self):
        if len(self.phi) != len(self.psi) or len(self.phi) < 2:
            raise ValueError("phi and psi must be forms of the same degree d >= 1")
        g = reduce(gcd, (abs(c) for c in self.phi + self.psi))
        if g == 0:
            raise ValueError("zero map")
        if g != 1:
            object.__setattr__(self, "phi", tuple(c // g for c in self.phi))
            object.__setattr__(self, "psi", tuple(c // g for c in self.psi))
        if self.resultant() == 0:
            raise ValueError("phi and psi share a common factor")

    @classmethod
    def from_coeffs(cls, num, den=(1,)) -> "RationalMap":
        """Map z -> num(z)/den(z) from ascending integer coefficient lists."""
        num, den = list(num), list(den)
        while len(num) > 1 and num[-1] == 0:
            num.pop()
        while len(den) > 1 and den[-1] == 0:
            den.pop()
        d = max(len(num), len(den)) - 1
        num += [0] * (d + 1 - len(num))
        den += [0] * (d + 1 - len(den))
        return cls(tuple(num), tuple(den))

    @classmethod
    def polynomial(cls, coeffs) -> "RationalMap":
        return cls.from_coeffs(coeffs, (1,))

    @property
    def degree(self) -> int:
        return len(self.phi) - 1

    def resultant(self) -> int:
        return homogeneous_resultant(self.phi, self.psi)

    def apply_hom(self, a: int, b: int, mod: int | None = None) -> tuple[int, int]:
        d = self.degree
        pa = [1]
        pb = [1]
        for _ in range(d):
            pa.append(pa[-1] * a if mod is None else pa[-1] * a % mod)
            pb.append(pb[-1] * b if mod is None else pb[-1] * b % mod)
        x = sum(c * pa[i] * pb[d - i] for i, c in enumerate(self.phi))
        y = sum(c * pa[i] * pb[d - i] for i, c in enumerate(self.psi))
        if mod is not None:
            x, y = x % mod, y % mod
        return x, y

    def __call__(self, z):
        """Exact evaluation on Q u {INF}."""
        if z == INF:
            a, b = 1, 0
        else:
            z = Fraction(z)
            a, b = z.numerator, z.denominator
        x, y = self.apply_hom(a, b)
        if y == 0:
            return INF
        return Fraction(x, y)

    def __repr__(self):
        return f"RationalMap(phi={list(self.phi)}, psi={list(self.psi)})"


def good_reduction_check(f: RationalMap, p) -> bool:
    return f.resultant() % Prime(p) != 0


@dataclass(frozen=True)
class ProjPoint:
    """A point of P^1(Z_p) normalized so that b = 1 or (a = 1, p | b)."""

    a: PadicInt
    b: PadicInt

    @classmethod
    def make(cls, a: int, b: int, p: int, K: int) -> "ProjPoint":
        mod = p**K
        a, b = a % mod, b % mod
        if b % p:
            return cls(PadicInt.make(a * pow(b, -1, mod), p, K), PadicInt.make(1, p, K))
        if a % p:
            return cls(PadicInt.make(1, p, K), PadicInt.make(b * pow(a, -1, mod), p, K))
        raise PrecisionExhausted("both coordinates divisible by p: not normalized")

    @classmethod
    def from_value(cls, z, p: int, K: int) -> "ProjPoint":
        """From a rational number, ``INF``, or a PadicInt."""
        if z == INF:
            return cls.make(1, 0, p, K)
        if isinstance(z, PadicInt):
            return cls.make(z.value, 1, p, K)
        z = Fraction(z)
        num, den = z.numerator, z.denominator
        v = vp(den, p) or 0
        if v:
            # |z| > 1: the point is [1 : den/num] with p | den/num
            return cls.make(num, den, p, K)
        return cls(from_rational(num, den, p, K), PadicInt.make(1, p, K))

    @property
    def p(self) -> int:
        return self.a.p

    @property
    def K(self) -> int:
        return self.a.K

    def residue(self):
        if self.b.value % self.p:
            return self.a.value % self.p
        return INF

    def is_infinite_chart(self) -> bool:
        return self.b.value % self.p == 0

    def local_coordinate(self, cls) -> PadicInt:
        """eta_cls applied to the point: z - c for finite classes, 1/z at INF."""
        if cls == INF:
            if not self.is_infinite_chart():
                raise ValueError("point not in the class at infinity")
            return self.b
        if self.is_infinite_chart():
            raise ValueError("point not in a finite class")
        return self.a - cls

    def __repr__(self):
        return f"[{self.a.value}:{self.b.value}] (p={self.p}, K={self.K})"


def apply(f: RationalMap, x: ProjPoint) -> ProjPoint:
    mod = x.p**x.K
    A, B = f.apply_hom(x.a.value, x.b.value, mod)
    return ProjPoint.make(A, B, x.p, x.K)


@dataclass
class Orbit:
    points: list
    preperiodic: bool  # two entries coincide at precision (observation only)
    repeat: tuple | None = None  # (first index, second index)


def orbit(f: RationalMap, x: ProjPoint, n: int) -> Orbit:
    pts = [x]
    seen = {(x.a.value, x.b.value): 0}
    repeat = None
    for i in range(1, n + 1):
        pts.append(apply(f, pts[-1]))
        key = (pts[-1].a.value, pts[-1].b.value)
        if key in seen and repeat is None:
            repeat = (seen[key], i)
        seen.setdefault(key, i)
    return Orbit(pts, repeat is not None, repeat)


def reduce_class(f: RationalMap, c, p: int):
    """Image of a residue class under the reduction of f mod p."""
    a, b = (1, 0) if c == INF else (c, 1)
    A, B = f.apply_hom(a, b, p)
    if A == 0 and B == 0:
        raise BadReduction(f"f has bad reduction at {p}")
    if B == 0:
        return INF
    return A * pow(B, -1, p) % p


@dataclass(frozen=True)
class ResidueOrbitData:
    ell: int
    k: int
    classes: tuple = ()  # residue classes visited, tail then one cycle


def residue_cycle(f: RationalMap, x: ProjPoint, p) -> ResidueOrbitData:
    p = Prime(p)
    if not good_reduction_check(f, p):
        raise BadReduction(f"f has bad reduction at {p}")
    c = x.residue()
    seen = {}
    path = []
    while c not in seen:
        seen[c] = len(path)
        path.append(c)
        c = reduce_class(f, c, p)
    ell = seen[c]
    return ResidueOrbitData(ell, len(path) - ell, tuple(path))


@dataclass(frozen=True)
class LocalMap:
    eta: object  # residue class moved to [0]; translation or 1/z at INF
    series: TruncatedSeries
    classes: tuple = ()  # classes traversed by the k steps


def _step_series(f: RationalMap, src, dst, p: int, K: int, D: int) -> TruncatedSeries:
    """eta_dst o f o eta_src^{-1} as a series on D(0,1)."""
    d = f.degree
    mod = p**K

    # (a, b) = (z + c, 1) or (1, z); expand phi, psi as polynomials in z
    def form_in_z(coeffs):
        out = [0] * (d * 1 + 1)
        for i, c in enumerate(coeffs):
            if not c:
                continue
            if src == INF:
                # a**i * b**(d-i) = z**(d-i)
                out[d - i] += c
            else:
                # (z + s)**i
                binom = 1
                for j in range(i + 1):
                    out[j] += c * binom * src ** (i - j)
                    binom = binom * (i - j) // (j + 1)
        return out

    A = form_in_z(f.phi)
    B = form_in_z(f.psi)
    if dst == INF:
        num, den = B, A
    else:
        num = [a - dst * b for a, b in zip(A, B)]
        den = B
    if den[0] % p == 0:
        raise DenominatorNotUnit("local denominator is not a unit")
    N = TruncatedSeries.from_ints(num, p, K, D, poly=True)
    Dn = TruncatedSeries.from_ints(den, p, K, D, poly=True)
    s = N * reciprocal(Dn)
    if s.coeffs[0] % p:
        raise ClassNotStable("step does not map the class as expected")
    poly = not any(c % p**K for c in den[1:]) and N.poly
    return TruncatedSeries(p, K, s.coeffs, 0, poly)


def pgl_normalize(f: RationalMap, cls, k: int, p, K: int, D: int) -> LocalMap:
    """Expansion of eta o f^k o eta^{-1} at a class that f^k maps to itself."""
    p = Prime(p)
    if not good_reduction_check(f, p):
        raise BadReduction(f"f has bad reduction at {p}")
    classes = [cls]
    for _ in range(k):
        classes.append(reduce_class(f, classes[-1], p))
    if classes[-1] != cls:
        raise ClassNotStable(f"f^{k} does not map class {cls} to itself")
    series = TruncatedSeries.identity(p, K, D)
    for src, dst in zip(classes, classes[1:]):
        series = compose(_step_series(f, src, dst, p, K, D), series)
    return LocalMap(cls, series, tuple(classes))


@dataclass(frozen=True)
class FixedPointClass:
    tag: str  # "attracting" | "superattracting" | "quasiperiodic"
    y: PadicInt | None = None
    lam: PadicInt | None = None
    e: int | None = None
    beta: PadicInt | None = None
    m: int | None = None
    c_m: PadicInt | None = None


ATTRACTING = "attracting"
SUPERATTRACTING = "superattracting"
QUASIPERIODIC = "quasiperiodic"


def find_fixed_point(series: TruncatedSeries) -> PadicInt:
    """The fixed point in pZ_p of a series with non-unit a0, a1 (Newton)."""
    p, K = series.p, series.K
    d1 = derivative(series)
    y = PadicInt.make(0, p, K)
    for _ in range(2 * K + 2):
        fy = evaluate(series, y).value - y
        if fy.is_zero:
            return y
        slope = evaluate(d1, y).value - 1
        y = y - fy * slope ** -1
    raise PrecisionExhausted("fixed point iteration did not settle")


def expand_at(series: TruncatedSeries, y: PadicInt) -> TruncatedSeries:
    """series(y + z) - y as a series in z."""
    p, K, D = series.p, series.K, series.D
    shift = TruncatedSeries.from_ints([y.value, 1], p, K, D, poly=True)
    return compose(series, shift) - y


def classify_fixed(local: LocalMap | TruncatedSeries, x_local: PadicInt | None = None) -> FixedPointClass:
    series = local.series if isinstance(local, LocalMap) else local
    if x_local is not None and x_local.val < 1:
        raise ValueError("x_local must lie in pZ_p")
    p = series.p
    a1 = series.coeffs[1] if series.D >= 1 else 0
    if a1 % p:
        return FixedPointClass(QUASIPERIODIC)
    y = find_fixed_point(series)
    g = expand_at(series, y)
    lam = g.coeff(1)
    if not lam.is_zero:
        return FixedPointClass(ATTRACTING, y=y, lam=lam, e=lam.val, beta=lam.unit_part())
    for m in range(2, g.D + 1):
        c = g.coeff(m)
        if not c.is_zero:
            return FixedPointClass(SUPERATTRACTING, y=y, lam=lam, m=m, c_m=c)
    raise PrecisionExhausted("multiplier is zero at precision and no c_m certified")
