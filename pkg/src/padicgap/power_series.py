"""Truncated power series over Z_p (and bounded-denominator Q_p).

A :class:`TruncatedSeries` stores residues ``S_i`` modulo ``p**K`` together
with a loss exponent ``loss``; the series it stands for is
``sum(S_i z**i) / p**loss``.  Its coefficients are therefore known modulo
``p**(K - loss)`` and may have valuation as low as ``-loss``.  Any step that
consumes absolute precision multiplies the stored residues by ``p**v`` and
adds ``v`` to ``loss``, so the stored residues are always meaningful mod
``p**K``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Sequence

from . import kernels
from .errors import (
    CompositionDiverges,
    ExpDiverges,
    IndistinguishableFromZero,
    NotInvertible,
    NotPAdicInteger,
    OutsideRadius,
    PrecisionExhausted,
    PrecisionMismatch,
)
from .padic_core import PadicInt, vp

__all__ = [
    "TruncatedSeries",
    "NewtonPolygon",
    "ZeroReport",
    "Evaluation",
    "compose",
    "comp_inverse",
    "derivative",
    "antiderivative",
    "evaluate",
    "newton_polygon",
    "isolate_zeros",
    "log1p",
    "exp",
    "reciprocal",
    "iterate",
]


def _val(x: int, p: int, cap: int) -> int:
    """Valuation of an integer residue, capped at ``cap`` (zero -> cap)."""
    if x == 0:
        return cap
    v = 0
    while x % p == 0 and v < cap:
        x //= p
        v += 1
    return v


@dataclass(frozen=True)
class TruncatedSeries:
    p: int
    K: int
    coeffs: tuple
    loss: int = 0
    poly: bool = False  # coefficients above D are exactly zero
    tail_val: int | None = None  # lower bound on val of coefficients above D

    def __post_init__(self):
        mod = self.p**self.K
        object.__setattr__(self, "coeffs", tuple(int(c) % mod for c in self.coeffs))
        if self.loss < 0:
            raise ValueError("loss must be nonnegative")

    # construction -----------------------------------------------------
    @classmethod
    def from_ints(cls, coeffs: Sequence[int], p: int, K: int, D: int | None = None,
                  *, poly: bool = False, loss: int = 0) -> "TruncatedSeries":
        cs = list(coeffs)
        if D is None:
            D = max(len(cs) - 1, 0)
        if len(cs) > D + 1:
            if poly and any(cs[D + 1:]):
                poly = False
            cs = cs[: D + 1]
        cs += [0] * (D + 1 - len(cs))
        return cls(p, K, tuple(cs), loss, poly)

    @classmethod
    def from_padics(cls, coeffs: Sequence[PadicInt], D: int | None = None) -> "TruncatedSeries":
        p, K = coeffs[0].p, coeffs[0].K
        return cls.from_ints([c.value for c in coeffs], p, K, D)

    @classmethod
    def from_rationals(cls, coeffs: Sequence, p: int, K: int, D: int | None = None,
                       *, poly: bool = False) -> "TruncatedSeries":
        """Series from exact rationals; denominators may carry powers of p."""
        fr = [Fraction(c) for c in coeffs]
        loss = 0
        for c in fr:
            if c:
                v = vp(c.numerator, p) - vp(c.denominator, p)
                loss = max(loss, -v)
        if loss > K:
            raise PrecisionExhausted("denominators exceed the working precision")
        mod = p**K
        ints = []
        for c in fr:
            s = c * p**loss
            ints.append(s.numerator * pow(s.denominator, -1, mod) % mod)
        return cls.from_ints(ints, p, K, D, poly=poly, loss=loss)

    @classmethod
    def monomial(cls, c: int, i: int, p: int, K: int, D: int) -> "TruncatedSeries":
        cs = [0] * (D + 1)
        if i <= D:
            cs[i] = c
        return cls.from_ints(cs, p, K, D, poly=True)

    @classmethod
    def identity(cls, p: int, K: int, D: int) -> "TruncatedSeries":
        return cls.monomial(1, 1, p, K, D)

    @classmethod
    def constant(cls, c, p: int, K: int, D: int) -> "TruncatedSeries":
        c = c.value if isinstance(c, PadicInt) else c
        return cls.monomial(c, 0, p, K, D)

    # basic data -------------------------------------------------------
    @property
    def D(self) -> int:
        return len(self.coeffs) - 1

    @property
    def modulus(self) -> int:
        return self.p**self.K

    @property
    def precision(self) -> int:
        """Absolute precision of the coefficients (K - loss)."""
        return self.K - self.loss

    def coeff(self, i: int) -> PadicInt:
        """Coefficient i as an element of Z_p (requires it to be integral)."""
        s = self.coeffs[i] if i <= self.D else 0
        if self.loss == 0:
            return PadicInt.make(s, self.p, self.K)
        scale = self.p**self.loss
        if s % scale:
            raise NotPAdicInteger(f"coefficient {i} has negative valuation")
        return PadicInt.make(s // scale, self.p, self.K)

    def coeff_val(self, i: int) -> int | None:
        """Valuation of coefficient i; ``None`` when zero at precision."""
        s = self.coeffs[i] if i <= self.D else 0
        if s == 0:
            return None
        return _val(s, self.p, self.K) - self.loss

    def min_val(self) -> int | None:
        vals = [v for v in (self.coeff_val(i) for i in range(self.D + 1)) if v is not None]
        return min(vals) if vals else None

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def is_integral(self) -> bool:
        scale = self.p**self.loss
        return all(c % scale == 0 for c in self.coeffs)

    def integral_residues(self) -> list[int]:
        """Coefficients as integers known mod p**(K - loss); raises if not in Z_p."""
        if self.loss == 0:
            return list(self.coeffs)
        scale = self.p**self.loss
        out = []
        for i, c in enumerate(self.coeffs):
            if c % scale:
                raise NotPAdicInteger(f"coefficient {i} has negative valuation")
            out.append(c // scale)
        return out

    def rationals(self) -> list[Fraction]:
        """Balanced rational representatives (for display and tests)."""
        mod = self.modulus
        return [Fraction(c - mod if c > mod // 2 else c, self.p**self.loss) for c in self.coeffs]

    def degree(self) -> int:
        """Index of the last coefficient that is nonzero at precision (-1 if none)."""
        for i in range(len(self.coeffs) - 1, -1, -1):
            if self.coeffs[i] % self.modulus:
                return i
        return -1

    def with_degree(self, D: int) -> "TruncatedSeries":
        cs = list(self.coeffs[: D + 1]) + [0] * max(0, D + 1 - len(self.coeffs))
        poly = self.poly and not any(self.coeffs[D + 1:])
        return TruncatedSeries(self.p, self.K, tuple(cs), self.loss, poly, self.tail_val)

    def with_loss(self, loss: int) -> "TruncatedSeries":
        """Re-express with a larger denominator exponent."""
        if loss < self.loss:
            raise ValueError("cannot reduce loss")
        f = self.p ** (loss - self.loss)
        return TruncatedSeries(self.p, self.K, tuple(c * f for c in self.coeffs), loss,
                               self.poly, self.tail_val)

    def _check(self, other: "TruncatedSeries") -> None:
        if self.p != other.p or self.K != other.K:
            raise PrecisionMismatch("series live at different (p, K)")

    # arithmetic -------------------------------------------------------
    def __add__(self, other):
        if isinstance(other, (int, PadicInt)):
            other = TruncatedSeries.constant(other, self.p, self.K, self.D)
        self._check(other)
        D = _joint_degree(self, other, max(self.D, other.D))
        L = max(self.loss, other.loss)
        a, b = self.with_loss(L).with_degree(D), other.with_loss(L).with_degree(D)
        cs = [(a.coeffs[i] + b.coeffs[i]) for i in range(D + 1)]
        poly = (self.poly and other.poly and self.degree() <= D and other.degree() <= D)
        return TruncatedSeries(self.p, self.K, tuple(cs), L, poly, _tail_min(self, other))

    __radd__ = __add__

    def __neg__(self):
        return TruncatedSeries(self.p, self.K, tuple(-c for c in self.coeffs), self.loss,
                               self.poly, self.tail_val)

    def __sub__(self, other):
        if isinstance(other, (int, PadicInt)):
            other = TruncatedSeries.constant(other, self.p, self.K, self.D)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, PadicInt):
            other = other.value
        if isinstance(other, int):
            return TruncatedSeries(self.p, self.K, tuple(c * other for c in self.coeffs),
                                   self.loss, self.poly, self.tail_val)
        self._check(other)
        D = _joint_degree(self, other, max(self.D, other.D, self.degree() + other.degree()))
        cs = kernels.mul_trunc(list(self.coeffs), list(other.coeffs), D, self.modulus)
        poly = self.poly and other.poly and self.degree() + other.degree() <= D
        tail = None if poly else _tail_mul(self, other, D)
        return TruncatedSeries(self.p, self.K, tuple(cs), self.loss + other.loss, poly, tail)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        out = TruncatedSeries.constant(1, self.p, self.K, self.D)
        base = self
        while e:
            if e & 1:
                out = out * base
            e >>= 1
            if e:
                base = base * base
        return out

    def divide_by_p_power(self, v: int) -> "TruncatedSeries":
        """The series divided by p**v (pure bookkeeping: loss += v)."""
        if self.loss + v > self.K:
            raise PrecisionExhausted("division by p exhausts precision")
        return TruncatedSeries(self.p, self.K, self.coeffs, self.loss + v, self.poly)

    def scale_var(self, c) -> "TruncatedSeries":
        """f(c z) for c in Z_p."""
        c = c.value if isinstance(c, PadicInt) else c
        mod = self.modulus
        cs, cp = [], 1
        for s in self.coeffs:
            cs.append(s * cp % mod)
            cp = cp * c % mod
        return TruncatedSeries(self.p, self.K, tuple(cs), self.loss, self.poly, self.tail_val)

    def equal_at_precision(self, other: "TruncatedSeries", drop: int = 0) -> bool:
        """Congruence mod (p**(K - max loss - drop), z**(D+1))."""
        diff = self - other
        prec = diff.precision - drop
        if prec <= 0:
            return True
        m = self.p**prec
        scale = self.p**diff.loss
        return all((c % (m * scale)) == 0 for c in diff.coeffs)

    def residual_val(self, other: "TruncatedSeries") -> int | None:
        """Minimum valuation of self - other (``None`` if zero at precision)."""
        return (self - other).min_val()

    def __repr__(self):
        terms = []
        for i, c in enumerate(self.rationals()):
            if c:
                terms.append(f"{c}*z^{i}" if i else f"{c}")
        body = " + ".join(terms) or "0"
        return f"TruncatedSeries({body}; p={self.p}, K={self.K}, D={self.D}, loss={self.loss})"


class Evaluation(NamedTuple):
    value: PadicInt  # meaningful modulo p**(K - loss)
    loss: int
    tail_val: int | None  # lower bound on the valuation of the discarded tail

    @property
    def precision(self) -> int:
        p = self.value.K - self.loss
        if self.tail_val is not None:
            p = min(p, self.tail_val)
        return p

    def is_zero(self) -> bool:
        return self.value.value % self.value.p ** max(self.precision, 0) == 0

    def vanishing_val(self) -> int:
        """Achieved valuation of the value, capped at the usable precision."""
        return min(_val(self.value.value, self.value.p, self.value.K), self.precision)


def _joint_degree(a: "TruncatedSeries", b: "TruncatedSeries", both_poly: int) -> int:
    """Truncation degree of a binary result: a polynomial never binds."""
    if a.poly and b.poly:
        return both_poly
    if a.poly:
        return b.D
    if b.poly:
        return a.D
    return min(a.D, b.D)


def _coeff_vals(f: "TruncatedSeries") -> list:
    """Valuation bounds of the stored coefficient values."""
    out = []
    for c in f.coeffs:
        v = vp(c % f.modulus, f.p)
        out.append((f.K if v is None else v) - f.loss)
    return out


def _tail_mul(f: "TruncatedSeries", g: "TruncatedSeries", D: int) -> int | None:
    """Tail bound of a product past degree D, or None when a factor has none."""
    if (not f.poly and f.tail_val is None) or (not g.poly and g.tail_val is None):
        return None
    inf = float("inf")
    vf, vg = _coeff_vals(f), _coeff_vals(g)
    tf = inf if f.poly else f.tail_val
    tg = inf if g.poly else g.tail_val

    def at(vals, t, i):
        return vals[i] if i < len(vals) else t

    # degrees where both factors can still be stored coefficients
    best = inf
    for k in range(D + 1, len(vf) + len(vg) - 1):
        for i in range(k + 1):
            best = min(best, at(vf, tf, i) + at(vg, tg, k - i))
    # beyond that one factor always comes from its tail
    best = min(best, tf + min(vg + [tg]), tg + min(vf + [tf]))
    if best == inf:
        return None
    return int(best) if best >= 0 else None


def _tail_min(f: TruncatedSeries, g: TruncatedSeries) -> int | None:
    """Tail bound of a sum: polynomial summands do not constrain it."""
    tails = [s.tail_val for s in (f, g) if not s.poly]
    if any(t is None for t in tails):
        return None
    return min(tails) if tails else None


def _lift_integral(g: TruncatedSeries) -> tuple[list[int], int]:
    """g as integral residues plus the precision drop they carry."""
    return g.integral_residues(), g.loss


def compose(f: TruncatedSeries, g: TruncatedSeries, *, check: bool = True) -> TruncatedSeries:
    """f(g(z)) truncated at min(D_f, D_g)."""
    f._check(g)
    G, lg = _lift_integral(g)
    if check and not f.poly and G[0] % g.p:
        raise CompositionDiverges("g(0) must lie in pZ_p")
    D = min(f.D, g.D)
    mod = f.modulus
    cs = kernels.compose(list(f.coeffs), G, D, mod)
    if lg:
        s = g.p**lg
        cs = [c * s for c in cs]
    poly = f.poly and g.poly and f.degree() * max(g.degree(), 0) <= D
    return TruncatedSeries(f.p, f.K, tuple(cs), f.loss + lg, poly)


def iterate(f: TruncatedSeries, n: int) -> TruncatedSeries:
    out = TruncatedSeries.identity(f.p, f.K, f.D)
    for _ in range(n):
        out = compose(f, out)
    return out


def comp_inverse(f: TruncatedSeries) -> TruncatedSeries:
    """Compositional inverse of a series with f(0)=0 and unit linear term."""
    F, lf = _lift_integral(f)
    p, K, D = f.p, f.K, f.D
    mod = p**K
    prec = f.precision
    if F[0] % p**prec:
        raise NotInvertible("f(0) must vanish")
    if D < 1 or F[1] % p == 0:
        raise NotInvertible("linear coefficient is not a unit")
    inv_a1 = pow(F[1], -1, mod)
    g = [0] * (D + 1)
    g[1] = inv_a1
    Fz = [0] + F[1:]
    for n in range(2, D + 1):
        comp = kernels.compose(Fz, g[: n + 1] + [0] * (D - n), n, mod)
        g[n] = (-comp[n] * inv_a1) % mod
    cs = g
    if lf:
        s = p**lf
        cs = [c * s for c in cs]
    return TruncatedSeries(p, K, tuple(cs), lf)


def derivative(f: TruncatedSeries) -> TruncatedSeries:
    cs = [i * f.coeffs[i] for i in range(1, f.D + 1)]
    if not cs:
        cs = [0]
    return TruncatedSeries(f.p, f.K, tuple(cs), f.loss, f.poly)


def antiderivative(f: TruncatedSeries) -> TruncatedSeries:
    """Antiderivative with zero constant term, truncated at D.

    Dividing coefficient n by n+1 costs val(n+1) digits; the maximum over
    the nonzero coefficients that survive truncation is added to ``loss``.
    """
    p, K, D = f.p, f.K, f.D
    extra = 0
    for n in range(D):
        if f.coeffs[n]:
            extra = max(extra, vp(n + 1, p))
    if f.loss + extra > K:
        raise PrecisionExhausted("antiderivative exhausts precision")
    mod = p**K
    cs = [0] * (D + 1)
    for n in range(D):
        c = f.coeffs[n]
        if not c:
            continue
        v = vp(n + 1, p)
        unit = (n + 1) // p**v
        cs[n + 1] = c * p ** (extra - v) * pow(unit, -1, mod) % mod
    return TruncatedSeries(p, K, tuple(cs), f.loss + extra, f.poly and not f.coeffs[D])


def reciprocal(f: TruncatedSeries) -> TruncatedSeries:
    """1/f for an integral series with unit constant term."""
    F, lf = _lift_integral(f)
    p, K, D = f.p, f.K, f.D
    mod = p**K
    if F[0] % p == 0:
        raise NotInvertible("constant term is not a unit")
    inv0 = pow(F[0], -1, mod)
    out = [0] * (D + 1)
    out[0] = inv0
    for n in range(1, D + 1):
        acc = 0
        for i in range(1, n + 1):
            acc += F[i] * out[n - i]
        out[n] = (-acc * inv0) % mod
    if lf:
        s = p**lf
        out = [c * s for c in out]
    return TruncatedSeries(p, K, tuple(out), lf)


def evaluate(f: TruncatedSeries, x) -> Evaluation:
    """Horner evaluation of f at x in Z_p.

    Points of valuation 0 are only admitted for polynomials or series that
    carry a tail bound (convergence on the closed unit disk).
    """
    if not isinstance(x, PadicInt):
        x = PadicInt.make(x, f.p, f.K)
    vx = x.val
    if vx == 0 and not f.poly and f.tail_val is None:
        raise OutsideRadius("unit points need a polynomial or a tail bound")
    s = kernels.horner(list(f.coeffs), x.value, f.modulus)
    if f.poly:
        tail = None
    elif f.tail_val is not None:
        tail = f.tail_val + (f.D + 1) * min(vx, f.K)
    else:
        tail = (f.D + 1) * min(vx, f.K)
    return Evaluation(PadicInt.make(s, f.p, f.K), f.loss, tail)


def evaluate_value(f: TruncatedSeries, x) -> PadicInt:
    """Value of f(x) in Z_p, divided out of the stored denominator."""
    ev = evaluate(f, x)
    if ev.loss == 0:
        return ev.value
    s = f.p**ev.loss
    if ev.value.value % s:
        raise NotPAdicInteger("value has negative valuation")
    return PadicInt.make(ev.value.value // s, f.p, f.K)


# Newton polygons -----------------------------------------------------------


@dataclass(frozen=True)
class NewtonPolygon:
    vertices: list  # [(degree, valuation)]
    slopes: list  # [(Fraction slope, length)]
    origin: int  # multiplicity of the zero at z = 0 visible at precision

    def zeros_with_val_at_least(self, v) -> int:
        """Zeros (with multiplicity) in the closed disk of radius p**(-v)."""
        return self.origin + sum(ln for s, ln in self.slopes if s <= -v)

    @property
    def unit_disk_zeros(self) -> int:
        return self.zeros_with_val_at_least(0)

    def root_valuations(self) -> list:
        out = []
        for s, ln in self.slopes:
            out.extend([-s] * ln)
        return out


def _lower_hull(points):
    hull = []
    for pt in points:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            # drop hull[-1] if it lies on or above the segment hull[-2] -> pt
            if (y2 - y1) * (pt[0] - x1) >= (pt[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(pt)
    return hull


def newton_polygon(f: TruncatedSeries) -> NewtonPolygon:
    pts = [(i, f.coeff_val(i)) for i in range(f.D + 1)]
    pts = [(i, v) for i, v in pts if v is not None]
    if not pts:
        raise IndistinguishableFromZero("series is zero at working precision")
    origin = pts[0][0]
    hull = _lower_hull(pts)
    # keep the part of the hull up to the last point of minimal valuation;
    # positive slopes describe no zeros and are still recorded
    slopes = []
    for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
        slopes.append((Fraction(y2 - y1, x2 - x1), x2 - x1))
    return NewtonPolygon(hull, slopes, origin)


# zero isolation ------------------------------------------------------------


@dataclass(frozen=True)
class ZeroReport:
    zeros: list  # [(PadicInt root, multiplicity, digits known)]
    separation: int  # max pairwise valuation of differences (0 for <= 1 root)
    partial: bool = False

    def roots(self) -> list[int]:
        return [r.value for r, _, _ in self.zeros]


def _integral_normalized(f: TruncatedSeries) -> tuple[list[int], int]:
    """Integral residues of p**(-min val) * f and their absolute precision."""
    mv = f.min_val()
    if mv is None:
        raise IndistinguishableFromZero("series is zero at working precision")
    # f * p**(-mv) = S * p**(-loss - mv); residues S / p**(loss + mv)
    shift = f.loss + mv
    s = f.p**shift
    return [c // s for c in f.coeffs], f.K - shift


def _shifted_count(F: list[int], p: int, prec: int, r: int, t: int) -> tuple[int | None, list[int]]:
    """Zero count of F(r + p**t z) in the closed unit disk and its residues."""
    mod = p**prec
    D = len(F) - 1
    G = kernels.compose(F, [r % mod, p**t % mod] + [0] * (D - 1), D, mod) if D >= 1 else [F[0] % mod]
    pts = [(i, _val(c, p, prec)) for i, c in enumerate(G) if c % mod]
    if not pts:
        return None, G
    mv = min(v for _, v in pts)
    last = max(i for i, v in pts if v == mv)
    return last, G


def isolate_zeros(f: TruncatedSeries, *, max_depth: int | None = None) -> ZeroReport:
    """Z_p-rational zeros of f on the closed unit disk by residue refinement.

    A branch r mod p**t survives while f(r + p**t z) still has zeros in the
    closed unit disk.  Branches whose expansion becomes zero at precision
    stop there; their last nonzero zero count is the multiplicity.
    """
    F, prec = _integral_normalized(f)
    p = f.p
    if prec <= 0:
        raise PrecisionExhausted("no precision left for root isolation")
    depth_cap = prec if max_depth is None else min(prec, max_depth)
    zeros = []
    partial = False
    stack = [(0, 0)]
    root_count, _ = _shifted_count(F, p, prec, 0, 0)
    if root_count is None:
        raise IndistinguishableFromZero("series is zero at working precision")
    counts = {(0, 0): root_count}
    while stack:
        r, t = stack.pop()
        count = counts[(r, t)]
        if count == 0:
            continue
        if t >= depth_cap:
            zeros.append((r, count, t))
            partial = partial or count > 1
            continue
        children = []
        for d in range(p):
            rc = r + d * p**t
            c, _ = _shifted_count(F, p, prec, rc, t + 1)
            children.append((rc, c))
        known = sum(c for _, c in children if c is not None)
        for rc, c in children:
            if c is None:
                # expansion is zero at precision: the remaining zeros cluster here
                zeros.append((rc, max(count - known, 1), t + 1))
            elif c > 0:
                counts[(rc, t + 1)] = c
                stack.append((rc, t + 1))
    # merge duplicate reports of the same cluster (same residue at known depth)
    zeros.sort(key=lambda z: (z[0], z[2]))
    out = [(PadicInt.make(r, p, f.K), m, t) for r, m, t in zeros]
    sep = 0
    for i in range(len(out)):
        for j in range(i + 1, len(out)):
            a, b = out[i], out[j]
            known = min(a[2], b[2])
            d = _val(a[0].value - b[0].value, p, known)
            sep = max(sep, d)
    return ZeroReport(out, sep, partial)


# log and exp -------------------------------------------------------------


def _divided_powers(h: list, p: int, K: int, prec: int, D: int, kmax: int, denom):
    """sum_k h**k / denom(k) for k = 1..kmax as (residues, extra).

    h has zero constant term and is known mod p**prec.  Writing h = p**v h'
    makes h**k known mod p**(prec + (k-1) v), so the division by denom(k)
    costs only max(0, vp(denom(k)) - (k-1) v) digits.  The result is
    p**extra times the sum, known mod p**prec.
    """
    mod = p**K
    h = [c % p**prec for c in h]
    vals = [_val(c, p, prec) for c in h if c]
    if not vals:
        return [0] * (D + 1), 0
    v = min(vals)
    hp = TruncatedSeries(p, K, tuple(c // p**v for c in h), 0)
    terms = []
    extra = 0
    power = hp
    for k in range(1, kmax + 1):
        # a power that vanishes mod p**K still limits the precision
        d = denom(k)
        vd = vp(d, p) or 0
        extra = max(extra, vd - (k - 1) * v)
        if not power.is_zero():
            terms.append((k, d, vd, power))
            power = power * hp
    acc = [0] * (D + 1)
    for k, d, vd, pw in terms:
        e = extra + k * v - vd
        if e >= K:
            continue
        w = p**e * pow(d // p**vd, -1, mod)
        for i, s in enumerate(pw.coeffs):
            acc[i] = (acc[i] + s * w) % mod
    return acc, extra


def _divided_scalar(c: int, p: int, K: int, prec: int, kmax: int, denom):
    """sum_k c**k / denom(k) for k = 1..kmax as (residue, extra), as above."""
    mod = p**K
    v = _val(c, p, prec)
    cp = c // p**v
    terms = []
    extra = 0
    for k in range(1, kmax + 1):
        d = denom(k)
        vd = vp(d, p) or 0
        terms.append((k, d, vd))
        extra = max(extra, vd - (k - 1) * v)
    acc = 0
    for k, d, vd in terms:
        e = extra + k * v - vd
        if e < K:
            acc += p**e * pow(d // p**vd, -1, mod) * pow(cp, k, mod)
    return acc % mod, extra


def _ilog(k: int, p: int) -> int:
    j = 0
    while p ** (j + 1) <= k:
        j += 1
    return j


def _signed_inv(k: int) -> int:
    return k if k % 2 else -k


def log1p(f: TruncatedSeries) -> TruncatedSeries:
    """log(1 + f) for f with f(0) in pZ_p."""
    F = f.integral_residues()
    p, K, D = f.p, f.K, f.D
    if F[0] % p:
        raise CompositionDiverges("log1p needs f(0) in pZ_p")
    prec = f.precision
    mod = p**K
    # split off the constant: log(1+f) = log(1+c) + log(1 + (f-c)/(1+c))
    c = F[0] % p**prec
    h = TruncatedSeries(p, K, tuple([0] + F[1:]), 0)
    if c:
        h = h * reciprocal(TruncatedSeries.constant(1 + c, p, K, D))
    acc, extra = _divided_powers(list(h.coeffs), p, K, prec, D, D, _signed_inv)
    if c:
        vc = _val(c, p, prec)
        kmax = 1
        # vp(k) <= log_p(k) makes the term bound monotone in k
        while (kmax + 1) * vc - _ilog(kmax + 1, p) < prec:
            kmax += 1
        const, cextra = _divided_scalar(c, p, K, prec, kmax, _signed_inv)
        top = max(extra, cextra)
        acc = [a * p ** (top - extra) % mod for a in acc]
        acc[0] = (acc[0] + const * p ** (top - cextra)) % mod
        extra = top
    if extra + f.loss > K:
        raise PrecisionExhausted("log1p exhausts precision")
    out = TruncatedSeries(p, K, tuple(acc), extra)
    if f.loss:
        out = TruncatedSeries(p, K, tuple(s * p**f.loss for s in out.coeffs), out.loss + f.loss)
    return out


def exp(f: TruncatedSeries) -> TruncatedSeries:
    """exp(f); the constant term must satisfy val > 1/(p-1)."""
    F = f.integral_residues()
    p, K, D = f.p, f.K, f.D
    mod = p**K
    prec = f.precision
    c = F[0] % p**prec
    vc = _val(c, p, K) if c else None
    if vc is not None and vc * (p - 1) <= 1:
        raise ExpDiverges("constant term too large for exp to converge")
    acc, extra = _divided_powers([0] + F[1:], p, K, prec, D, D, math.factorial)
    if extra + f.loss >= K:
        raise ExpDiverges(f"factorial denominators cost {extra} digits at precision {K}")
    acc[0] = (acc[0] + p**extra) % mod
    out = TruncatedSeries(p, K, tuple(acc), extra)
    if vc is not None:
        # exp(c) as a scalar: sum c**k / k! until the terms vanish
        kmax = 1
        # vp(k!) <= (k - 1)/(p - 1) makes the term bound monotone in k
        while (kmax + 1) * vc * (p - 1) - kmax < prec * (p - 1):
            kmax += 1
        const, cextra = _divided_scalar(c, p, K, prec, kmax, math.factorial)
        total = (const + p**cextra) % mod
        out = TruncatedSeries(p, K, tuple(s * total for s in out.coeffs), out.loss + cextra)
    if f.loss:
        out = TruncatedSeries(p, K, tuple(s * p**f.loss for s in out.coeffs), out.loss + f.loss)
    if out.loss >= K:
        raise ExpDiverges("exp exhausts precision")
    return out
