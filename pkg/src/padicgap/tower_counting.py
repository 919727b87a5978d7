"""Up-arrow towers, the inverse tower height L_C and the counting bound.

Tower values are never materialized past a bit budget.  Comparisons with
integers descend through iterated logarithms using interval bounds from
correctly rounded ``decimal`` ln/exp (widened by a few ulps), escalating the
working precision until the comparison is decided; integer bases whose
towers fit the budget are compared exactly.
"""
from __future__ import annotations

import decimal
import functools
from dataclasses import dataclass
from fractions import Fraction

from .growth import RationalPower

__all__ = [
    "TowerNumber",
    "up_arrow",
    "tower_compare",
    "L_C",
    "CountingReport",
    "counting_check",
    "ceil_power",
]

BIT_BUDGET = 1 << 20
_PRECISIONS = (40, 80, 160, 640)


def _as_power(C) -> RationalPower:
    if isinstance(C, RationalPower):
        return C
    return RationalPower(Fraction(C))


def _power_gt_one(C: RationalPower) -> bool:
    u, v = C.base.numerator, C.base.denominator
    e = C.exponent
    return e != 0 and (u > v) == (e > 0) and u != v


def _exact_int(C: RationalPower) -> int | None:
    """C as an integer when base**exponent is one."""
    e = C.exponent
    if e.denominator != 1 or e < 0 or C.base.denominator != 1:
        return None
    return C.base.numerator ** e.numerator


@dataclass(frozen=True)
class TowerNumber:
    """C up-arrow-up-arrow height; ``exact`` is set when it fits the budget."""

    base: RationalPower
    height: int
    exact: int | Fraction | None = None

    def top(self) -> "TowerNumber | None":
        """The exponent tower one level down (None at height 1)."""
        if self.height == 1:
            return None
        return up_arrow(self.base, self.height - 1)

    def __repr__(self):
        if self.exact is not None and isinstance(self.exact, int) and self.exact.bit_length() < 64:
            return f"TowerNumber({self.exact})"
        return f"TowerNumber({self.base.as_text()} ^^ {self.height})"


def up_arrow(C, m: int) -> TowerNumber:
    C = _as_power(C)
    if m < 1:
        raise ValueError("height must be positive")
    if not _power_gt_one(C):
        raise ValueError("tower base must exceed 1")
    exact = None
    ci = _exact_int(C)
    if m == 1:
        exact = ci if ci is not None else (C.base if C.exponent == 1 else None)
    elif ci is not None:
        val = ci
        for _ in range(m - 1):
            if val * ci.bit_length() > BIT_BUDGET:
                val = None
                break
            val = ci**val
        exact = val
    return TowerNumber(C, m, exact)


# interval arithmetic -----------------------------------------------------------


class _Ctx:
    def __init__(self, prec: int):
        self.ctx = decimal.Context(prec=prec, rounding=decimal.ROUND_HALF_EVEN)
        self.eta = decimal.Decimal(10) ** (-(prec - 3))

    def D(self, x) -> decimal.Decimal:
        if isinstance(x, Fraction):
            return self.ctx.divide(decimal.Decimal(x.numerator), decimal.Decimal(x.denominator))
        return self.ctx.create_decimal(x)

    def widen(self, lo, hi):
        one = decimal.Decimal(1)
        lo = self.ctx.multiply(lo, one - self.eta) if lo > 0 else self.ctx.multiply(lo, one + self.eta)
        hi = self.ctx.multiply(hi, one + self.eta) if hi > 0 else self.ctx.multiply(hi, one - self.eta)
        return lo - self.eta, hi + self.eta

    def point(self, x):
        d = self.D(x)
        return self.widen(d, d)

    def ln(self, iv):
        lo, hi = iv
        return self.widen(self.ctx.ln(lo), self.ctx.ln(hi))

    def ln_base(self, C: RationalPower):
        """Interval for ln C = exponent * ln(base)."""
        lo, hi = self.ln(self.point(C.base))
        e = self.D(C.exponent)
        a, b = self.ctx.multiply(lo, e), self.ctx.multiply(hi, e)
        return self.widen(min(a, b), max(a, b))

    def value(self, C: RationalPower):
        lo, hi = self.ln_base(C)
        return self.widen(self.ctx.exp(lo), self.ctx.exp(hi))

    def div(self, a, b):
        # a, b positive intervals
        return self.widen(self.ctx.divide(a[0], b[1]), self.ctx.divide(a[1], b[0]))


class Undecided(ArithmeticError):
    pass


def _cmp_descent(C: RationalPower, k: int, Y, prec: int) -> int:
    cx = _Ctx(prec)
    c_iv = cx.value(C)
    lnC = cx.ln_base(C)
    iv = cx.point(Y)
    for level in range(k, 1, -1):
        if iv[1] < c_iv[0]:
            return 1  # the tower at this level is at least C > current target
        if iv[0] <= 0:
            return 1
        iv = cx.div(cx.ln(iv), lnC)
    if c_iv[0] > iv[1]:
        return 1
    if c_iv[1] < iv[0]:
        return -1
    raise Undecided


def tower_compare(t: TowerNumber, y) -> int:
    """Sign of t - y for y an integer, rational or tower with shared base/height."""
    if isinstance(y, TowerNumber):
        return _compare_towers(t, y)
    y = Fraction(y)
    if t.exact is not None:
        return (t.exact > y) - (t.exact < y)
    if y < 1:
        return 1
    last = None
    for prec in _PRECISIONS:
        try:
            return _cmp_descent(t.base, t.height, y, prec)
        except Undecided as err:
            last = err
    raise ArithmeticError(f"comparison undecided at {_PRECISIONS[-1]} digits") from last


def _compare_towers(t1: TowerNumber, t2: TowerNumber) -> int:
    if t1.exact is not None and t2.exact is not None:
        return (t1.exact > t2.exact) - (t1.exact < t2.exact)
    if t1.base == t2.base:
        return (t1.height > t2.height) - (t1.height < t2.height)
    if t1.height == t2.height:
        b1 = t1.base.base ** 1 if t1.base.exponent == 1 else None
        b2 = t2.base.base ** 1 if t2.base.exponent == 1 else None
        if b1 is not None and b2 is not None:
            return (b1 > b2) - (b1 < b2)
        # bases as exact powers: compare C1 vs C2 as a height-1 comparison
        if t2.base.exponent == 1:
            return tower_compare(up_arrow(t1.base, 1), t2.base.base)
    if t1.exact is not None:
        return -tower_compare(t2, t1.exact)
    if t2.exact is not None:
        return tower_compare(t1, t2.exact)
    raise NotImplementedError("tower comparison needs a shared base, height or an exact side")


def L_C(C, Y) -> int:
    """Smallest m with C^^m > Y."""
    return _L_C(_as_power(C), Fraction(Y))


@functools.lru_cache(maxsize=4096)
def _L_C(C: RationalPower, Y: Fraction) -> int:
    m = 1
    while tower_compare(up_arrow(C, m), Y) <= 0:
        m += 1
    return m


def ceil_power(C) -> int:
    """ceil(C) exactly for C = base**exponent."""
    C = _as_power(C)
    e = C.exponent
    u, v = C.base.numerator, C.base.denominator
    r, s = e.numerator, e.denominator
    if r < 0:
        u, v, r = v, u, -r

    def ge(q: int) -> bool:  # q >= C  <=>  q**s * v**r >= u**r
        return q**s * v**r >= u**r

    hi = 1
    while not ge(hi):
        hi *= 2
    lo = hi // 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ge(mid):
            hi = mid
        else:
            lo = mid
    return hi if not ge(lo) or lo == 0 else lo


@dataclass
class CountingReport:
    passed: bool
    A: int
    bound_failures: list  # (M, count, bound)
    chain_failures: list  # (ell, i, n_i, n_next) or (ell, 1, n_1, None)

    def __bool__(self):
        return self.passed


def counting_check(S, N: int, C, T: int, M_values) -> CountingReport:
    """Counting bound |{n in S : n <= M}| <= N L_C(M) + A and the per-class chain.

    Classes are ell = T+1, ..., T+N with S_ell = {n > C : ell + n N in S}.
    """
    C = _as_power(C)
    S = sorted(set(S))
    A = T + N + N * ceil_power(C)
    bound_failures = []
    for M in M_values:
        count = sum(1 for n in S if n <= M)
        bound = N * L_C(C, M) + A
        if count > bound:
            bound_failures.append((M, count, bound))
    chain_failures = []
    members = set(S)
    for ell in range(T + 1, T + N + 1):
        cls = [n for n in range(0, (S[-1] - ell) // N + 1 if S else 0)
               if ell + n * N in members and C.exceeded_by(n, 1)]
        for i, (a, b) in enumerate(zip(cls, cls[1:]), start=1):
            if not C.exceeded_by(b - a, a):
                chain_failures.append((ell, i, a, b))
    return CountingReport(not bound_failures and not chain_failures, A, bound_failures, chain_failures)
