"""Exact construction of a p-adic interpolating polynomial sequence f_j with
f_j(p**n_i) = n_i and n_{j+1} as close to n_j as the congruences allow.

Everything is exact rational arithmetic.  The next index n_{j+1} only needs
f_j(0), so the sequence can always be extended by one term past the last
polynomial; computing the next polynomial needs p**n_{j+1} itself, which is
where the bit budget bites.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import log2

from .errors import BudgetExceeded, NotPAdicInteger, WindowViolation
from .padic_core import Prime, vp_rational

__all__ = ["InterpolationState", "start", "next_term", "build", "verify", "Checklist"]

DEFAULT_BIT_BUDGET = 1 << 22


@dataclass
class InterpolationState:
    p: int
    n: list
    f_coeffs: list  # f_j, degree len(n) - 1 ... exact Fractions, low degree first
    c: list = field(default_factory=list)
    pending: bool = False  # n[-1] was found but f for it is not yet built

    @property
    def j(self) -> int:
        return len(self.n)

    def f_eval(self, z) -> Fraction:
        acc = Fraction(0)
        for a in reversed(self.f_coeffs):
            acc = acc * z + a
        return acc

    def exponent_sum(self, upto: int | None = None) -> int:
        return sum(self.n[: upto if upto is not None else len(self.n)])


def start(p, n1: int) -> InterpolationState:
    p = Prime(p)
    if n1 < 1:
        raise ValueError("n1 must be positive")
    return InterpolationState(int(p), [n1], [Fraction(n1)])


def _pow_bits(p: int, x: int) -> float:
    """Approximate bit length of p**x (infinite when x itself is huge)."""
    if x.bit_length() > 1000:
        return float("inf")
    return x * log2(p)


def _residue(x: Fraction, mod: int) -> int:
    return x.numerator * pow(x.denominator, -1, mod) % mod


def _g_eval(roots, z) -> Fraction:
    out = 1
    for r in roots:
        out *= z - r
    return out


def _poly_times_linear(coeffs: list, r) -> list:
    """coeffs * (z - r)."""
    out = [Fraction(0)] * (len(coeffs) + 1)
    for i, a in enumerate(coeffs):
        out[i + 1] += a
        out[i] -= a * r
    return out


def _next_index(state: InterpolationState) -> int:
    p = state.p
    S = state.exponent_sum()
    mod = p**S
    r = _residue(state.f_coeffs[0], mod)
    lo = state.n[-1] + 1
    cand = lo + (r - lo) % mod
    if not (lo <= cand <= state.n[-1] + mod):
        raise WindowViolation("no index in the window")
    return cand


def _extend_f(state: InterpolationState, bit_budget: int) -> None:
    """Turn a pending index n[-1] into the polynomial through it."""
    p = state.p
    n_new = state.n[-1]
    if _pow_bits(p, n_new) > bit_budget:
        raise BudgetExceeded(f"p**n with n of {n_new.bit_length()} bits exceeds the bit budget", completed=len(state.n) - 2)
    roots = [p**ni for ni in state.n[:-1]]
    z = p**n_new
    g_val = _g_eval(roots, z)
    c_j = (n_new - state.f_eval(z)) / g_val
    vc = vp_rational(c_j, p)
    if vc is not None and vc < 0:
        raise NotPAdicInteger(f"c_{len(state.n) - 1} = {c_j} is not {p}-integral")
    g_coeffs = [Fraction(1)]
    for r in roots:
        g_coeffs = _poly_times_linear(g_coeffs, r)
    f = list(state.f_coeffs) + [Fraction(0)] * (len(g_coeffs) - len(state.f_coeffs))
    state.f_coeffs = [a + c_j * b for a, b in zip(f, g_coeffs)]
    state.c.append(c_j)
    state.pending = False


def next_term(state: InterpolationState, bit_budget: int = DEFAULT_BIT_BUDGET):
    """Append n_{j+1}, c_j and f_{j+1}; returns (n_{j+1}, c_j, f_coeffs).

    If p**n_{j+1} is over budget the index is still recorded, the state is
    marked pending and BudgetExceeded is raised.
    """
    if state.pending:
        _extend_f(state, bit_budget)
    S = state.exponent_sum()
    if _pow_bits(state.p, S) > bit_budget:
        raise BudgetExceeded("window modulus exceeds the bit budget", completed=len(state.n) - 1)
    n_next = _next_index(state)
    state.n.append(n_next)
    state.pending = True
    _extend_f(state, bit_budget)
    return n_next, state.c[-1], list(state.f_coeffs)


def build(p, n1: int, steps: int, bit_budget: int = DEFAULT_BIT_BUDGET, *,
          keep_partial: bool = False) -> InterpolationState:
    """n1 plus ``steps`` further terms, checking every invariant after each step.

    With ``keep_partial`` a budget overrun returns the state so far (possibly
    with one pending index) instead of raising.
    """
    state = start(p, n1)
    for _ in range(steps):
        try:
            next_term(state, bit_budget)
        except BudgetExceeded:
            if keep_partial:
                return state
            raise
        report = verify(state)
        if not report.passed:
            raise WindowViolation(f"invariant failed: {report.failures[0]}")
    return state


@dataclass
class Checklist:
    items: list  # (name, index, ok)

    @property
    def failures(self) -> list:
        return [it for it in self.items if not it[2]]

    @property
    def passed(self) -> bool:
        return not self.failures

    def __bool__(self):
        return self.passed


def _cmp_pow(d: int, p: int, x: int) -> int:
    """Sign of d - p**x without building p**x when the sizes already decide."""
    if d <= 0:
        return -1
    if _pow_bits(p, x) > d.bit_length() + 1:
        return -1
    px = p**x
    return (d > px) - (d < px)


def verify(state: InterpolationState) -> Checklist:
    p, n = state.p, state.n
    items = []
    for j in range(len(n) - 1):
        a, b = n[j], n[j + 1]
        S = sum(n[: j + 1])
        items.append(("lower", j + 1, _cmp_pow(b - a, p, a) >= 0))
        items.append(("window", j + 1, b >= a + 1 and _cmp_pow(b - a, p, S) <= 0))
        items.append(("square", j + 1, _cmp_pow(b - a, p, 2 * a) <= 0))
        items.append(("remark", j + 1, S * n[0] <= b))
    for j in range(1, len(n)):
        items.append(("sum", j + 1, sum(n[:j]) <= n[j]))
    built = len(n) - (1 if state.pending else 0)
    for j in range(built):
        items.append(("interpolation", j + 1, state.f_eval(Fraction(p) ** n[j]) == n[j]))
    for j, c in enumerate(state.c, start=1):
        v = vp_rational(c, p)
        items.append(("integral", j, v is None or v >= 0))
    # the ultrametric chain for each built step
    roots_all = [p**x for x in n[:built]]
    for j in range(1, built):
        # f_j interpolates n_1..n_j; we only kept the latest f, so use its
        # defining identity through c: n_{j+1} - f_j(z) = c_j g_j(z)
        z = roots_all[j]
        g = _g_eval(roots_all[:j], z)
        items.append(("chain", j, vp_rational(Fraction(g), p) == sum(n[:j])))
    return Checklist(items)
