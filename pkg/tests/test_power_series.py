import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from padicgap.errors import (
    CompositionDiverges,
    ExpDiverges,
    IndistinguishableFromZero,
    NotInvertible,
    OutsideRadius,
)
from padicgap.padic_core import PadicInt
from padicgap.power_series import (
    TruncatedSeries,
    antiderivative,
    comp_inverse,
    compose,
    derivative,
    evaluate,
    evaluate_value,
    exp,
    isolate_zeros,
    log1p,
    newton_polygon,
)


def S(coeffs, p=3, K=10, D=None, poly=False):
    return TruncatedSeries.from_ints(coeffs, p, K, D, poly=poly)


def values(f):
    return [Fraction(c, f.p**f.loss) for c in f.coeffs]


def agree(f, g, prec=None):
    """Equal coefficient values modulo p**prec (default: common precision)."""
    p = f.p
    if prec is None:
        prec = min(f.precision, g.precision)
    for a, b in zip(values(f), values(g)):
        d = a - b
        if d and (d.denominator % p == 0 or d.numerator % p**prec):
            return False
    return True


def test_compose_examples():
    p, K, D = 3, 10, 6
    g = S([0, 2, 5, 1], p, K, D)
    assert agree(compose(TruncatedSeries.identity(p, K, D), g), g)
    sq = compose(S([0, 0, 1], p, K, D), S([0, p], p, K, D))
    assert sq.coeffs[2] == p**2 and sum(sq.coeffs) == p**2
    h = compose(S([1, 1, 1], p, K, D), S([0, p, p], p, K, D))
    assert h.coeffs[2] == p + p**2


def test_compose_diverges():
    with pytest.raises(CompositionDiverges):
        compose(S([0, 1, 1], 3, 8, 4), S([1, 1], 3, 8, 4))


def test_comp_inverse_examples():
    p, K, D = 5, 12, 6
    z = TruncatedSeries.identity(p, K, D)
    assert agree(comp_inverse(z), z)
    inv = comp_inverse(S([0, 1, 1], p, K, D))
    # signed Catalan numbers
    cat = [0, 1, -1, 2, -5, 14, -42]
    assert agree(inv, TruncatedSeries.from_ints(cat, p, K, D))
    with pytest.raises(NotInvertible):
        comp_inverse(S([0, p], p, K, D))


def test_calculus_examples():
    p, K = 3, 8
    assert derivative(S([0, 0, 0, 1], p, K)).coeffs[:3] == (0, 0, 3)
    a = antiderivative(S([1, 0, 0], p, K))
    assert values(a)[:2] == [0, 1]
    for q in (2, 3, 5):
        f = TruncatedSeries.monomial(1, q - 1, q, K, q)
        a = antiderivative(f)
        assert a.loss == 1
        assert values(a)[q] == Fraction(1, q)


def test_evaluate_examples():
    p, K = 2, 4
    f = S([1] * 9, p, K)
    x = PadicInt.make(2, p, K)
    ev = evaluate(f, x)
    geom = Fraction(1, 1 - 2)
    assert (ev.value.value - geom) % 2**ev.precision == 0
    assert ev.tail_val is None or ev.tail_val >= 9
    g = S([7, 3, 1], 3, 6)
    assert evaluate_value(g, PadicInt.make(0, 3, 6)).value == 7
    x3 = PadicInt.make(6, 3, 6)
    assert evaluate_value(TruncatedSeries.identity(3, 6, 4), x3) == x3


def test_evaluate_outside_radius():
    with pytest.raises(OutsideRadius):
        evaluate(S([1, 1, 1], 3, 6), PadicInt.make(1, 3, 6))


def test_newton_polygon_examples():
    assert newton_polygon(S([3, 1], 3, 8)).root_valuations() == [1]
    np2 = newton_polygon(S([9, 0, 1], 3, 8))
    assert np2.slopes == [(Fraction(-1), 2)]
    assert np2.unit_disk_zeros == 2 and np2.zeros_with_val_at_least(1) == 2
    assert newton_polygon(S([1, 3], 3, 8)).unit_disk_zeros == 0
    with pytest.raises(IndistinguishableFromZero):
        newton_polygon(S([0, 0], 3, 8))


def test_isolate_zeros_examples():
    p, K = 3, 10
    rep = isolate_zeros(S([-5 % p**K, 1], p, K))
    assert rep.roots() == [5] and rep.zeros[0][1] == 1 and rep.separation == 0
    # (z - 1)(z - 1 - p**2)
    a, b = 1, 1 + p**2
    rep = isolate_zeros(S([a * b, -(a + b), 1], p, K))
    assert sorted(rep.roots()) == [a, b]
    assert rep.separation == 2
    rep = isolate_zeros(S([0, 0, 1], p, K))
    assert rep.roots() == [0] and rep.zeros[0][1] == 2


def test_log_exp_examples():
    p, K, D = 3, 12, 6
    pz = S([0, p], p, K, D)
    rt = exp(log1p(pz))
    assert agree(rt, S([1, p], p, K, D))
    assert log1p(S([0], p, K, D)).is_zero()
    assert agree(exp(S([0], p, K, D)), S([1], p, K, D))
    with pytest.raises(ExpDiverges):
        exp(S([1, 0], p, K, D))


def _exact_exp(a, D, terms=80):
    out = [Fraction(0)] * (D + 1)
    power = [Fraction(1)] + [Fraction(0)] * D
    for k in range(terms):
        if k:
            nxt = [Fraction(0)] * (D + 1)
            for i, x in enumerate(power):
                if x:
                    for j, y in enumerate(a[: D + 1 - i]):
                        nxt[i + j] += x * y
            power = nxt
        out = [o + x / math.factorial(k) for o, x in zip(out, power)]
    return out


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([2, 3, 5]), st.integers(8, 16), st.integers(2, 6), st.data())
def test_exp_matches_exact_series(p, K, D, data):
    v0 = 2 if p == 2 else 1
    c0 = data.draw(st.integers(0, p**3)) * p**v0
    rest = [data.draw(st.integers(0, p**5)) * p ** data.draw(st.integers(0, 2)) for _ in range(D)]
    f = S([c0] + rest, p, K, D)
    try:
        e = exp(f)
    except ExpDiverges:
        return
    exact = _exact_exp([Fraction(c0)] + [Fraction(r) for r in rest], D)
    for got, want in zip(values(e), exact):
        d = got - want
        assert d == 0 or (d.denominator % p and d.numerator % p**e.precision == 0)


unit_linear = st.tuples(st.sampled_from([2, 3, 5, 7]), st.integers(2, 8)).flatmap(
    lambda pd: st.tuples(st.just(pd[0]), st.just(pd[1]),
                         st.integers(1, pd[0] ** 6).filter(lambda a: a % pd[0] != 0),
                         st.lists(st.integers(0, pd[0] ** 6), min_size=pd[1] - 1, max_size=pd[1] - 1)))


@settings(max_examples=100, deadline=None)
@given(unit_linear)
def test_comp_inverse_roundtrip(data):
    p, D, a1, rest = data
    K = 8
    f = S([0, a1] + rest, p, K, D)
    g = comp_inverse(f)
    z = TruncatedSeries.identity(p, K, D)
    assert agree(compose(f, g), z)
    assert agree(compose(g, f), z)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([2, 3, 5]), st.lists(st.integers(0, 10**6), min_size=1, max_size=8))
def test_derivative_undoes_antiderivative(p, cs):
    K = 10
    f = S(cs + [0], p, K)
    back = derivative(antiderivative(f))
    assert agree(back, f.with_degree(back.D), K - antiderivative(f).loss)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([2, 3, 5]), st.lists(st.integers(0, 10**4), min_size=2, max_size=6),
       st.lists(st.integers(0, 10**4), min_size=2, max_size=6), st.integers(0, 10**4))
def test_evaluate_compatible_with_compose(p, fc, gc, xr):
    K, D = 10, 12
    f = S(fc, p, K, D, poly=True)
    g = S([gc[0] * p] + gc[1:], p, K, D, poly=True)
    x = PadicInt.make(xr * p, p, K)
    lhs = evaluate(compose(f, g), x)
    inner = evaluate(g, x)
    rhs = evaluate(f, inner.value)
    prec = min(lhs.precision, inner.precision, rhs.precision)
    assert (lhs.value.value - rhs.value.value) % p**prec == 0


def _tower_roots(coeffs, p, K):
    level = [r for r in range(p) if sum(c * r**i for i, c in enumerate(coeffs)) % p == 0]
    for k in range(2, K + 1):
        mod = p**k
        level = [r + d * p ** (k - 1) for r in level for d in range(p)
                 if sum(c * pow(r + d * p ** (k - 1), i, mod) for i, c in enumerate(coeffs)) % mod == 0]
    return level


def _expand(roots, p):
    """prod (z - r) * (1 - p z), ascending integer coefficients."""
    poly = [1]
    for fac in [[-r, 1] for r in roots] + [[1, -p]]:
        nxt = [0] * (len(poly) + 1)
        for i, c in enumerate(poly):
            nxt[i] += c * fac[0]
            nxt[i + 1] += c * fac[1]
        poly = nxt
    return poly


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([2, 3, 5]), st.integers(4, 8), st.data())
def test_newton_polygon_counts_split_polynomials(p, K, data):
    k = data.draw(st.integers(0, min(p, 4)))
    residues = data.draw(st.lists(st.integers(0, p - 1), min_size=k, max_size=k, unique=True))
    roots = [r + p * data.draw(st.integers(0, p**3)) for r in residues]
    poly = _expand(roots, p)
    f = TruncatedSeries.from_ints(poly, p, K + 6, len(poly) - 1, poly=True)
    assert newton_polygon(f).unit_disk_zeros == len(roots) == len(_tower_roots(poly, p, K))
    if roots:
        assert sorted(isolate_zeros(f).roots()) == sorted(r % p ** (K + 6) for r in roots)
