import random

import pytest
from hypothesis import given, settings, strategies as st

from padicgap.dynamics import (
    ATTRACTING,
    INF,
    QUASIPERIODIC,
    SUPERATTRACTING,
    ProjPoint,
    RationalMap,
    apply,
    classify_fixed,
    good_reduction_check,
    homogeneous_resultant,
    orbit,
    pgl_normalize,
    reduce_class,
    residue_cycle,
)
from padicgap.errors import BadReduction, ClassNotStable
from padicgap.padic_core import PadicInt
from padicgap.power_series import TruncatedSeries, evaluate_value


def fmap(num, den=(1,)):
    return RationalMap.from_coeffs(num, den)


def pt(z, p=3, K=8):
    return ProjPoint.from_value(z, p, K)


def test_good_reduction_examples():
    assert good_reduction_check(fmap([0, 0, 1]), 7)
    # a polynomial map always has unit resultant (see the decisions ledger)
    assert good_reduction_check(fmap([0, 3, 1]), 3)
    for p in (2, 3, 5, 7):
        assert good_reduction_check(fmap([1, 1]), p)
    # (z^2 + p)/z has resultant +-p
    assert not good_reduction_check(fmap([5, 0, 1], [0, 1]), 5)
    assert good_reduction_check(fmap([5, 0, 1], [0, 1]), 3)


def test_resultant_sylvester_by_hand():
    # Res(F, ab) = Res(F, a) Res(F, b) = F(0, 1) F(1, 0) up to sign
    assert abs(homogeneous_resultant((2, 0, 1), (0, 1, 0))) == 2
    assert abs(homogeneous_resultant((3, 0, 1), (0, 1, 0))) == 3
    # Res(a - 2b, a - 5b) = 5 - 2 up to sign
    assert abs(homogeneous_resultant((-2, 1), (-5, 1))) == 3


def test_residue_cycle_examples():
    r = residue_cycle(fmap([0, 0, 1]), pt(2), 3)
    assert (r.ell, r.k) == (1, 1)
    r = residue_cycle(fmap([1, 1]), pt(0, 2), 2)
    assert (r.ell, r.k) == (0, 2)
    for x in range(5):
        r = residue_cycle(fmap([0, 1]), pt(x, 5), 5)
        assert (r.ell, r.k) == (0, 1)
    with pytest.raises(BadReduction):
        residue_cycle(fmap([5, 0, 1], [0, 1]), pt(1, 5), 5)


def _classes(p):
    return list(range(p)) + [INF]


@pytest.mark.parametrize("p", [2, 3, 5, 7, 11, 13])
def test_residue_cycle_brute_force(p):
    rng = random.Random(p)
    for _ in range(5):
        while True:
            num = [rng.randrange(-5, 6) for _ in range(3)]
            den = [rng.randrange(-5, 6) for _ in range(3)]
            try:
                f = fmap(num, den)
            except ValueError:
                continue
            if good_reduction_check(f, p):
                break
        for c in _classes(p):
            x = ProjPoint.make(1, 0, p, 4) if c == INF else ProjPoint.make(c, 1, p, 4)
            r = residue_cycle(f, x, p)
            assert r.k + r.ell <= p + 1

            def it(c, n):
                for _ in range(n):
                    c = reduce_class(f, c, p)
                return c
            assert it(c, r.ell + r.k) == it(c, r.ell)
            assert all(it(c, r.ell + j) != it(c, r.ell) for j in range(1, r.k))
            if r.ell:
                assert it(c, r.ell - 1) != it(c, r.ell - 1 + r.k)


def test_pgl_normalize_examples():
    p, K, D = 3, 10, 6
    loc = pgl_normalize(fmap([0, 3, 1]), 0, 1, p, K, D)
    assert loc.series.coeffs[:3] == (0, 3, 1)
    loc = pgl_normalize(fmap([0, 0, 1]), INF, 1, p, K, D)
    assert loc.series.coeffs[:4] == (0, 0, 1, 0)
    loc = pgl_normalize(fmap([0, 0, 1]), 1, 1, p, K, D)
    assert loc.series.coeffs[:4] == (0, 2, 1, 0)
    with pytest.raises(ClassNotStable):
        pgl_normalize(fmap([1, 1]), 0, 1, p, K, D)


def test_pgl_normalize_conjugacy():
    # every residue class that lies on a cycle of (z^2 + 2)/(z + 3) at p = 5
    p, K, D = 5, 12, 14
    f = fmap([2, 0, 1], [3, 1])
    rng = random.Random(1)
    checked = 0
    for c in _classes(p):
        x = ProjPoint.make(1, 0, p, K) if c == INF else ProjPoint.make(c, 1, p, K)
        r = residue_cycle(f, x, p)
        if r.ell:
            continue
        loc = pgl_normalize(f, c, r.k, p, K, D)
        checked += 1
        for _ in range(50):
            t = rng.randrange(p**K) * p % p**K
            if c == INF:
                start = ProjPoint.make(1, t, p, K)
            else:
                start = ProjPoint.make(c + t, 1, p, K)
            img = start
            for _ in range(r.k):
                img = apply(f, img)
            want = img.local_coordinate(c)
            got = evaluate_value(loc.series, PadicInt.make(t, p, K))
            prec = min(K - loc.series.loss, (D + 1))
            assert (got.value - want.value) % p**prec == 0
    assert checked >= 2


def test_classify_examples():
    p, K, D = 3, 10, 8
    c = classify_fixed(TruncatedSeries.from_ints([0, p], p, K, D))
    assert c.tag == ATTRACTING and c.lam.value == p and c.e == 1 and c.beta.value == 1 and c.y.value == 0
    c = classify_fixed(TruncatedSeries.from_ints([0, 0, 1], p, K, D))
    assert c.tag == SUPERATTRACTING and c.m == 2 and c.c_m.value == 1
    c = classify_fixed(TruncatedSeries.from_ints([p, 1], p, K, D))
    assert c.tag == QUASIPERIODIC


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([3, 5, 7]), st.integers(1, 30), st.integers(1, 30), st.integers(0, 30))
def test_attracting_fixed_point_is_fixed(p, a0, a1, a2):
    K, D = 12, 8
    s = TruncatedSeries.from_ints([a0 * p, a1 * p, a2], p, K, D, poly=True)
    c = classify_fixed(s)
    assert c.tag in (ATTRACTING, SUPERATTRACTING)
    assert evaluate_value(s, c.y) == c.y
    if c.tag == ATTRACTING:
        assert c.e >= 1 and c.lam.val == c.e


def test_orbit_examples():
    o = orbit(fmap([0, 0, 1]), pt(1), 4)
    assert o.preperiodic and all(q.a.value == 1 for q in o.points)
    o = orbit(fmap([1, 1]), pt(0, 5, 4), 3)
    assert [q.a.value for q in o.points] == [0, 1, 2, 3] and not o.preperiodic
    o = orbit(fmap([0, 0, 1]), pt(2, 3, 4), 3)
    assert [q.a.value for q in o.points] == [2, 4, 16, 13]
