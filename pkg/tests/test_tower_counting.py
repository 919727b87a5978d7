import math
from fractions import Fraction

import pytest

from padicgap.growth import RationalPower
from padicgap.tower_counting import L_C, ceil_power, counting_check, tower_compare, up_arrow


def test_up_arrow_examples():
    assert up_arrow(2, 3).exact == 16
    assert up_arrow(2, 4).exact == 65536
    assert up_arrow(3, 1).exact == 3
    big = up_arrow(2, 6)
    assert big.exact is None and big.height == 6
    with pytest.raises(ValueError):
        up_arrow(1, 3)
    with pytest.raises(ValueError):
        up_arrow(2, 0)


def test_tower_compare_examples():
    assert tower_compare(up_arrow(2, 3), 100) == -1
    assert tower_compare(up_arrow(2, 4), 100) == 1
    assert tower_compare(up_arrow(Fraction(5, 2), 1), 2) == 1
    assert tower_compare(up_arrow(Fraction(5, 2), 1), Fraction(5, 2)) == 0
    assert tower_compare(up_arrow(2, 6), 10**100) == 1


def test_L_C_examples():
    assert L_C(2, 1) == 1
    assert L_C(2, 100) == 4
    assert L_C(2, 16) == 4
    assert L_C(2, 15) == 3


def _small_tower(C: Fraction, m: int):
    """C^^m as an exact rational when it stays tiny, else None."""
    val = C
    for _ in range(m - 1):
        if val.denominator != 1 or val > 4000:
            return None
        val = C ** int(val)
    return val


@pytest.mark.parametrize("C", [Fraction(3, 2), Fraction(2), Fraction(3)])
def test_up_arrow_monotone(C):
    for m in range(1, 5):
        assert tower_compare(up_arrow(C, m + 1), up_arrow(C, m)) == 1
    assert tower_compare(up_arrow(C + Fraction(1, 2), 3), up_arrow(C, 3)) == 1


@pytest.mark.parametrize("C", [Fraction(3, 2), Fraction(2), Fraction(3), Fraction(5, 2)])
def test_L_C_of_a_tower_is_one_more(C):
    for m in range(1, 5):
        t = up_arrow(C, m)
        if t.exact is None or not isinstance(t.exact, int):
            y = math.floor(t.exact) if t.exact is not None else None
            if y is None or y < 2:
                continue
            # floor(C^^m) < C^^m, so the tower itself is the first to exceed it
            assert L_C(C, y) == m
        else:
            assert L_C(C, t.exact) == m + 1


def test_tower_compare_matches_integers():
    for C in (2, 3, Fraction(3, 2), Fraction(7, 4)):
        for m in (1, 2, 3):
            exact = _small_tower(Fraction(C), m)
            if exact is None:
                continue
            for y in range(1, 200):
                want = (exact > y) - (exact < y)
                assert tower_compare(up_arrow(C, m), y) == want


def test_ceil_power():
    assert ceil_power(2) == 2
    assert ceil_power(Fraction(5, 2)) == 3
    assert ceil_power(RationalPower(Fraction(23, 8), Fraction(1, 2))) == 2
    assert ceil_power(RationalPower(Fraction(4), Fraction(1, 2))) == 2
    assert ceil_power(RationalPower(Fraction(3, 2), Fraction(7, 2))) == 5


def test_counting_examples():
    rep = counting_check([], 3, 2, 0, range(1, 50))
    assert rep.passed and rep.A == 3 + 3 * 2
    # class 1 of N = 1 sees n = t - 1 = 2, 4, 6, ...; n = 2 is not above C,
    # and gaps of 2 never beat 2**n
    prog = list(range(3, 40, 2))
    rep = counting_check(prog, 1, 2, 0, [39])
    assert not rep.passed and rep.chain_failures[0] == (1, 1, 4, 6)
    # a genuinely sparse set
    sparse = [3, 7, 30]
    assert counting_check(sparse, 1, Fraction(3, 2), 0, range(1, 60)).passed


def test_counting_from_certificates(certificates):
    for name, cert in certificates:
        rep = counting_check(cert.all_zeros(), cert.N, cert.C, cert.T, range(2, cert.n_max + 1))
        assert rep.passed, name
