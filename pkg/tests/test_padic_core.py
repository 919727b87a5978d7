import pytest
from hypothesis import given, strategies as st

from padicgap import kernels
from padicgap.errors import (
    LiftingFails,
    NoRoot,
    NotAUnit,
    NotPAdicInteger,
    NotPrime,
    PrecisionMismatch,
    ZeroDenominator,
)
from padicgap.padic_core import (
    PadicInt,
    Prime,
    add,
    from_rational,
    hensel_root,
    invert,
    mul,
    mult_order_mod_p,
    pow_p_tower,
    sub,
    vp,
)


def P(v, p, K):
    return PadicInt.make(v, p, K)


def test_prime_checked():
    assert Prime(7) == 7
    with pytest.raises(NotPrime):
        Prime(9)
    with pytest.raises(NotPrime):
        Prime(1)


def test_from_rational_examples():
    assert from_rational(1, 3, 2, 4).value == 11
    z = from_rational(0, 1, 5, 6)
    assert z.is_zero and z.val == 6
    with pytest.raises(NotPAdicInteger):
        from_rational(1, 2, 2, 8)
    with pytest.raises(ZeroDenominator):
        from_rational(1, 0, 3, 4)
    # joint removal of p from numerator and denominator
    assert from_rational(6, 2, 2, 5).value == 3


def test_ring_examples():
    s = add(P(3, 2, 3), P(5, 2, 3))
    assert s.value == 0 and s.val == 3
    x = P(13, 5, 4)
    assert mul(x, P(1, 5, 4)) == x
    m = mul(P(2, 2, 4), P(6, 2, 4))
    assert m.value == 12 and m.val == 2
    assert sub(P(1, 3, 2), P(2, 3, 2)).value == 8
    with pytest.raises(PrecisionMismatch):
        add(P(1, 3, 2), P(1, 3, 3))
    with pytest.raises(PrecisionMismatch):
        add(P(1, 3, 2), P(1, 5, 2))


def test_invert_examples():
    assert invert(P(1, 3, 5)).value == 1
    assert invert(P(3, 2, 4)).value == 11
    with pytest.raises(NotAUnit):
        invert(P(2, 2, 4))


def test_hensel_examples():
    r = hensel_root(P(9, 7, 6), 2)
    assert r.value % 7 == 3 and (r * r).value == 9
    c = P(123, 5, 5)
    assert hensel_root(c, 1) == c
    with pytest.raises(NoRoot):
        hensel_root(P(2, 5, 6), 2)


def test_hensel_wild_square_roots():
    # x**2 = 17 in Z_2: 17 = 1 mod 8 has a root, 3 mod 8 does not
    r = hensel_root(P(17, 2, 12), 2)
    assert (r * r).value % 2**9 == 17 % 2**9
    with pytest.raises((NoRoot, LiftingFails)):
        hensel_root(P(3, 2, 12), 2)


def test_mult_order_examples():
    assert mult_order_mod_p(P(8, 7, 3)) == 1
    assert mult_order_mod_p(P(2, 7, 3)) == 3
    assert mult_order_mod_p(P(3, 5, 3)) == 4
    with pytest.raises(NotAUnit):
        mult_order_mod_p(P(5, 5, 3))


def test_pow_p_tower_examples():
    assert pow_p_tower(3, 2, 2, 10).value == 512
    z = pow_p_tower(2, 20, 2, 10)
    assert z.is_zero and z.val == 10
    assert pow_p_tower(1, 5, 7, 4).value == 7


@pytest.mark.parametrize("p", [2, 3, 5])
def test_pow_p_tower_naive(p):
    for m in range(1, 4):
        for n in range(5):
            for K in (1, 5, 17, 64):
                assert pow_p_tower(m, n, p, K).value == pow(p, m**n, p**K)


@pytest.mark.parametrize("p", [2, 3, 5, 7, 11, 13])
def test_mult_order_divides(p):
    for u in range(1, p):
        M = mult_order_mod_p(P(u, p, 3))
        assert (p - 1) % M == 0
        assert pow(u, M, p) == 1 and all(pow(u, j, p) != 1 for j in range(1, M))


def test_vp():
    assert vp(48, 2) == 4
    assert vp(0, 3) is None
    assert vp(-27, 3) == 3


def test_backend_reported():
    assert kernels.BACKEND in ("cython", "python")


padics = st.tuples(st.sampled_from([2, 3, 5, 7]), st.integers(1, 12)).flatmap(
    lambda pk: st.tuples(st.just(pk[0]), st.just(pk[1]),
                         st.integers(0, pk[0] ** pk[1] - 1), st.integers(0, pk[0] ** pk[1] - 1)))


@given(padics)
def test_valuation_laws(data):
    p, K, a, b = data
    x, y = P(a, p, K), P(b, p, K)
    assert mul(x, y).val == min(x.val + y.val, K)
    s = add(x, y)
    assert s.val >= min(x.val, y.val)
    if x.val != y.val:
        assert s.val == min(x.val, y.val)
    assert 0 <= s.value < p**K


@given(padics)
def test_invert_roundtrip(data):
    p, K, a, _ = data
    x = P(a, p, K)
    if x.val == 0:
        assert mul(x, invert(x)).value == 1 % p**K


@given(st.sampled_from([3, 5, 7, 11]), st.integers(1, 10**6), st.integers(1, 4))
def test_hensel_power_roundtrip(p, a, r):
    if a % p == 0 or r % p == 0:
        return
    c = P(pow(a, r, p**10), p, 10)
    root = hensel_root(c, r)
    assert root**r == c
    # smallest residue seed
    seeds = [x for x in range(p) if pow(x, r, p) == c.value % p and r * pow(x, r - 1, p) % p]
    assert root.value % p == seeds[0]
