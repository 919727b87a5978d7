from fractions import Fraction

import pytest

from conftest import poly_map
from padicgap import Config, GapCertificate, MultiPoly, PeriodicWitness, ProblemInstance, analyze, boost
from padicgap.dynamics import ATTRACTING, QUASIPERIODIC, SUPERATTRACTING, RationalMap
from padicgap.errors import NoPrimeFound, WrongShape
from padicgap.growth import minimal_index
from padicgap.pipeline import (
    CONSTANT,
    build_F,
    build_G,
    curve_case_analyze,
    orbit_zero_scan,
    prepare_coordinate,
    prime_search,
    spot_check,
)

z2 = poly_map(0, 0, 1)
f = poly_map(1, 0, 1)  # z^2 + 1
cfg = Config(K=20, D=16, n_max=60, prime_range=(3, 50))


def inst(maps, point, variety, config=cfg):
    return ProblemInstance(tuple(maps), tuple(point), tuple(variety), config)


def test_prime_search_examples():
    ps = prime_search(inst((z2, z2), (2, 3), (MultiPoly.diagonal(),)))
    assert ps[0] == 3
    assert [int(p) for p in ps] == [p for p in range(3, 51) if all(p % q for q in range(2, p))]
    bad = RationalMap.from_coeffs([5, 0, 1], [0, 1])  # (z^2 + 5)/z
    assert 5 not in prime_search(inst((bad,), (2,), MultiPoly.point([1])))
    assert 7 not in prime_search(inst((f,), (Fraction(1, 7),), MultiPoly.point([1])))
    with pytest.raises(NoPrimeFound):
        prime_search(inst((z2,), (2,), MultiPoly.point([1])), (24, 28))


def test_prepare_coordinate_kinds():
    p = 3
    pr = prepare_coordinate(z2, p, p, 20, 12)
    assert pr.kind == SUPERATTRACTING and pr.cycle_class == 0
    pr = prepare_coordinate(poly_map(1, 1), 0, 2, 20, 12)
    assert pr.kind == QUASIPERIODIC and pr.cycle_len == 2 and pr.k_eff % 2 == 0
    pr = prepare_coordinate(z2, 1 + p, p, 20, 12)
    assert pr.kind == QUASIPERIODIC and pr.cycle_class == 1
    pr = prepare_coordinate(poly_map(0, 3, 1), 3, p, 20, 12)
    assert pr.kind == ATTRACTING
    pr = prepare_coordinate(z2, -1, p, 20, 12)
    assert pr.kind == CONSTANT and (pr.entry, pr.cycle_len) == (1, 1)


@pytest.mark.parametrize("m, x, p", [
    (poly_map(3, 1), 0, 3),          # z + p
    (poly_map(0, 3, 0, 1), 3, 3),    # p z + z^3
    (z2, 3, 3),                      # z^2 at 0
    (poly_map(0, 3, 1), 3, 3),       # attracting, nonlinear
    (f, 2, 5),                       # z^2 + 1, periodic residue class
    (z2, 4, 3),                      # quasiperiodic at the class of 1
])
def test_build_F_matches_orbit(m, x, p):
    pr = prepare_coordinate(m, x, p, 20, 14)
    k = pr.k_eff
    arity = pr.slot_index(1)
    for ell in range(pr.entry, pr.entry + 2):
        assert spot_check(pr, ell, k)
        F = build_F(pr, ell, k, arity)
        cls = pr.class_at(ell)
        for n in range(6):
            S, loss, prec = F.evaluate_prec(n)
            want = pr.point_at(ell + n * k).local_coordinate(cls)
            assert prec >= 5
            assert (S.value - want.value * p**loss) % p ** (prec + loss) == 0


def _G(instance, p=5, ell=None):
    c = instance.config
    preps = [prepare_coordinate(m, x, p, c.K, c.D, j)
             for j, (m, x) in enumerate(zip(instance.maps, instance.point))]
    k = preps[0].k_eff
    for q in preps:
        k = k * q.k_eff // __import__("math").gcd(k, q.k_eff)
    ell = max(q.entry for q in preps) if ell is None else ell
    Fs = [build_F(q, ell, k) for q in preps]
    return [build_G(H, Fs, [q.class_at(ell) for q in preps], 1, c.D) for H in instance.variety]


def test_build_G_examples():
    same = inst((f, f), (2, 2), (MultiPoly.diagonal(),))
    assert all(G.is_zero() for G in _G(same))
    shifted = inst((f, f), (1, 2), (MultiPoly.graph_shift(1),))
    assert not _G(shifted)[0].is_zero()
    far = inst((f,), (2,), MultiPoly.point([4]))
    G = _G(far)[0]
    v = minimal_index(G)
    assert v == (0,) and G.slots[v].coeff_val(0) == 0


def test_analyze_witness_on_diagonal():
    res = analyze(inst((f, f), (2, 2), (MultiPoly.diagonal(),)))
    assert isinstance(res, PeriodicWitness) and res.validated
    # z^2 + 1 at 3: the class of 2 is fixed with unit derivative, affine period 3
    assert res.p == 3 and res.k == 3
    assert res.samples == [res.ell1 + n * res.k for n in range(len(res.samples))]


def test_analyze_empty_and_singleton():
    res = analyze(inst((f, f), (2, 5), (MultiPoly.diagonal(),)))
    assert isinstance(res, GapCertificate) and res.passed and res.all_zeros() == []
    res = analyze(inst((f,), (2,), MultiPoly.point([26])))
    assert res.passed and res.all_zeros() == [2]


def test_boost_examples(certificates):
    for _, cert in certificates:
        same = boost(cert, 1)
        assert (same.N, same.C) == (cert.N, cert.C)
        twice = boost(cert, 2, Fraction(1, 2))
        pM = cert.p**cert.M
        assert twice.N == 2 * cert.N and twice.C.exponent == 2 * pM - Fraction(1, 2)
        assert twice.passed and twice.all_zeros() == cert.all_zeros()


def test_certificate_soundness(certificates):
    for name, cert in certificates:
        assert cert.passed, name
        for rec in cert.classes:
            zs = rec.zeros
            for a in range(len(zs)):
                for b in range(a + 1, len(zs)):
                    if zs[a] >= cert.threshold:
                        assert cert.C.exceeded_by(zs[b] - zs[a], zs[a]), name


def test_certificate_zeros_match_orbit_scan(certificates):
    from padicgap.pipeline import _prepare_all
    for (name, inst_), (_, cert) in zip(__import__("conftest").general_corpus(), certificates):
        preps, *_ = _prepare_all(inst_, cert.p)
        assert cert.all_zeros() == orbit_zero_scan(inst_, preps, cert.n_max), name


@pytest.mark.parametrize("e", [1, 2, 3, 4])
@pytest.mark.parametrize("eps", [Fraction(1, 4), Fraction(1, 2)])
def test_boost_soundness(certificates, e, eps):
    for name, cert in certificates:
        b = boost(cert, e, eps)
        assert b.passed, name
        for rec in b.classes:
            for a, c in zip(rec.zeros, rec.zeros[1:]):
                if a >= b.threshold:
                    assert b.C.exceeded_by(c - a, a)


def test_curve_guards():
    lin = poly_map(1, 1)
    with pytest.raises(WrongShape):
        curve_case_analyze(inst((lin, lin), (0, 1), (MultiPoly.diagonal(),)), 5)
    with pytest.raises(WrongShape):
        curve_case_analyze(inst((f, f), (1, 2), (MultiPoly.graph_shift(1),)), 5)
    with pytest.raises(WrongShape):
        curve_case_analyze(inst((f,), (1,), MultiPoly.point([1])), 5)
