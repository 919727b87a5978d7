"""From orbit data to gap certificates.

For each coordinate the orbit is followed into a residue cycle, linearized
there, and written as ``F_{j,l}`` in the slot variables ``(z0, z1 = p**n,
z_J = p**(J**n))``.  Substituting into the dehomogenized variety equations
gives the slot series ``G_{H,l}``.  If every ``G_{H,l}`` vanishes at
precision the progression ``l + k N`` lies on V; otherwise the minimal slot
controls the gaps between zeros.

Zero scanning uses the exact orbit modulo ``p**K``: by construction
``G_{H,l}(n, p**n, ...)`` is the variety equation evaluated at
``Phi**(l + n k)(P)``, so the two agree wherever the series converge.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .dynamics import (
    ATTRACTING,
    INF,
    QUASIPERIODIC,
    SUPERATTRACTING,
    ProjPoint,
    RationalMap,
    _step_series,
    apply,
    classify_fixed,
    good_reduction_check,
    pgl_normalize,
    reduce_class,
    residue_cycle,
)
from .errors import (
    BadReduction,
    LiftingFails,
    MultipleZeros,
    NoPrimeFound,
    NoRoot,
    NotAUnit,
    NoZero,
    PadicGapError,
    PeriodicAnchor,
    PrecisionExhausted,
    WrongShape,
)
from .growth import (
    GapReport,
    MultiIndex,
    RationalPower,
    SlotSeries,
    c0_below_root,
    ceil_log_ratio,
    claim_M,
    gap_constant,
    minimal_index,
    verify_gap,
)
from .linearize import (
    LinearizationData,
    binomial_char,
    boettcher,
    bounded_k,
    flow_series,
    koenigs,
    quasi_flow,
)
from .padic_core import PadicInt, Prime, hensel_root, is_prime, mult_order_mod_p, vp
from .power_series import (
    TruncatedSeries,
    compose,
    derivative,
    evaluate,
    exp,
    isolate_zeros,
    log1p,
)

__all__ = [
    "MultiPoly",
    "Config",
    "ProblemInstance",
    "CoordinatePrep",
    "ClassRecord",
    "GapCertificate",
    "PeriodicWitness",
    "prime_search",
    "prepare_coordinate",
    "build_F",
    "F_value",
    "build_G",
    "orbit_zero_scan",
    "spot_check",
    "exact_preperiod",
    "power_tower_char",
    "boost_threshold",
    "analyze",
    "boost",
    "curve_case_analyze",
]

CONSTANT = "constant"  # preperiodic coordinate: constant along each class
MAX_ARITY = 1 << 12


# instance data ---------------------------------------------------------------


@dataclass(frozen=True)
class MultiPoly:
    """Multihomogeneous polynomial in pairs (a_j, b_j).

    A term ``(c, (i_1, ..., i_g))`` is ``c * prod a_j**i_j * b_j**(d_j - i_j)``.
    """

    degrees: tuple
    terms: tuple

    def __post_init__(self):
        object.__setattr__(self, "degrees", tuple(int(d) for d in self.degrees))
        terms = tuple((int(c), tuple(int(i) for i in e)) for c, e in self.terms if c)
        for _, e in terms:
            if len(e) != len(self.degrees) or any(not 0 <= i <= d for i, d in zip(e, self.degrees)):
                raise ValueError(f"exponent {e} does not fit degrees {self.degrees}")
        object.__setattr__(self, "terms", terms)

    @property
    def arity(self) -> int:
        return len(self.degrees)

    def evaluate_hom(self, pts, mod: int | None = None) -> int:
        """Value at projective representatives pts = [(a_j, b_j)]."""
        total = 0
        for c, e in self.terms:
            t = c
            for (a, b), i, d in zip(pts, e, self.degrees):
                if mod:
                    t = t * pow(a, i, mod) * pow(b, d - i, mod) % mod
                else:
                    t *= a**i * b ** (d - i)
            total += t
        return total % mod if mod else total

    @classmethod
    def diagonal(cls) -> "MultiPoly":
        """a1 b2 - a2 b1: the diagonal of P1 x P1."""
        return cls((1, 1), ((1, (1, 0)), (-1, (0, 1))))

    @classmethod
    def graph_shift(cls, s: int) -> "MultiPoly":
        """z2 = z1 + s, i.e. a2 b1 - a1 b2 - s b1 b2."""
        return cls((1, 1), ((1, (0, 1)), (-1, (1, 0)), (-s, (0, 0))))

    @classmethod
    def point(cls, values) -> list:
        """Generators of the single point (v_1, ..., v_g) (integers)."""
        g = len(values)
        out = []
        for j, v in enumerate(values):
            e1 = tuple(1 if i == j else 0 for i in range(g))
            e0 = (0,) * g
            deg = tuple(1 if i == j else 0 for i in range(g))
            out.append(cls(deg, ((1, e1), (-int(v), e0))))
        return out


@dataclass(frozen=True)
class Config:
    K: int = 20
    D: int = 16
    n_max: int = 200
    prime_range: tuple = (3, 50)
    epsilon: Fraction = Fraction(1, 2)

    def __post_init__(self):
        object.__setattr__(self, "epsilon", Fraction(self.epsilon))
        object.__setattr__(self, "prime_range", tuple(self.prime_range))
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.K < 2 or self.D < 1:
            raise ValueError("need K >= 2 and D >= 1")


@dataclass(frozen=True)
class ProblemInstance:
    maps: tuple
    point: tuple  # Fractions or INF
    variety: tuple  # MultiPoly generators
    config: Config = Config()

    def __post_init__(self):
        object.__setattr__(self, "maps", tuple(self.maps))
        object.__setattr__(self, "point", tuple(x if x == INF else Fraction(x) for x in self.point))
        object.__setattr__(self, "variety", tuple(self.variety))
        g = len(self.maps)
        if len(self.point) != g or any(H.arity != g for H in self.variety):
            raise ValueError("maps, point and variety arities disagree")

    @property
    def g(self) -> int:
        return len(self.maps)


# primes ---------------------------------------------------------------------------


def _p_integral(x, p: int) -> bool:
    if x == INF:
        return True
    return Fraction(x).denominator % p != 0


def prime_search(instance: ProblemInstance, prime_range=None) -> list:
    """Primes in the range with good reduction, p-integral data and
    solvable Boettcher roots for the coordinates' superattracting cycles."""
    lo, hi = prime_range if prime_range is not None else instance.config.prime_range
    out = []
    for p in range(max(lo, 2), hi + 1):
        if not is_prime(p):
            continue
        if not all(good_reduction_check(f, p) for f in instance.maps):
            continue
        if not all(_p_integral(x, p) for x in instance.point):
            continue
        if not _roots_ok(instance, p):
            continue
        out.append(Prime(p))
    if not out:
        raise NoPrimeFound(f"no admissible prime in [{lo}, {hi}]")
    return out


def _roots_ok(instance: ProblemInstance, p: int) -> bool:
    K, D = instance.config.K, instance.config.D
    for f, x in zip(instance.maps, instance.point):
        try:
            pt = ProjPoint.from_value(x, p, K)
            rc = residue_cycle(f, pt, p)
            local = pgl_normalize(f, rc.classes[rc.ell], rc.k, p, K, D)
            fc = classify_fixed(local)
        except PadicGapError:
            continue  # not a root problem; later stages report it
        if fc.tag == SUPERATTRACTING:
            if fc.c_m.val % (fc.m - 1):
                return False
            try:
                hensel_root(fc.c_m.unit_part(), fc.m - 1)
            except (NoRoot, LiftingFails, NotAUnit):
                return False
    return True


# coordinate preparation ----------------------------------------------------------


def exact_preperiod(f: RationalMap, x, max_steps: int = 24, max_bits: int = 4096):
    """(preperiod, period) if the exact rational orbit repeats early, else None."""
    seen = {}
    z = x
    for t in range(max_steps + 1):
        key = z if z == INF else (z.numerator, z.denominator)
        if key in seen:
            return seen[key], t - seen[key]
        seen[key] = t
        z = f(z)
        if z != INF and max(z.numerator.bit_length(), z.denominator.bit_length()) > max_bits:
            return None
    return None


@dataclass
class CoordinatePrep:
    j: int
    f: RationalMap
    x: object
    p: int
    K: int
    D: int
    kind: str
    entry: int  # the linearization describes f**(entry + n k_eff)(x)
    k_eff: int
    cycle_len: int
    cycle_class: object = None
    lin: LinearizationData | None = None
    local_point: PadicInt | None = None  # eta(f**entry(x)) at the cycle class
    mu: PadicInt | None = None
    mu_prec: int = 0
    g_prec: int | None = None  # digits to which g_char is known, when below K
    g_char: TruncatedSeries | None = None  # n-dependence of the multiplier
    e_eff: int = 0  # z-slot exponent per power of the linear coordinate
    J: int = 1  # superattracting slot base: each k_eff step raises t to the J
    loss: int = 0
    _orbit: list = field(default_factory=list, repr=False)

    def point_at(self, t: int) -> ProjPoint:
        if not self._orbit:
            self._orbit.append(ProjPoint.from_value(self.x, self.p, self.K))
        while len(self._orbit) <= t:
            self._orbit.append(apply(self.f, self._orbit[-1]))
        return self._orbit[t]

    def class_at(self, t: int):
        return self.point_at(t).residue()

    def slot_index(self, c: int) -> int:
        """Slot of the n-dependence when k = c * k_eff."""
        if self.kind == SUPERATTRACTING:
            return self.J**c
        return 1


def prepare_coordinate(f: RationalMap, x, p, K: int, D: int, j: int = 0) -> CoordinatePrep:
    """Residue cycle, local normal form, classification and linearization."""
    p = int(Prime(p))
    if not good_reduction_check(f, p):
        raise BadReduction(f"map {j} has bad reduction at {p}")
    x = x if x == INF else Fraction(x)
    exact = exact_preperiod(f, x)
    if exact is not None:
        a, b = exact
        prep = CoordinatePrep(j, f, x, p, K, D, CONSTANT, a, b, b)
        prep.cycle_class = prep.class_at(a)
        return prep
    pt = ProjPoint.from_value(x, p, K)
    rc = residue_cycle(f, pt, p)
    ell, kc = rc.ell, rc.k
    prep = CoordinatePrep(j, f, x, p, K, D, "", ell, kc, kc, rc.classes[ell])
    cls = prep.cycle_class
    local = pgl_normalize(f, cls, kc, p, K, D)
    fc = classify_fixed(local)
    series = local.series
    if fc.tag == QUASIPERIODIC:
        x_loc = prep.point_at(ell).local_coordinate(cls)
        lin = quasi_flow(series, x_loc)
        prep.kind = QUASIPERIODIC
        prep.lin, prep.local_point, prep.mu = lin, x_loc, lin.mu
        prep.k_eff = kc * lin.lambda_or_m
        prep.loss = lin.loss
        return prep
    if fc.tag == ATTRACTING:
        lin = koenigs(series, fc.y, fc.lam)
        entry = _advance_into(prep, ell, kc, cls, fc.y, lin.r_val + 1)
        z = prep.point_at(entry).local_coordinate(cls)
        mu, prep.mu_prec = _eval_prec(lin.u_inv, lin.to_scaled(z), K)
        if mu.is_zero:
            raise PeriodicAnchor(f"coordinate {j}: orbit lands on the attracting point")
        M, g = binomial_char(fc.lam.unit_part(), D)
        # the unit part of lambda is only known mod p**(K - e), and so is g
        prep.g_prec = K - fc.e
        prep.kind = ATTRACTING
        prep.lin, prep.local_point, prep.mu = lin, z, mu
        prep.entry, prep.k_eff = entry, kc * M
        prep.g_char, prep.e_eff = g, fc.e * M
        prep.loss = max(lin.loss, g.loss, fc.e)
        return prep
    return _prepare_superattracting(prep, series, fc)


def _prepare_superattracting(prep: CoordinatePrep, series, fc) -> CoordinatePrep:
    p, K, D, j = prep.p, prep.K, prep.D, prep.j
    m = fc.m
    if p == 2:
        raise WrongShape("superattracting coordinates need p odd")
    if m % p == 0:
        raise WrongShape("superattracting coordinate with p | m is not supported")
    if fc.c_m.val:
        raise WrongShape("superattracting coordinate with a non-unit leading coefficient")
    lin = boettcher(series, fc.y, m, fc.c_m, strict=True, s_val=0)
    kc, cls = prep.cycle_len, prep.cycle_class
    entry = _advance_into(prep, prep.entry, kc, cls, fc.y, 1)

    def mu_at(t):
        z = prep.point_at(t).local_coordinate(cls)
        return _eval_prec(lin.u_inv, lin.to_scaled(z), K)

    mu, prep.mu_prec = mu_at(entry)
    if mu.is_zero:
        raise PeriodicAnchor(f"coordinate {j}: orbit lands on the superattracting point")
    # the Teichmuller part omega of mu must satisfy omega**(J - 1) = 1; each step
    # replaces omega by omega**m, which eventually has order prime to m
    order = mult_order_mod_p(mu.unit_part())
    while math.gcd(order, m) != 1:
        entry += kc
        mu, prep.mu_prec = mu_at(entry)
        order = mult_order_mod_p(mu.unit_part())
    target = math.lcm(order, p)
    c = 1
    while (m**c - 1) % target:
        c += 1
    J = m**c
    if J > MAX_ARITY:
        raise WrongShape(f"superattracting slot index {J} exceeds the arity cap {MAX_ARITY}")
    prep.kind = SUPERATTRACTING
    prep.lin, prep.mu, prep.entry = lin, mu, entry
    prep.local_point = prep.point_at(entry).local_coordinate(cls)
    prep.k_eff = kc * c
    prep.J = J
    prep.e_eff = mu.val
    prep.g_char = power_tower_char(mu.unit_part(), J, D)
    prep.loss = max(lin.loss, prep.g_char.loss)
    return prep


def _advance_into(prep: CoordinatePrep, ell: int, kc: int, cls, y: PadicInt, need: int) -> int:
    t = ell
    for _ in range(4 * prep.K + 8):
        z = prep.point_at(t).local_coordinate(cls)
        if (z - y).val >= need:
            return t
        t += kc
    raise PrecisionExhausted("orbit did not enter the linearization disk")


def _integral_eval(series: TruncatedSeries, x: PadicInt) -> PadicInt:
    ev = evaluate(series, x)
    v = ev.value
    if ev.loss:
        s = v.p**ev.loss
        if v.value % s:
            raise PrecisionExhausted("value carries a denominator")
        return PadicInt.make(v.value // s, v.p, v.K)
    return v


def power_tower_char(u: PadicInt, J: int, D: int) -> TruncatedSeries:
    """Series h with h(n) = u**(J**n), for J = 1 mod p and omega(u)**(J-1) = 1."""
    p, K = u.p, u.K
    if p == 2 or (J - 1) % p:
        raise ValueError("need p odd and J = 1 mod p")
    omega = pow(u.value, p**K, p**K)  # Teichmuller representative
    one_unit = u * pow(omega, -1, p**K)
    if (pow(omega, J - 1, p**K) - 1) % p**K:
        raise ValueError("omega**(J - 1) != 1")
    L = log1p(TruncatedSeries.constant(one_unit.value - 1, p, K, D))
    _, GJ = binomial_char(PadicInt.make(J, p, K), D)  # GJ(n) = J**n
    arg = GJ * L.coeffs[0]
    arg = TruncatedSeries(p, K, arg.coeffs, arg.loss + L.loss, GJ.poly, GJ.tail_val)
    # as a series in n this is exp(L exp(n log J)); with val L, val log J >= 1
    # the n**j coefficient has valuation >= j (p - 2)/(p - 1)
    h = exp(arg) * omega
    tail = -(-(h.D + 1) * (p - 2) // (p - 1))
    return TruncatedSeries(p, K, h.coeffs, h.loss, False, tail)


# F and G ----------------------------------------------------------------------------


def _chain(f: RationalMap, cls, q: int, p: int, K: int, D: int):
    """eta_end o f**q o eta_cls**-1 and the end class."""
    series = TruncatedSeries.identity(p, K, D)
    c = cls
    for _ in range(q):
        d = reduce_class(f, c, p)
        series = compose(_step_series(f, c, d, p, K, D), series)
        c = d
    return series, c


def build_F(prep: CoordinatePrep, ell: int, k: int, m: int = 1) -> SlotSeries:
    """F_{j,l} with eta_{j,l}(f**(l + n k)(x)) = F(n, p**n, ..., p**(m**n))."""
    p, K, D = prep.p, prep.K, prep.D
    if ell < prep.entry:
        raise ValueError("l must be at least the coordinate's entry time")
    if k % prep.k_eff:
        raise ValueError("k must be a multiple of the coordinate's period")
    c = k // prep.k_eff
    zero = MultiIndex.zero(m)
    if prep.kind == CONSTANT:
        pt = prep.point_at(ell)
        const = TruncatedSeries.constant(pt.local_coordinate(pt.residue()), p, K, D)
        return SlotSeries(p, K, m, {zero: const})
    E, _ = _chain(prep.f, prep.cycle_class, ell - prep.entry, p, K, D)
    lin = prep.lin
    if prep.kind == QUASIPERIODIC:
        V = flow_series(lin)
        tail = V.tail_val
        V = V.scale_var(c)
        W = V * p**lin.r_val + prep.local_point
        F = compose(E, W)
        F = TruncatedSeries(p, K, F.coeffs, F.loss, False, tail)
        return SlotSeries(p, K, m, {zero: F}, B=max(1, F.loss))
    if prep.kind == ATTRACTING:
        W = lin.u * p**lin.r_val + lin.anchor
        g = prep.g_char.scale_var(c)
        step = prep.e_eff * c
        base = prep.mu.value
    else:
        W = lin.u * lin.extra["gamma_inv"] + lin.anchor
        g = prep.g_char if c == 1 else power_tower_char(prep.mu.unit_part(), prep.J**c, D)
        step = prep.e_eff
        base = 1  # mu**(J**n) = p**(e J**n) * g(n): g already carries the unit part
    slot = prep.slot_index(c)
    if slot > m:
        raise ValueError(f"arity {m} below the slot index {slot}")
    V = compose(E, W)
    slots = {}
    gi = TruncatedSeries.constant(1, p, K, D)
    mu_pow = 1
    mod = p**K
    for i in range(D + 1):
        coef = V.coeffs[i] * mu_pow % mod
        if coef:
            s = gi * coef
            s = TruncatedSeries(p, K, s.coeffs, s.loss + V.loss, s.poly, s.tail_val)
            w = MultiIndex.unit(slot, m, step * i) if i else zero
            slots[w] = slots[w] + s if w in slots else s
        gi = gi * g
        mu_pow = mu_pow * base % mod
    B = max([1] + [s.loss for s in slots.values()])
    # powers t**i with i > D: |g| = 1 and the coefficients of V are integral
    # up to V.loss, so each contributes val >= i val(base) - V.loss + f_w(n)
    floor = (D + 1) * (vp(base, p) or 0 if base % p**K else K) - V.loss
    tails = [(floor, MultiIndex.unit(slot, m, step * (D + 1)))]
    if prep.g_prec is not None:
        # an error of val g_prec in g moves every power g**i by at least as much
        tails.append((prep.g_prec - V.loss, zero))
    return SlotSeries(p, K, m, slots, B=B, tails=tuple(tails))


def _eval_prec(series: TruncatedSeries, x: PadicInt, x_prec: int) -> tuple[PadicInt, int]:
    """series(x) and the digits it is certified to, for x known mod p**x_prec."""
    ev = evaluate(series, x)
    return _integral_eval(series, x), min(ev.precision, x_prec - series.loss)


def F_value(prep: CoordinatePrep, ell: int, k: int, n: int, *, with_precision: bool = False):
    """eta(f**(l + n k)(x)) from the linearization, evaluated pointwise."""
    p, K, D = prep.p, prep.K, prep.D
    if prep.kind == CONSTANT:
        pt = prep.point_at(ell)
        val = pt.local_coordinate(pt.residue())
        return (val, K) if with_precision else val
    c = k // prep.k_eff
    E, _ = _chain(prep.f, prep.cycle_class, ell - prep.entry, p, K, D)
    lin = prep.lin
    local_steps = n * c * (prep.k_eff // prep.cycle_len)
    if prep.kind == QUASIPERIODIC:
        w, prec = _eval_prec(flow_series(lin), PadicInt.make(c * n, p, K), K)
        z, prec = prep.local_point + w * p**lin.r_val, prec + lin.r_val
    elif prep.kind == ATTRACTING:
        t = prep.mu * lin.lambda_or_m**local_steps
        w, prec = _eval_prec(lin.u, t, prep.mu_prec)
        z, prec = lin.anchor + w * p**lin.r_val, prec + lin.r_val
    else:
        e = lin.lambda_or_m**local_steps
        t = PadicInt.make(0, p, K) if e * prep.mu.val >= K else prep.mu**e
        w, prec = _eval_prec(lin.u, t, prep.mu_prec)
        z, prec = lin.from_scaled(w), prec + lin.extra.get("shift", lin.r_val)
    val, prec = _eval_prec(E, z, min(prec, K))
    return (val, prec) if with_precision else val


def _pair(F: SlotSeries, cls, m: int, D: int):
    p, K = F.p, F.K
    one = SlotSeries(p, K, m, {MultiIndex.zero(m): TruncatedSeries.constant(1, p, K, D)})
    if cls == INF:
        return one, F
    shift = SlotSeries(p, K, m, {MultiIndex.zero(m): TruncatedSeries.constant(cls, p, K, D)})
    return F + shift, one


def build_G(H: MultiPoly, Fs: list, classes: list, m: int, D: int) -> SlotSeries:
    """H(F_1, ..., F_g) dehomogenized along the classes of the l-th iterate,
    dropping slots with |w| > D."""
    p, K = Fs[0].p, Fs[0].K
    pairs = [_pair(F, c, m, D) for F, c in zip(Fs, classes)]
    total = SlotSeries(p, K, m, {})
    for coef, e in H.terms:
        term = SlotSeries(p, K, m, {MultiIndex.zero(m): TruncatedSeries.constant(1, p, K, D)})
        for (a, b), i, d in zip(pairs, e, H.degrees):
            for _ in range(i):
                term = term.mul(a, D)
            for _ in range(d - i):
                term = term.mul(b, D)
        total = total + term.scale(coef)
    return total


# certificates ------------------------------------------------------------------------


SPARSE = "SparseCertified"
TRIVIAL = "TrivialSeries"


@dataclass
class ClassRecord:
    offset: int  # orbit indices offset + N * m
    status: str
    v: tuple | None
    delta: int
    B: int
    M_claim: int | None
    zeros: list  # class indices m with offset + N m <= n_max
    gap: GapReport | None = None


@dataclass
class GapCertificate:
    kind: str  # "general" | "curve"
    p: int
    N: int
    T: int
    k: int
    M: int
    C0: Fraction
    epsilon: Fraction
    C: RationalPower
    threshold: int
    classes: list
    K: int
    D: int
    loss: int
    n_max: int
    boost_factor: int = 1
    extra: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        gaps = all(c.gap is None or c.gap.passed for c in self.classes)
        return gaps and self.extra.get("chain_ok", True)

    def all_zeros(self) -> list:
        """Orbit indices of every recorded zero, including those before T."""
        out = list(self.extra.get("early_zeros", []))
        for c in self.classes:
            out.extend(c.offset + self.N * m for m in c.zeros)
        return sorted(out)


@dataclass
class PeriodicWitness:
    ell1: int
    k: int
    samples: list
    n_max: int
    validated: bool
    p: int
    K: int


def _on_variety(instance: ProblemInstance, preps: list, t: int) -> bool:
    mod = preps[0].p ** preps[0].K
    pts = [(pr.point_at(t).a.value, pr.point_at(t).b.value) for pr in preps]
    return all(H.evaluate_hom(pts, mod) == 0 for H in instance.variety)


def orbit_zero_scan(instance: ProblemInstance, preps: list, t_max: int) -> list:
    """Orbit indices t <= t_max with Phi**t(P) on V at precision."""
    return [t for t in range(t_max + 1) if _on_variety(instance, preps, t)]


def spot_check(prep: CoordinatePrep, ell: int, k: int, ns=(0, 1, 2)) -> list:
    """Compare F_value with the orbit; returns the agreement valuations."""
    cls = prep.class_at(ell)
    out = []
    for n in ns:
        ref = prep.point_at(ell + n * k).local_coordinate(cls)
        val, prec = F_value(prep, ell, k, n, with_precision=True)
        agree = (val - ref).val
        if agree < prec:
            raise PrecisionExhausted(
                f"spot check failed for coordinate {prep.j} at l={ell}, n={n}: "
                f"agreement to {agree} digits"
            )
        out.append(agree)
    return out


def _prepare_all(instance: ProblemInstance, p: int):
    cfg = instance.config
    preps = [prepare_coordinate(f, x, p, cfg.K, cfg.D, j)
             for j, (f, x) in enumerate(zip(instance.maps, instance.point))]
    L = max(pr.entry for pr in preps)
    k = 1
    for pr in preps:
        k = math.lcm(k, pr.k_eff)
    m = max(pr.slot_index(k // pr.k_eff) for pr in preps)
    if m > MAX_ARITY:
        raise WrongShape(f"slot arity {m} exceeds the cap {MAX_ARITY}")
    return preps, L, k, m


def _zero_data(g_v: TruncatedSeries):
    rep = isolate_zeros(g_v)
    return rep.zeros, rep.separation


def analyze(instance: ProblemInstance, p=None):
    """GapCertificate or PeriodicWitness for the instance at prime p."""
    cfg = instance.config
    if p is None:
        p = prime_search(instance)[0]
    p = int(Prime(p))
    K, D = cfg.K, cfg.D
    preps, L, k, m = _prepare_all(instance, p)
    loss = max(pr.loss for pr in preps)
    for ell in range(L, L + k):
        for pr in preps:
            spot_check(pr, ell, k)
    per_class = []
    for ell in range(L, L + k):
        Fs = [build_F(pr, ell, k, m) for pr in preps]
        classes = [pr.class_at(ell) for pr in preps]
        Gs = [build_G(H, Fs, classes, m, D) for H in instance.variety]
        nonzero = [G for G in Gs if not G.is_zero()]
        if not nonzero:
            return _witness(instance, preps, ell, k, cfg.n_max)
        G = nonzero[0]
        loss = max(loss, max(s.loss for s in G.slots.values()))
        v = minimal_index(G)
        per_class.append((ell, v, G))
    # separation of the zeros of g_v fixes M; their multiplicities fix delta
    M, delta = 0, 1
    zero_info = {}
    for ell, v, G in per_class:
        zeros, sep = _zero_data(G.slots[v])
        zero_info[ell] = zeros
        if len(zeros) > 1:
            M = max(M, sep + 1)
        for _, mult, _ in zeros:
            delta = max(delta, mult)
    for ell, v, G in per_class:
        for z, mult, _ in zero_info[ell]:
            try:
                delta = max(delta, gap_constant(G.slots[v], z, M, v).delta)
            except (MultipleZeros, NoZero, PrecisionExhausted):
                pass  # keep the multiplicity from the isolation
    eps = cfg.epsilon
    C0 = c0_below_root(p, delta)
    pM = p**M
    C = RationalPower(C0, pM - eps)
    N = pM * k
    i0 = ceil_log_ratio(Fraction(M * pM) / eps, p, C0) if M else 0
    hits = orbit_zero_scan(instance, preps, cfg.n_max)
    records = []
    for ell, v, G in per_class:
        for alpha in range(pM):
            off = ell + k * alpha
            zs = [(t - off) // N for t in hits if t >= off and (t - off) % N == 0]
            rec = ClassRecord(off, SPARSE, tuple(v), delta, G.B, claim_M(v, G.B, m), zs)
            rec.gap = verify_gap(zs, C, min_value=i0)
            records.append(rec)
    records.sort(key=lambda r: r.offset)
    return GapCertificate(
        "general", p, N, L, k, M, C0, eps, C, i0, records, K, D, loss, cfg.n_max,
        extra={"early_zeros": [t for t in hits if t < L], "arity": m},
    )


def _witness(instance, preps, ell, k, n_max) -> PeriodicWitness:
    samples = []
    ok = True
    for n in range(n_max + 1):
        t = ell + n * k
        if not _on_variety(instance, preps, t):
            ok = False
            break
        samples.append(t)
    return PeriodicWitness(ell, k, samples, n_max, ok, preps[0].p, preps[0].K)


def boost_threshold(e: int, pM: int, eps: Fraction, C0: Fraction) -> int:
    """ceil(e p**M log(e p**M) / (eps log C0))."""
    return ceil_log_ratio(Fraction(e * pM) / eps, e * pM, C0)


def boost(cert: GapCertificate, e: int, epsilon=None) -> GapCertificate:
    """Replace (C, N) by (C0**(e p**M - eps), e N) and re-verify the zeros."""
    if cert.kind != "general":
        raise ValueError("boost applies to general certificates")
    if e < 1:
        raise ValueError("boost factor must be positive")
    eps = Fraction(epsilon) if epsilon is not None else cert.epsilon
    if eps <= 0:
        raise ValueError("epsilon must be positive")
    total = e * cert.boost_factor
    pM = cert.p**cert.M
    C = RationalPower(cert.C0, total * pM - eps)
    i0 = boost_threshold(total, pM, eps, cert.C0)
    N = e * cert.N
    records = []
    for rec in cert.classes:
        for r in range(e):
            zs = [(z - r) // e for z in rec.zeros if z >= r and (z - r) % e == 0]
            new = ClassRecord(rec.offset + cert.N * r, rec.status, rec.v, rec.delta, rec.B,
                              rec.M_claim, zs)
            new.gap = verify_gap(zs, C, min_value=i0)
            records.append(new)
    records.sort(key=lambda r: r.offset)
    return GapCertificate(cert.kind, cert.p, N, cert.T, cert.k, cert.M, cert.C0, eps, C, i0,
                          records, cert.K, cert.D, cert.loss, cert.n_max, total,
                          dict(cert.extra))


# the curve case ----------------------------------------------------------------------


def _curve_shape(instance: ProblemInstance, p: int):
    """Order the coordinates as (quasiperiodic, attracting) or raise WrongShape."""
    if instance.g != 2 or len(instance.variety) != 1:
        raise WrongShape("the curve case needs g = 2 and one defining polynomial")
    f1, f2 = instance.maps
    if f1.degree == 1 and f2.degree == 1:
        raise WrongShape("both maps have degree one: V is periodic by the linear recurrence route")
    for x, f in zip(instance.point, instance.maps):
        if exact_preperiod(f, x) is not None:
            raise WrongShape("a preperiodic coordinate makes the zero set trivially structured; use analyze")
    cfg = instance.config
    kinds = []
    for j, (f, x) in enumerate(zip(instance.maps, instance.point)):
        pt = ProjPoint.from_value(x, p, cfg.K)
        rc = residue_cycle(f, pt, p)
        local = pgl_normalize(f, rc.classes[rc.ell], rc.k, p, cfg.K, cfg.D)
        kinds.append(classify_fixed(local).tag)
    if kinds[0] == QUASIPERIODIC and kinds[1] == QUASIPERIODIC:
        raise WrongShape("both coordinates quasiperiodic: V is periodic by the quasiperiodic route; use analyze")
    if QUASIPERIODIC not in kinds:
        raise WrongShape("no quasiperiodic coordinate; use analyze")
    order = (0, 1) if kinds[0] == QUASIPERIODIC else (1, 0)
    if instance.maps[order[0]].degree < 2:
        raise WrongShape("the quasiperiodic coordinate needs a map of degree at least two")
    return order


def _hensel_constant(H: MultiPoly, order, cls1, e_pt: ProjPoint, p: int, K: int) -> int:
    """2 * max val dH/dz1 over the roots of H(., e) in the class cls1.

    Near a root with derivative valuation h, a point of V whose second
    coordinate is within p**-t of e has first coordinate within
    p**-(t - 2h) of the root (t > 2h).
    """
    j1, j2 = order
    d1 = H.degrees[j1]
    mod = p**K
    e_ab = (e_pt.a.value, e_pt.b.value)
    # coefficients of H(cls1 + s, e) (or H([1 : s], e)) as a polynomial in s
    coeffs = [0] * (d1 + 1)
    for c, ex in H.terms:
        i1, i2 = ex[j1], ex[j2]
        d2 = H.degrees[j2]
        w = c * pow(e_ab[0], i2, mod) * pow(e_ab[1], d2 - i2, mod) % mod
        if cls1 == INF:
            # a1 = 1, b1 = s: s**(d1 - i1)
            coeffs[d1 - i1] += w
        else:
            # (cls1 + s)**i1 * 1
            for r in range(i1 + 1):
                coeffs[r] += w * math.comb(i1, r) * cls1 ** (i1 - r)
    poly = TruncatedSeries.from_ints([x % mod for x in coeffs], p, K, max(d1, 1), poly=True)
    if poly.is_zero():
        return K  # the fibre is the whole line at precision: no bound
    try:
        rep = isolate_zeros(poly)
    except PadicGapError:
        return K
    dpoly = derivative(poly)
    worst = 0
    for r, mult, _ in rep.zeros:
        if r.val < 1:
            continue  # root outside the residue disk
        if mult > 1:
            return K
        dv = evaluate(dpoly, r).value
        worst = max(worst, dv.val if not dv.is_zero else K)
    return 2 * worst


def curve_case_analyze(instance: ProblemInstance, p=None) -> GapCertificate:
    """Quasiperiodic x attracting curve case over Q with C = p - epsilon."""
    cfg = instance.config
    K, D = cfg.K, cfg.D
    if p is None:
        last = None
        for q in prime_search(instance):
            if q <= 3:
                continue
            try:
                _curve_shape(instance, q)
            except WrongShape as err:
                last = err
                continue
            p = int(q)
            break
        if p is None:
            raise last or NoPrimeFound("no prime p > 3 with the curve-case shape")
    p = int(Prime(p))
    if p <= 3:
        raise WrongShape("the curve case needs p > 3")
    order = _curve_shape(instance, p)
    eps = cfg.epsilon
    if not 0 < eps < p - 1:
        raise ValueError("need 0 < epsilon < p - 1 so that C = p - epsilon > 1")
    j1, j2 = order
    (H,) = instance.variety
    q1 = prepare_coordinate(instance.maps[j1], instance.point[j1], p, K, D, j1)
    q2 = prepare_coordinate(instance.maps[j2], instance.point[j2], p, K, D, j2)
    if q2.kind not in (ATTRACTING, SUPERATTRACTING):
        raise WrongShape("second coordinate is not attracting")
    a, b = q1.cycle_len, q2.cycle_len
    # bounded k for the quasiperiodic coordinate
    local1 = pgl_normalize(q1.f, q1.cycle_class, a, p, K, D)
    k1, mahler = bounded_k(local1.series, q1.local_point)
    N = math.lcm(a * k1, b)
    if N > a * (p + 1) * p:
        raise WrongShape(f"N = {N} exceeds a (p+1) p")
    T = max(q1.entry, q2.entry)
    lin1 = q1.lin
    steps_per_class = N // a  # local-map steps of coordinate 1 per class step
    # flow time per class step is (steps_per_class / k_qf) * p**e'
    kq = lin1.lambda_or_m
    if steps_per_class % kq:
        kq_steps = math.lcm(steps_per_class, kq)
        N = N * (kq_steps // steps_per_class)
        steps_per_class = kq_steps
    c_time = steps_per_class // kq
    c_A = lin1.r_val + lin1.u_inv.loss + lin1.extra["e_prime"] + (vp(c_time, p) or 0)
    # decay of the attracting coordinate per class step
    if q2.kind == ATTRACTING:
        v_step = q2.lin.lambda_or_m.val * (N // b)
        base2 = q2.lin.r_val + q2.mu.val
    else:
        v_step = 1  # val(mu**(m**n)) grows at least linearly
        base2 = q2.mu.val
    M_scan = cfg.n_max
    hits = []
    for t in range(M_scan + 1):
        pts = [None, None]
        pts[j1] = (q1.point_at(t).a.value, q1.point_at(t).b.value)
        pts[j2] = (q2.point_at(t).a.value, q2.point_at(t).b.value)
        if H.evaluate_hom(pts, p**K) == 0:
            hits.append(t)
    C = RationalPower(Fraction(p) - eps)
    prec_cap = K - max(q1.loss, q2.loss) - 1
    records = []
    c_total_max = 0
    chain = []
    for off in range(T, T + N):
        zs = [(t - off) // N for t in hits if t >= off and (t - off) % N == 0]
        # limit point of the attracting coordinate along this class
        far = off + N * (K + 2)
        e_pt = q2.point_at(far)
        c_H = _hensel_constant(H, order, q1.class_at(off), e_pt, p, K)
        c_total = max(0, c_A + c_H - base2)
        c_total_max = max(c_total_max, c_total)
        for i, (m_, n_) in enumerate(zip(zs, zs[1:])):
            need = min(m_ * v_step - c_total, prec_cap)
            got = vp(n_ - m_, p) or 0
            chain.append((off, m_, n_, need, got, got >= need))
        rec = ClassRecord(off, SPARSE, None, 1, 0, None, zs)
        records.append(rec)
    # p**(m - c) > (p - eps)**m once m > c log p / log(p / (p - eps))
    ratio = Fraction(p) / (Fraction(p) - eps)
    i0 = ceil_log_ratio(c_total_max, p, ratio) + 1 if c_total_max else 0
    for rec in records:
        rec.gap = verify_gap(rec.zeros, C, min_value=i0)
    extra = {
        "order": order,
        "a": a,
        "b": b,
        "k1": k1,
        "mahler": [x.value for x in mahler],
        "N_bound": a * (p + 1) * p,
        "c_A": c_A,
        "congruence_constant": c_total_max,
        "v_step": v_step,
        "chain": chain,
        "chain_ok": all(c[-1] for c in chain),
        "early_zeros": [t for t in hits if t < T],
        "kinds": (q1.kind, q2.kind),
    }
    loss = max(q1.loss, q2.loss)
    return GapCertificate("curve", p, N, T, N, 0, Fraction(p), eps, C, i0, records,
                          K, D, loss, cfg.n_max, 1, extra)
