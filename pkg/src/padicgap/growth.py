"""Multi-index growth functions, slot decompositions and exact gap checks.

A slot series is ``G = sum_w g_w(z0) * z**w`` where ``z**w`` stands for
``z1**a * z2**b2 * ... * zm**bm`` evaluated at ``z_j = p**(j**n)`` (and
``z1 = p**n``), so the slot ``w`` contributes ``g_w(n) * p**f_w(n)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

from .errors import ArityMismatch, EmptySeries, MultipleZeros, NoZero
from .padic_core import PadicInt, vp
from .power_series import TruncatedSeries, evaluate, isolate_zeros

__all__ = [
    "MultiIndex",
    "lex_compare",
    "f_w_eval",
    "SlotSeries",
    "minimal_index",
    "claim_M",
    "GapParams",
    "gap_constant",
    "ZeroHit",
    "zero_search",
    "RationalPower",
    "GapReport",
    "verify_gap",
    "ceil_log_ratio",
    "c0_below_root",
]


class MultiIndex(tuple):
    """(a, b2, ..., bm): exponent of z1 = p**n, then of z_j = p**(j**n)."""

    def __new__(cls, entries):
        entries = tuple(int(x) for x in entries)
        if not entries or any(x < 0 for x in entries):
            raise ValueError("a multi-index is a nonempty tuple of nonnegative integers")
        return super().__new__(cls, entries)

    @classmethod
    def zero(cls, m: int) -> "MultiIndex":
        return cls((0,) * m)

    @classmethod
    def unit(cls, j: int, m: int, power: int = 1) -> "MultiIndex":
        """The index of z_j**power (j = 1 is the linear slot)."""
        e = [0] * m
        e[j - 1] = power
        return cls(e)

    @property
    def arity(self) -> int:
        return len(self)

    @property
    def a(self) -> int:
        return self[0]

    @property
    def size(self) -> int:
        return sum(self)

    def __add__(self, other):
        if len(self) != len(other):
            raise ArityMismatch(f"arity {len(self)} vs {len(other)}")
        return MultiIndex(x + y for x, y in zip(self, other))


def lex_compare(w, w2) -> int:
    """-1, 0 or 1 in the right-to-left lexicographic order."""
    if len(w) != len(w2):
        raise ArityMismatch(f"arity {len(w)} vs {len(w2)}")
    for x, y in zip(reversed(w), reversed(w2)):
        if x != y:
            return -1 if x < y else 1
    return 0


def _sort_key(w):
    return tuple(reversed(w))


def f_w_eval(w, n: int) -> int:
    """a*n + sum_j b_j * j**n, exact."""
    total = w[0] * n
    for j, b in enumerate(w[1:], start=2):
        if b:
            total += b * j**n
    return total


def _f_w_capped(w, n: int, cap: int) -> int:
    """min(f_w(n), cap) without building huge powers."""
    total = w[0] * n
    if total >= cap:
        return cap
    for j, b in enumerate(w[1:], start=2):
        if not b:
            continue
        t = 1
        for _ in range(n):
            t *= j
            if t * b + total >= cap:
                return cap
        total += b * t
        if total >= cap:
            return cap
    return total


def _floor(g: TruncatedSeries) -> int:
    """Lower bound on val g(n) for integers n."""
    vals = []
    for c in g.coeffs:
        v = vp(c % g.modulus, g.p)
        vals.append(g.K if v is None else v)
    if not g.poly:
        vals.append(g.tail_val if g.tail_val is not None else g.loss)
    return min(vals) - g.loss


def _prune(tails) -> tuple:
    """Drop bounds implied by another with smaller base and smaller index."""
    best: dict = {}
    for base, w in tails:
        w = MultiIndex(w)
        if w not in best or base < best[w]:
            best[w] = base
    items = sorted(best.items(), key=lambda kv: (kv[1], kv[0].size))
    out = []
    for w, base in items:
        if any(b <= base and all(x <= y for x, y in zip(v, w)) for b, v in out):
            continue
        out.append((base, w))
    return tuple(out)


@dataclass
class SlotSeries:
    """Finite map MultiIndex -> series in z0; zero slots are dropped.

    ``tails`` holds pairs (base, w): every slot that was discarded while
    building the series contributes a value of valuation >= base + f_w(n).
    """

    p: int
    K: int
    m: int
    slots: dict = field(default_factory=dict)
    B: int = 0
    tails: tuple = ()

    def __post_init__(self):
        clean = {}
        dropped = []
        for w, g in self.slots.items():
            w = MultiIndex(w)
            if len(w) != self.m:
                raise ArityMismatch(f"slot {w} has arity {len(w)}, expected {self.m}")
            if not g.is_zero():
                clean[w] = g
            elif g.precision < self.K:
                # zero at precision: the value is only known to vanish mod p**prec
                dropped.append((g.precision, w))
        self.slots = dict(sorted(clean.items(), key=lambda kv: _sort_key(kv[0])))
        self.tails = tuple(self.tails) + tuple(dropped)
        for _, w in self.tails:
            if len(w) != self.m:
                raise ArityMismatch(f"tail index {w} has arity {len(w)}, expected {self.m}")
        self.tails = _prune(self.tails)

    @classmethod
    def constant(cls, g: TruncatedSeries, m: int = 1, B: int = 0) -> "SlotSeries":
        return cls(g.p, g.K, m, {MultiIndex.zero(m): g}, B)

    def is_zero(self) -> bool:
        return not self.slots

    def __add__(self, other: "SlotSeries") -> "SlotSeries":
        self._check(other)
        out = dict(self.slots)
        for w, g in other.slots.items():
            out[w] = out[w] + g if w in out else g
        return SlotSeries(self.p, self.K, self.m, out, max(self.B, other.B),
                          self.tails + other.tails)

    def __neg__(self):
        return SlotSeries(self.p, self.K, self.m, {w: -g for w, g in self.slots.items()},
                          self.B, self.tails)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "SlotSeries":
        return SlotSeries(self.p, self.K, self.m, {w: g * c for w, g in self.slots.items()},
                          self.B, self.tails)

    def mul(self, other: "SlotSeries", max_size: int | None = None) -> "SlotSeries":
        """Product, dropping slots with |w| > max_size."""
        self._check(other)
        out: dict = {}
        tails = []
        for w1, g1 in self.slots.items():
            for w2, g2 in other.slots.items():
                w = w1 + w2
                prod = g1 * g2
                if max_size is not None and w.size > max_size:
                    tails.append((_floor(g1) + _floor(g2), w))
                    continue
                out[w] = out[w] + prod if w in out else prod
        for mine, theirs in ((self, other), (other, self)):
            for base, w in mine.tails:
                for w2, g2 in theirs.slots.items():
                    tails.append((base + _floor(g2), w + w2))
        for b1, w1 in self.tails:
            for b2, w2 in other.tails:
                tails.append((b1 + b2, w1 + w2))
        return SlotSeries(self.p, self.K, self.m, out, max(self.B, other.B), tuple(tails))

    def _check(self, other):
        if self.m != other.m:
            raise ArityMismatch(f"arity {self.m} vs {other.m}")
        if (self.p, self.K) != (other.p, other.K):
            raise ValueError("slot series over different (p, K)")

    def evaluate(self, n: int) -> tuple[PadicInt, int]:
        """(S, loss) with G(n, p**n, p**(2**n), ...) = S / p**loss."""
        S, L, _ = self.evaluate_prec(n)
        return S, L

    def evaluate_prec(self, n: int) -> tuple[PadicInt, int, int]:
        """(S, loss, prec): the value S / p**loss is certified mod p**prec."""
        p, K = self.p, self.K
        terms = []
        for w, g in self.slots.items():
            ev = evaluate(g, PadicInt.make(n, p, K))
            terms.append((w, ev.value, ev.loss, ev.precision))
        L = max((t[2] for t in terms), default=0)
        acc = 0
        prec = K - L
        for w, val, loss, ev_prec in terms:
            fw = _f_w_capped(w, n, K)
            prec = min(prec, ev_prec + fw)
            e = fw + L - loss
            if e >= K:
                continue
            acc += val.value * p**e
        for base, w in self.tails:
            prec = min(prec, base + _f_w_capped(w, n, max(K - base, 0)))
        return PadicInt.make(acc, p, K), L, prec

    def precision(self) -> int:
        return self.K - max((g.loss for g in self.slots.values()), default=0)


def minimal_index(G: SlotSeries) -> MultiIndex:
    if G.is_zero():
        raise EmptySeries("every slot is zero at precision")
    return min(G.slots, key=_sort_key)


def claim_M(v, B: int, m: int) -> int:
    """Smallest M >= B with j**M >= (a+1)M + sum_{2<=k<j} b_k k**M for all j."""
    a = v[0]
    bs = list(v[1:]) + [0] * (m - len(v))
    # between nonzero b_k the right side is constant while j**M grows, so only
    # j = 2 and j = k + 1 for nonzero b_k can fail
    support = [k for k in range(2, m + 1) if bs[k - 2]]
    critical = sorted({2} | {k + 1 for k in support if k + 1 <= m}) if m >= 2 else []
    M = B
    while True:
        ok = True
        for j in critical:
            rhs = (a + 1) * M + sum(bs[k - 2] * k**M for k in support if k < j)
            if j**M < rhs:
                ok = False
                break
        if ok:
            return M
        M += 1


@dataclass
class GapParams:
    v: MultiIndex | None
    delta: int
    s_val: int
    p: int
    beta: PadicInt | None = None
    c_delta_val: int = 0
    threshold: int | None = None
    extra: dict = field(default_factory=dict)

    @property
    def C_bound(self) -> tuple[int, int]:
        """(p, delta): the gap constant must stay below p**(1/delta)."""
        return (self.p, self.delta)


def gap_constant(g_v: TruncatedSeries, alpha: PadicInt, s_val: int, v=None) -> GapParams:
    """Locate the zero of g_v on D(alpha, p**-s_val) and read off delta."""
    p, K = g_v.p, g_v.K
    h = _translate_scale(g_v, alpha, s_val)
    report = isolate_zeros(h)
    zeros = report.zeros
    if not zeros:
        raise NoZero("no zero in the disk: the zero set there is finite")
    if len(zeros) > 1:
        raise MultipleZeros(f"{len(zeros)} distinct zeros in the disk")
    root, mult, _digits = zeros[0]
    beta = alpha + root * p**s_val
    # Newton-polygon dominance at beta on the disk of radius p**-s_val
    at_beta = _translate_scale(g_v, beta, s_val)
    vals = [at_beta.coeff_val(i) for i in range(at_beta.D + 1)]
    vd = vals[mult]
    if vd is None:
        raise MultipleZeros("leading coefficient at the zero vanishes at precision")
    for i in range(mult + 1, len(vals)):
        if vals[i] is not None and vals[i] <= vd:
            raise MultipleZeros("Newton polygon does not isolate the zero")
    return GapParams(v, mult, s_val, p, beta, vd - s_val * mult)


def _translate_scale(g: TruncatedSeries, alpha: PadicInt, s: int) -> TruncatedSeries:
    """g(alpha + p**s z)."""
    from .power_series import compose

    p, K, D = g.p, g.K, g.D
    arg = TruncatedSeries.from_ints([alpha.value, p**s], p, K, D, poly=True)
    if alpha.is_unit or s == 0:
        return compose(g, arg, check=False)
    return compose(g, arg)


class ZeroHit(NamedTuple):
    n: int
    val: int  # achieved vanishing valuation (= precision when fully zero)


def zero_search(G: SlotSeries, n_max: int, residue: tuple[int, int] = (0, 1),
                annotate: bool = False, n_min: int = 0):
    """All n_min <= n <= n_max with n = alpha mod modulus where G vanishes."""
    alpha, modulus = residue
    hits = []
    start = n_min + ((alpha - n_min) % modulus)
    for n in range(start, n_max + 1, modulus):
        S, loss, prec_n = G.evaluate_prec(n)
        if prec_n > 0 and S.val >= min(prec_n + loss, G.K):
            hits.append(ZeroHit(n, prec_n))
    if annotate:
        return hits
    return [h.n for h in hits]


# exact comparisons -------------------------------------------------------


@dataclass(frozen=True)
class RationalPower:
    """base**exponent with both exact rationals; base > 0."""

    base: Fraction
    exponent: Fraction = Fraction(1)

    def __post_init__(self):
        object.__setattr__(self, "base", Fraction(self.base))
        object.__setattr__(self, "exponent", Fraction(self.exponent))

    def exceeded_by(self, diff: int, n: int) -> bool:
        """diff > (base**exponent)**n, exactly."""
        if diff <= 0:
            return False
        e = self.exponent * n
        a, b = e.numerator, e.denominator
        u, v = self.base.numerator, self.base.denominator
        if a < 0:
            a, u, v = -a, v, u
        # diff**b * v**a > u**a
        lhs_bits_hi = b * diff.bit_length() + a * v.bit_length()
        lhs_bits_lo = b * (diff.bit_length() - 1) + a * (v.bit_length() - 1) + 1
        rhs_bits_hi = a * u.bit_length()
        rhs_bits_lo = a * (u.bit_length() - 1) + 1
        if lhs_bits_hi < rhs_bits_lo:
            return False
        if lhs_bits_lo > rhs_bits_hi:
            return True
        return diff**b * v**a > u**a

    def __float__(self):
        return float(self.base) ** float(self.exponent)

    def as_text(self) -> str:
        if self.exponent == 1:
            return _frac_text(self.base)
        return f"({_frac_text(self.base)})^({_frac_text(self.exponent)})"


def _frac_text(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


@dataclass
class GapReport:
    passed: bool
    checked: int
    violation: tuple | None = None  # (i, n_i, n_{i+1})

    def __bool__(self):
        return self.passed


def verify_gap(zeros, C, i0: int = 1, *, min_value: int = 0) -> GapReport:
    """n_{i+1} - n_i > C**n_i for every 1-based index i >= i0 with n_i >= min_value."""
    if not isinstance(C, RationalPower):
        C = RationalPower(Fraction(C))
    zs = list(zeros)
    if any(b <= a for a, b in zip(zs, zs[1:])):
        raise ValueError("zeros must be strictly increasing")
    checked = 0
    for i in range(max(i0, 1), len(zs)):
        n_i, n_next = zs[i - 1], zs[i]
        if n_i < min_value:
            continue
        checked += 1
        if not C.exceeded_by(n_next - n_i, n_i):
            return GapReport(False, checked, (i, n_i, n_next))
    return GapReport(True, checked)


def _pow_ge(C0: Fraction, k: int, Q: int, X: Fraction) -> bool:
    """C0**(k * X.den) >= Q**(X.num)."""
    u, v = C0.numerator, C0.denominator
    e = k * X.denominator
    return u**e >= Q**X.numerator * v**e


def ceil_log_ratio(X, Q: int, C0) -> int:
    """ceil(X * log Q / log C0) for rationals X > 0, C0 > 1 and integer Q >= 1."""
    X, C0 = Fraction(X), Fraction(C0)
    if X <= 0 or C0 <= 1:
        raise ValueError("need X > 0 and C0 > 1")
    if Q == 1:
        return 0
    hi = 1
    while not _pow_ge(C0, hi, Q, X):
        hi *= 2
    lo = hi // 2  # _pow_ge fails at lo (or lo = 0)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if _pow_ge(C0, mid, Q, X):
            hi = mid
        else:
            lo = mid
    return hi


def c0_below_root(p: int, delta: int, denom: int = 8) -> Fraction:
    """Largest a/denom (denominator doubled as needed) with 1 < (a/denom)**delta < p."""
    q = denom
    while True:
        a = q
        while (a + 1) ** delta < p * q**delta:
            a += 1
        if a > q:
            return Fraction(a, q)
        q *= 2
