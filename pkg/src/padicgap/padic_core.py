"""Fixed-precision arithmetic in the p-adic integers.

Every element is a residue modulo ``p**K``.  Equality means congruence
modulo ``p**K``; a residue of zero is "zero at this precision" and carries
valuation ``K``, which is never confused with an exact zero by callers that
need to certify vanishing.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd

from .errors import (
    LiftingFails,
    NoRoot,
    NotAUnit,
    NotPAdicInteger,
    NotPrime,
    PrecisionMismatch,
    ZeroDenominator,
)

__all__ = [
    "Prime",
    "is_prime",
    "vp",
    "vp_rational",
    "PadicInt",
    "from_rational",
    "from_int",
    "zero",
    "one",
    "add",
    "sub",
    "mul",
    "invert",
    "hensel_root",
    "mult_order_mod_p",
    "pow_p_tower",
]


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, valid for all n < 3.3e24 and used beyond."""
    if n < 2:
        return False
    small = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
    for q in small:
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in small:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


class Prime(int):
    """An ``int`` that has passed a primality test."""

    def __new__(cls, p):
        if isinstance(p, Prime):
            return p
        if not isinstance(p, int) or isinstance(p, bool):
            raise NotPrime(f"{p!r} is not an integer")
        if not is_prime(p):
            raise NotPrime(f"{p} is not prime")
        return super().__new__(cls, p)


def vp(n: int, p: int) -> int | None:
    """p-adic valuation of an integer; ``None`` for zero."""
    if n == 0:
        return None
    n = abs(n)
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def vp_rational(x, p: int) -> int | None:
    x = Fraction(x)
    if x == 0:
        return None
    return vp(x.numerator, p) - vp(x.denominator, p)


@dataclass(frozen=True, slots=True)
class PadicInt:
    """Element of Z_p known modulo p**K.

    ``val`` is the cached valuation; ``val == K`` encodes zero at precision.
    """

    p: int
    K: int
    value: int
    val: int

    @classmethod
    def make(cls, value: int, p: int, K: int) -> "PadicInt":
        mod = p**K
        value %= mod
        if value == 0:
            return cls(p, K, 0, K)
        v = 0
        x = value
        while x % p == 0:
            x //= p
            v += 1
        return cls(p, K, value, v)

    @property
    def modulus(self) -> int:
        return self.p**self.K

    @property
    def is_zero(self) -> bool:
        return self.value == 0

    @property
    def is_unit(self) -> bool:
        return self.val == 0

    def unit_part(self) -> "PadicInt":
        """The unit u with self = p**val * u, known modulo p**(K - val)."""
        if self.is_zero:
            raise NotAUnit("zero at precision has no unit part")
        return PadicInt.make(self.value // self.p**self.val, self.p, self.K)

    def signed(self) -> int:
        """Balanced representative in (-p**K/2, p**K/2]."""
        mod = self.modulus
        return self.value - mod if self.value > mod // 2 else self.value

    def _coerce(self, other) -> "PadicInt":
        if isinstance(other, PadicInt):
            if other.p != self.p or other.K != self.K:
                raise PrecisionMismatch(
                    f"(p, K) = ({self.p}, {self.K}) vs ({other.p}, {other.K})"
                )
            return other
        if isinstance(other, int):
            return PadicInt.make(other, self.p, self.K)
        if isinstance(other, Fraction):
            return from_rational(other.numerator, other.denominator, self.p, self.K)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return PadicInt.make(self.value + o.value, self.p, self.K)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return PadicInt.make(self.value - o.value, self.p, self.K)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return PadicInt.make(o.value - self.value, self.p, self.K)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return PadicInt.make(self.value * o.value, self.p, self.K)

    __rmul__ = __mul__

    def __neg__(self):
        return PadicInt.make(-self.value, self.p, self.K)

    def __pow__(self, e: int):
        if e < 0:
            return invert(self) ** (-e)
        return PadicInt.make(pow(self.value, e, self.modulus), self.p, self.K)

    def __eq__(self, other):
        if isinstance(other, PadicInt):
            return (self.p, self.K, self.value) == (other.p, other.K, other.value)
        if isinstance(other, int):
            return (self.value - other) % self.modulus == 0
        return NotImplemented

    def __hash__(self):
        return hash((self.p, self.K, self.value))

    def __int__(self):
        return self.value

    def __repr__(self):
        return f"PadicInt({self.value} mod {self.p}^{self.K})"


def from_int(n: int, p: int, K: int) -> PadicInt:
    return PadicInt.make(n, p, K)


def zero(p: int, K: int) -> PadicInt:
    return PadicInt(p, K, 0, K)


def one(p: int, K: int) -> PadicInt:
    return PadicInt.make(1, p, K)


def from_rational(num: int, den: int, p, K: int) -> PadicInt:
    """Residue of num/den modulo p**K; num/den must be p-integral."""
    if den == 0:
        raise ZeroDenominator("zero denominator")
    p = Prime(p)
    if K < 1:
        raise ValueError("precision K must be positive")
    if num == 0:
        return zero(p, K)
    g = gcd(num, den)
    num, den = num // g, den // g
    if den % p == 0:
        raise NotPAdicInteger(f"{num}/{den} has negative {p}-adic valuation")
    mod = p**K
    return PadicInt.make(num * pow(den, -1, mod), p, K)


def _check_pair(x: PadicInt, y: PadicInt) -> None:
    if x.p != y.p or x.K != y.K:
        raise PrecisionMismatch(f"(p, K) = ({x.p}, {x.K}) vs ({y.p}, {y.K})")


def add(x: PadicInt, y: PadicInt) -> PadicInt:
    _check_pair(x, y)
    return x + y


def sub(x: PadicInt, y: PadicInt) -> PadicInt:
    _check_pair(x, y)
    return x - y


def mul(x: PadicInt, y: PadicInt) -> PadicInt:
    _check_pair(x, y)
    return x * y


def invert(x: PadicInt) -> PadicInt:
    if x.val != 0:
        raise NotAUnit(f"{x!r} is not a unit")
    return PadicInt.make(pow(x.value, -1, x.modulus), x.p, x.K)


def hensel_root(c: PadicInt, r: int) -> PadicInt:
    """An r-th root of the unit ``c``, seeded at the smallest residue solution.

    When p | r the seed is searched modulo p**(2v+1), v = val(r), and the
    result is only determined modulo p**(K - v); the low digits are returned
    at full width.
    """
    if r < 1:
        raise ValueError("root index must be positive")
    if r == 1:
        return c
    if not c.is_unit:
        raise NotAUnit("hensel_root requires a unit")
    p, K = c.p, c.K
    v = vp(r, p)
    seed_mod = p ** (2 * v + 1)
    seed = None
    for x0 in range(1, seed_mod):
        if x0 % p and (pow(x0, r, seed_mod) - c.value) % seed_mod == 0:
            seed = x0
            break
    if seed is None:
        if v and any(pow(x0, r, p) == c.value % p for x0 in range(1, p)):
            raise LiftingFails(
                f"no seed with val(x^{r} - c) > {2 * v} modulo {p}^{2 * v + 1}"
            )
        raise NoRoot(f"{c.value} mod {p} has no {r}-th root")
    if 2 * v + 1 > K:
        raise LiftingFails("precision too small for the lifting criterion")
    # Newton iteration at enough width to absorb the division by r
    mod = p ** (K + v)
    x = seed
    for _ in range(K.bit_length() + 4 + K):
        fx = (pow(x, r, mod) - c.value) % mod
        if fx % p**K == 0:
            break
        d = r * pow(x, r - 1, mod) % mod
        # d = p**v * unit; fx is divisible by p**(v+1) along the iteration
        unit = d // p**v
        q = fx // p**v
        x = (x - q * pow(unit, -1, mod)) % mod
    else:
        raise LiftingFails("Newton iteration did not converge")
    return PadicInt.make(x, p, K)


def mult_order_mod_p(u: PadicInt) -> int:
    """Smallest M >= 1 with u**M = 1 mod p."""
    if not u.is_unit:
        raise NotAUnit(f"{u!r} is not a unit")
    p = u.p
    a = u.value % p
    M, x = 1, a
    while x != 1:
        x = x * a % p
        M += 1
    return M


def pow_p_tower(m: int, n: int, p, K: int) -> PadicInt:
    """p**(m**n) mod p**K without materializing m**n past K."""
    e = 1
    for _ in range(n):
        e *= m
        if e >= K:
            return zero(p, K)
    if e >= K:
        return zero(p, K)
    return PadicInt.make(p**e, p, K)
