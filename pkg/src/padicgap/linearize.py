"""Local linearizing coordinates for attracting, superattracting and
quasiperiodic fixed points of series in Z_p[[z]].

All conjugacies are computed on a rescaled disk so that every series that
is stored is integral (or carries a small, recorded denominator):

* Koenigs: ``t = (z - y) / p**r``, ``F(t) = (f(y + p**r t) - y) / p**r`` and
  ``U`` with ``F(U(t)) = U(lam * t)``.
* Boettcher: ``w = gamma * (z - y) = p**s * t``, ``F(t) = w-form of f`` and
  ``U`` with ``F(U(t)) = U(p**(s(m-1)) * t**m)``.
* Quasi-flow: ``z = x + p * t``, ``G = g**k = id mod p`` and the flow
  generator ``X = sum (-1)**(j+1) Delta**j(id) / j``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

from .errors import (
    ExpDiverges,
    NoConvergence,
    NoRoot,
    NotAUnit,
    NotPAdicInteger,
    NotQuasiperiodic,
    PeriodicAnchor,
    PrecisionExhausted,
    PrimeTooSmall,
    WrongClass,
)
from .padic_core import PadicInt, hensel_root, invert, mult_order_mod_p, vp
from .power_series import (
    TruncatedSeries,
    _val,
    antiderivative,
    comp_inverse,
    compose,
    evaluate,
    exp,
    log1p,
    reciprocal,
)
from .dynamics import expand_at

KOENIGS = "koenigs"
BOETTCHER = "boettcher"
QUASI_FLOW = "quasi_flow"

__all__ = [
    "LinearizationData",
    "koenigs",
    "koenigs_limit",
    "boettcher",
    "quasi_flow",
    "bounded_k",
    "mahler_eval",
    "binomial_char",
    "rescale",
]


@dataclass
class LinearizationData:
    kind: str
    u: TruncatedSeries  # in the rescaled coordinate
    u_inv: TruncatedSeries
    r_val: int  # the target disk is D(anchor, p**-r_val)
    s_val: int
    anchor: PadicInt  # y (fixed point) or x (quasiperiodic anchor)
    lambda_or_m: object  # lambda (Koenigs), m (Boettcher), k (quasi-flow)
    local: TruncatedSeries  # the rescaled map the conjugacy linearizes
    mu: PadicInt | None = None
    loss: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def p(self) -> int:
        return self.u.p

    @property
    def K(self) -> int:
        return self.u.K

    # coordinate maps (original local coordinate <-> rescaled one) --------
    def to_scaled(self, z: PadicInt) -> PadicInt:
        """(z - anchor) / (scale) for a point of the certified disk."""
        p = self.p
        d = z - self.anchor
        shift = self.extra.get("shift", self.r_val)
        if d.val < shift:
            raise ValueError("point outside the certified disk")
        g_inv = self.extra.get("gamma_inv")
        val = PadicInt.make(d.value // p**shift if not d.is_zero else 0, p, self.K)
        if g_inv is not None:
            val = val * self.extra["gamma_unit"]
        return val

    def from_scaled(self, t: PadicInt) -> PadicInt:
        p = self.p
        shift = self.extra.get("shift", self.r_val)
        if self.extra.get("gamma_inv") is not None:
            t = t * self.extra["gamma_inv"]
        return self.anchor + t * p**shift


def rescale(f: TruncatedSeries, y: PadicInt, r: int) -> TruncatedSeries:
    """(f(y + p**r t) - y) / p**r for a fixed or anchor point y in pZ_p."""
    p, K, D = f.p, f.K, f.D
    g = expand_at(f, y)  # f(y + z) - y
    G = g.integral_residues()
    if G[0] % p ** min(r, g.precision):
        raise ValueError("f(y) - y is not divisible by p**r")
    mod = p**K
    cs = [G[0] // p**r] + [G[i] * p ** (r * (i - 1)) % mod for i in range(1, D + 1)]
    out = TruncatedSeries(p, K, tuple(cs), g.loss, f.poly)
    if not f.poly:
        out = TruncatedSeries(p, K, out.coeffs, out.loss, False, r * D)
    return out


# Koenigs -----------------------------------------------------------------


def _koenigs_recurrence(F: TruncatedSeries, lam: PadicInt) -> TruncatedSeries | None:
    """Psi with Psi(F) = lam * Psi, Psi(t) = t + ...; None if not integral."""
    p, K, D = F.p, F.K, F.D
    mod = p**K
    e = lam.val
    Fz = list(F.integral_residues())
    b = [0] * (D + 1)
    b[1] = 1
    lam_pows = [pow(lam.value, n, mod) for n in range(D + 1)]
    for n in range(2, D + 1):
        c = _compose_coeff(b, Fz, n, mod)
        denom = (lam.value - lam_pows[n]) % mod  # val e
        if c % p**e:
            return None
        unit = denom // p**e
        b[n] = (c // p**e) * pow(unit, -1, mod) % mod
    # b[n] is known mod p**(K - e); store with denominator p**e
    s = p**e
    return TruncatedSeries(p, K, tuple(x * s for x in b), e)


def _compose_coeff(b: list, Fz: list, n: int, mod: int) -> int:
    """Coefficient n of sum_{j<n} b_j F(t)**j (with b_n excluded)."""
    from . import kernels

    D = n
    trunc_b = b[:n] + [0]
    out = kernels.compose(trunc_b, Fz[: D + 1], D, mod)
    return out[n]


def koenigs(f: TruncatedSeries, y: PadicInt, lam: PadicInt, *, max_r: int | None = None) -> LinearizationData:
    """Koenigs coordinate for an attracting fixed point y of f.

    The rescaling exponent r starts at max(1, val(lam)) and grows until the
    recurrence stays integral and the functional-equation residual vanishes.
    """
    K = f.K
    e = lam.val
    if lam.is_zero or e == 0 or e >= K:
        raise WrongClass("Koenigs needs 0 < val(lambda) < K")
    start = max(1, e)
    stop = max_r if max_r is not None else max(start, K // 2)
    for r in range(start, stop + 1):
        F = rescale(f, y, r)
        psi = _koenigs_recurrence(F, lam)
        if psi is None:
            continue
        U = comp_inverse(psi)
        lhs = compose(F, U)
        rhs = U.scale_var(lam)
        if lhs.equal_at_precision(rhs):
            loss = max(lhs.loss, rhs.loss)
            return LinearizationData(KOENIGS, U, psi, r, r, y, lam, F, loss=loss,
                                     extra={"e": e, "residual_val": (lhs - rhs).min_val()})
    raise NoConvergence("no rescaling radius produced a certified Koenigs coordinate")


def koenigs_limit(F: TruncatedSeries, lam: PadicInt, n: int) -> TruncatedSeries:
    """lam**(-n) * F**n(t): the limit definition, used as an independent check."""
    out = TruncatedSeries.identity(F.p, F.K, F.D)
    for _ in range(n):
        out = compose(F, out)
    e = lam.val
    inv_unit = invert(lam.unit_part())
    return (out * (inv_unit**n)).divide_by_p_power(e * n)


# Boettcher ---------------------------------------------------------------


def boettcher(f: TruncatedSeries, y: PadicInt, m: int, c_m: PadicInt, *,
              strict: bool = False, s_val: int | None = None) -> LinearizationData:
    """Boettcher coordinate for a superattracting fixed point of local degree m."""
    p, K, D = f.p, f.K, f.D
    if m < 2:
        raise WrongClass("Boettcher needs m >= 2")
    if strict and m % p == 0:
        raise WrongClass("strict mode rejects p | m")
    if c_m.is_zero:
        raise WrongClass("leading coefficient is zero at precision")
    v = c_m.val
    if v % (m - 1):
        raise NoRoot(f"val(c_m) = {v} is not divisible by m - 1 = {m - 1}")
    a = v // (m - 1)
    gamma_unit = hensel_root(c_m.unit_part(), m - 1)
    g = expand_at(f, y)
    G = g.integral_residues()
    mod = p**K
    if any(G[i] % p**g.precision for i in range(min(m, D + 1))):
        raise WrongClass(f"expansion at y does not start at degree {m}")
    start = max(1, a * m) if s_val is None else s_val
    last_err = None
    for s in range(start, start + max(2, K // 4)):
        try:
            data = _boettcher_at(g, G, p, K, D, m, c_m, gamma_unit, a, s, y)
        except (PrecisionExhausted, NotAUnit, NotPAdicInteger, ExpDiverges) as err:
            last_err = err
            continue
        if data is not None:
            return data
    raise NoConvergence(f"no Boettcher coordinate certified ({last_err})")


def _boettcher_at(g, G, p, K, D, m, c_m, gamma_unit, a, s, y):
    mod = p**K
    # F(t) = gamma * g(p**(s-a) t / gamma_unit) / p**s with w = gamma (z - y) = p**s t
    # gamma = p**a * gamma_unit; z - y = p**(s-a) * t / gamma_unit
    shift = s - a
    if shift < 0:
        return None
    gi = pow(gamma_unit.value, -1, mod)
    cs = [0] * (D + 1)
    for i in range(1, D + 1):
        # gamma * c_i * (p**shift / gamma_unit)**i / p**s
        v_num = a + shift * i
        if v_num < s:
            if G[i] % p ** (s - v_num):
                raise PrecisionExhausted("rescaled map not integral")
            c = G[i] // p ** (s - v_num)
        else:
            c = G[i] * p ** (v_num - s)
        cs[i] = c * gamma_unit.value * pow(gi, i, mod) % mod
    F = TruncatedSeries(p, K, tuple(cs), g.loss, False)
    # F(t) = p**(s(m-1)) t**m (1 + ghat(t));  ghat(t) = F(t)/(lead t**m) - 1
    lead_v = s * (m - 1)
    lead = F.coeffs[m]
    if lead % p**lead_v or (lead // p**lead_v) % mod != 1 % mod and (lead // p**lead_v - 1) % p ** max(K - lead_v - g.loss, 1):
        pass
    # ghat_j = F_{m+j} / p**(s(m-1)); coefficients F_{m+j} carry p**(shift*j) extra
    gh = [0] * (D + 1)
    for j in range(1, D + 1 - m):
        c = F.coeffs[m + j]
        if c % p**lead_v:
            raise PrecisionExhausted("ghat not integral at this radius")
        gh[j] = c // p**lead_v
    extra_loss = lead_v  # dividing by p**lead_v costs these digits
    if extra_loss >= K:
        raise PrecisionExhausted("radius too small for the precision")
    ghat = TruncatedSeries(p, K, tuple(x * p**extra_loss for x in gh), extra_loss)
    # h(t) = sum_n m**(-n-1) log(1 + ghat(F**n(t))), only m**n <= D contribute
    h = TruncatedSeries(p, K, tuple([0] * (D + 1)), 0)
    Fn = TruncatedSeries.identity(p, K, D)
    n = 0
    while True:
        term_arg = compose(ghat, Fn)
        if term_arg.is_zero() and n > 0:
            break
        lg = log1p(term_arg)
        vm = vp(m, p)
        unit_m = m // p**vm
        factor = pow(pow(unit_m, n + 1, mod), -1, mod)
        lg = lg * factor
        if vm:
            lg = lg.divide_by_p_power(vm * (n + 1))
        h = h + lg
        n += 1
        if m**n > D:
            break
        Fn = compose(F, Fn)
    if h.loss >= K:
        raise PrecisionExhausted("division losses exhaust the precision")
    phi = TruncatedSeries.identity(p, K, D) * exp(h)  # t * exp(h(t))
    U = comp_inverse(phi)
    lhs = compose(F, U)
    mono = TruncatedSeries.monomial(p**lead_v, m, p, K, D)
    rhs = compose(U, mono)
    if not lhs.equal_at_precision(rhs):
        return None
    gamma = PadicInt.make(gamma_unit.value * p**a, p, K)
    return LinearizationData(
        BOETTCHER, U, phi, r_val=shift, s_val=s, anchor=y, lambda_or_m=m, local=F,
        loss=max(lhs.loss, rhs.loss),
        extra={"gamma": gamma, "gamma_unit": gamma_unit, "gamma_inv": invert(gamma_unit),
               "gamma_val": a, "shift": shift, "h": h, "ghat": ghat,
               "residual_val": (lhs - rhs).min_val()},
    )


# quasiperiodic flows --------------------------------------------------------


def _affine_period(b0: int, b1: int, p: int) -> int:
    """Order of t -> b0 + b1 t on F_p."""
    k, c0, c1 = 1, b0 % p, b1 % p
    while not (c0 == 0 and c1 == 1):
        c0, c1 = (b0 + b1 * c0) % p, (b1 * c1) % p
        k += 1
    return k


def _self_compose(g: TruncatedSeries, k: int) -> TruncatedSeries:
    out = g
    for _ in range(k - 1):
        out = compose(g, out, check=False)
    return out


def _scaled_map(f: TruncatedSeries, x: PadicInt) -> TruncatedSeries:
    """g(t) = (f(x + p t) - x) / p on the closed unit disk."""
    p = f.p
    g = rescale(f, x, 1)
    if not f.poly:
        g = TruncatedSeries(p, f.K, g.coeffs, g.loss, False, f.D)
    return g


def _tail_precision(g: TruncatedSeries) -> int:
    """Digits of g o g ... that the truncation at degree D still controls."""
    if g.poly:
        return g.K
    return min(g.K, g.tail_val if g.tail_val is not None else g.D)


def newton_generator(G: TruncatedSeries, prec: int) -> tuple[TruncatedSeries, int]:
    """Vector field X with G = time-1 map of X, for G = id mod p.

    X = sum_{j>=1} (-1)**(j+1) Delta**j(id) / j, Delta phi = phi o G - phi.
    Delta**j(id) vanishes mod p**j, so terms past j - vp(j) >= prec drop out.
    """
    p, K, D = G.p, G.K, G.D
    jmax = 1
    while True:
        nxt = jmax + 1
        if all(j - vp(j, p) >= prec for j in range(nxt, nxt + p**2 + 2)):
            break
        jmax = nxt
    iterates = [TruncatedSeries.identity(p, K, D)]
    for _ in range(jmax):
        iterates.append(compose(G, iterates[-1], check=False))
    L = max(vp(j, p) for j in range(1, jmax + 1))
    mod = p**K
    acc = [0] * (D + 1)
    for j in range(1, jmax + 1):
        vj = vp(j, p)
        w = p ** (L - vj) * pow(j // p**vj, -1, mod)
        if j % 2 == 0:
            w = -w
        for i in range(j + 1):
            c = comb(j, i) * (-1) ** (j - i) * w
            for d, s in enumerate(iterates[i].coeffs):
                acc[d] += c * s
    return TruncatedSeries(p, K, tuple(acc), L + G.loss), jmax


def quasi_flow(f: TruncatedSeries, x: PadicInt, k0: int = 1) -> LinearizationData:
    """Flow coordinates at a non-periodic point x of a unit-multiplier series.

    Returns data with ``lambda_or_m = k`` (k0 times the affine period of the
    rescaled map) such that f**(n k)(x + p**r U(.)) follows the translation
    flow.  ``u_inv`` is the antiderivative of 1/X-hat on the disk
    ``z = x + p**r_val * tau``; the time variable is scaled by
    ``kappa = k / p**e'`` recorded in ``extra``.
    """
    p, K, D = f.p, f.K, f.D
    if f.coeffs[1] % p == 0:
        raise WrongClass("quasi_flow needs a unit linear coefficient")
    if x.val < 1:
        raise ValueError("anchor must lie in pZ_p")
    fk = _self_compose(f, k0) if k0 > 1 else f
    g = _scaled_map(fk, x)
    G0 = g.integral_residues()
    kk = _affine_period(G0[0], G0[1], p)
    G = _self_compose(g, kk) if kk > 1 else g
    prec = min(_tail_precision(g), G.precision)
    k = k0 * kk
    X, jmax = newton_generator(G, prec)
    loss = X.loss + (K - prec)
    x0v = X.coeff_val(0)
    if x0v is None or x0v >= prec - X.loss:
        raise PeriodicAnchor("generator vanishes at the anchor: x looks periodic")
    # shrink t = p**q tau until the constant term has minimal valuation
    q = 0
    while True:
        ok = True
        for i in range(1, D + 1):
            vi = X.coeff_val(i)
            if vi is not None and vi + q * (i - 1) < x0v - q:
                ok = False
                break
        if ok:
            break
        q += 1
        if q >= x0v:
            raise NoConvergence("anchor too close to a periodic point for this precision")
    # shrink further while the antiderivative still has p in its denominators
    q0 = q
    while True:
        e_prime = x0v - q
        # X_tau(tau) = X(p**q tau) / p**q = p**e' * Xhat(tau)
        Xt = X.scale_var(p**q)
        Xhat = Xt.divide_by_p_power(q + e_prime)
        psi = antiderivative(reciprocal(Xhat))
        if psi.is_integral() or q + 1 >= x0v:
            break
        q += 1
    flow = None
    if psi.is_integral():
        U = comp_inverse(psi)
    else:
        # Psi has denominators, but the time-scaled flow V(s) = U(p**e' s) is
        # integral: solve V' = p**e' Xhat(V) directly
        q = q0
        e_prime = x0v - q
        Xhat = X.scale_var(p**q).divide_by_p_power(q + e_prime)
        psi = antiderivative(reciprocal(Xhat))
        flow = _flow_ode(Xhat, e_prime)
        U = flow
    r = 1 + q
    kappa_val = vp(k, p) - e_prime
    data = LinearizationData(
        QUASI_FLOW, U, psi, r_val=r, s_val=max(kappa_val, 0), anchor=x,
        lambda_or_m=k, local=G, mu=PadicInt.make(0, p, K), loss=max(U.loss, loss),
        extra={"generator": X, "e_prime": e_prime, "q": q, "shift": r, "affine_period": kk,
               "jmax": jmax, "precision": prec, "kappa_num": k, "kappa_pexp": e_prime,
               "scaled_map": g},
    )
    if flow is not None:
        data.extra["flow"] = flow
        data.loss = max(data.loss, flow.loss)
    return data


def _flow_ode(Xhat: TruncatedSeries, e: int) -> TruncatedSeries:
    """V with V(0) = 0 and V' = p**e Xhat(V), by coefficient recurrence.

    Each division by i + 1 costs vp(i + 1) digits; the result carries
    the total vp(D!) as loss.
    """
    p, K, D = Xhat.p, Xhat.K, Xhat.D
    Xh = Xhat.integral_residues()
    L = vp(_fact(D), p) or 0
    if L + Xhat.loss >= K:
        raise PrecisionExhausted("flow recurrence exhausts the precision")
    mod = p ** (K + L)
    v = [0] * (D + 1)
    for i in range(D):
        # coefficient i of Xhat(V) with the known v_0..v_i
        acc = 0
        power = [1] + [0] * D
        for a in Xh:
            acc += a * power[i]
            power = [sum(power[j] * v[t - j] for j in range(t + 1)) % mod for t in range(D + 1)]
        num = acc * p**e
        w = vp(i + 1, p) or 0
        if num % p**w:
            raise PrecisionExhausted("flow coefficient not integral")
        v[i + 1] = (num // p**w) * pow((i + 1) // p**w, -1, mod) % mod
    total = L + Xhat.loss
    return TruncatedSeries(p, K, tuple(c * p**total for c in v), total, False, None)


def flow_series(data: LinearizationData) -> TruncatedSeries:
    """V(s) with f**(n k)(x) = x + p**r V(n): V(s) = U(p**e' s)."""
    e = data.extra["e_prime"]
    D = data.u.D
    tail = (D + 1) * e
    if "flow" in data.extra:
        # V_j = p**(j e) / j! times an integer, and j e - vp(j!) grows with j
        tail -= D // (data.p - 1)
        V = data.extra["flow"]
    else:
        V = data.u.scale_var(data.p**e)
    return TruncatedSeries(V.p, V.K, V.coeffs, V.loss, False, tail)


def _integral(ev, what: str) -> PadicInt:
    v = ev.value
    if not ev.loss:
        return v
    s = v.p**ev.loss
    if v.value % s:
        raise PrecisionExhausted(f"{what} carries a denominator")
    return PadicInt.make(v.value // s, v.p, v.K)


def flow_time(data: LinearizationData, z: PadicInt) -> PadicInt:
    """Psi((z - x) / p**r): the flow time from the anchor, in units where
    one k-step advances it by p**e'."""
    return _integral(evaluate(data.u_inv, data.to_scaled(z)), "time value")


def flow_apply(data: LinearizationData, n: int, z: PadicInt) -> PadicInt:
    """u(n k + u^{-1}(z)) evaluated through the stored series."""
    e = data.extra["e_prime"]
    if "flow" in data.extra:
        t = flow_time(data, z)
        if t.value % data.p**e:
            raise PrecisionExhausted("flow time not a multiple of the time unit")
        arg = PadicInt.make(t.value // data.p**e + n, data.p, data.K)
        return data.from_scaled(_integral(evaluate(flow_series(data), arg), "flow value"))
    arg = flow_time(data, z) + n * data.p**e
    return data.from_scaled(_integral(evaluate(data.u, arg), "flow value"))


# bounded k and Mahler interpolation ------------------------------------------


def mahler_eval(coeffs: list, n: int) -> PadicInt:
    """sum_j a_j * C(n, j)."""
    out = coeffs[0] * 0
    for j, a in enumerate(coeffs):
        if j > n:
            break
        out = out + a * comb(n, j)
    return out


def bounded_k(h: TruncatedSeries, z0: PadicInt) -> tuple[int, list]:
    """Minimal k <= p with g**k = id mod p for g(z) = h(p z)/p about z0, and
    the Mahler coefficients of n -> h**(n k)(z0)."""
    p, K = h.p, h.K
    if p <= 3:
        raise PrimeTooSmall("needs p > 3")
    d = expand_at(h, z0)
    D0 = d.integral_residues()
    if D0[0] % p or D0[1] % p == 0:
        raise NotQuasiperiodic("need |h(z0) - z0| < 1 and a unit derivative")
    g = rescale(h, z0, 1)
    if not h.poly:
        g = TruncatedSeries(p, K, g.coeffs, g.loss, False, h.D)
    G0 = g.integral_residues()
    k = _affine_period(G0[0], G0[1], p)
    if k > p:
        raise NotQuasiperiodic("affine part has period above p")
    # orbit of 0 under g**k, evaluated pointwise
    pts = [PadicInt.make(0, p, K)]
    cur = pts[0]
    for _ in range(K + 1):
        for _ in range(k):
            cur = evaluate(g, cur).value
        pts.append(cur)
    coeffs = []
    for j in range(K + 1):
        a = PadicInt.make(0, p, K)
        for i in range(j + 1):
            a = a + pts[i] * ((-1) ** (j - i) * comb(j, i))
        coeffs.append(a * p)  # scale back to the h coordinate
    while len(coeffs) > 1 and coeffs[-1].is_zero:
        coeffs.pop()
    return k, coeffs


# binomial character ----------------------------------------------------------


def _stirling_first_rows(n: int) -> list[list[int]]:
    """Signed Stirling numbers s(i, j): falling factorial coefficients."""
    rows = [[1]]
    for i in range(1, n + 1):
        prev = rows[-1]
        row = [0] * (i + 1)
        for j in range(i + 1):
            a = prev[j - 1] if j >= 1 else 0
            b = prev[j] if j < len(prev) else 0
            row[j] = a - (i - 1) * b
        rows.append(row)
    return rows


def binomial_char(beta: PadicInt, D: int | None = None) -> tuple[int, TruncatedSeries]:
    """M = order of beta mod p and a series g with g(n) = beta**(n M)."""
    if not beta.is_unit:
        raise NotAUnit("binomial_char needs a unit")
    p, K = beta.p, beta.K
    M = mult_order_mod_p(beta)
    b = beta**M - 1
    mod = p**K
    if b.is_zero:
        return M, TruncatedSeries.from_ints([1], p, K, K if D is None else D, poly=True)
    vb = b.val
    if vb * (p - 1) <= 1:
        raise ExpDiverges("beta**M - 1 is too large for the binomial series in n")
    # b**i / i! has valuation >= i vb - (i - 1)/(p - 1), increasing in i, and
    # b**i is known mod p**(K + (i - 1) vb), so every term is integral with
    # no loss of precision
    imax = 1
    while (imax + 1) * vb * (p - 1) - imax < K * (p - 1):
        imax += 1
    if D is None:
        D = imax
    st = _stirling_first_rows(imax)
    bu = b.value // p**vb
    acc = [0] * (D + 1)
    for i in range(imax + 1):
        fi = _fact(i)
        v = vp(fi, p) or 0
        e = i * vb - v
        if e >= K:
            continue
        w = pow(bu, i, mod) * p**e * pow(fi // p**v, -1, mod)
        for j, s_ij in enumerate(st[i]):
            if j <= D and s_ij:
                acc[j] += s_ij * w
    if imax <= D:
        out = TruncatedSeries(p, K, tuple(acc), 0, True)
    else:
        tail = (D + 1) * vb - D // (p - 1)
        out = TruncatedSeries(p, K, tuple(acc), 0, False, max(tail, 0))
    return M, out


def _fact(n: int) -> int:
    out = 1
    for i in range(2, n + 1):
        out *= i
    return out
