"""Formal group law engine: axioms, m-series, heights, the standard p-typical
law of height n, the Honda law, and Weierstrass preparation.

The logarithm of the p-typical law has p-power denominators, so construction
work happens in a "rational" layer: a series is carried as an integral
numerator at raised p-adic precision together with a global denominator
exponent.  Denominators are stripped eagerly after every product, and every
result that the theory promises to be integral is divided out exactly; a
failure of that division aborts the run (IntegralityFailure) since it can
only come from a bug or from insufficient working precision.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import upoly
from .errors import (
    DivisionFailure,
    IntegralityFailure,
    InvalidInput,
    MalformedFGL,
    NonzeroConstant,
    NotWeierstrass,
    PrecisionExhausted,
)
from .padic import PadicInt
from .series import E0Elem, PrecisionCtx, Series, compose, unit_invert


# ---------------------------------------------------------------------------
# rational layer: univariate series carried as numerator / p^den


class RatU:
    """value = num / p^den, num a coefficient list valid mod p^prec."""

    __slots__ = ("ctx", "num", "den", "prec")

    def __init__(self, ctx, num, den=0, prec=None):
        self.ctx = ctx
        self.num = upoly.up_trim(num)
        self.den = den
        self.prec = ctx.padic.nprec if prec is None else prec
        self._strip()

    def _strip(self):
        if self.den == 0 or not self.num:
            if not self.num:
                self.prec, self.den = self.ctx.padic.nprec, 0
            return
        p = self.ctx.padic.p
        c = self.den
        for coeff in self.num:
            for r in coeff.terms.values():
                v = 0
                while v < c and r % p == 0:
                    r //= p
                    v += 1
                c = min(c, v)
                if c == 0:
                    return
        if c:
            self.num = [x.divide_exact_pow_p(c) for x in self.num]
            self.den -= c
            self.prec -= c

    def _aligned(self, other):
        """Rescale both numerators to a common denominator, crediting the
        digits gained by multiplying a residue by a power of p."""
        W = self.ctx.padic.nprec
        d = max(self.den, other.den)
        a = [c.scale_pow_p(d - self.den) for c in self.num]
        b = [c.scale_pow_p(d - other.den) for c in other.num]
        pa = min(self.prec + d - self.den, W)
        pb = min(other.prec + d - other.den, W)
        return d, a, b, min(pa, pb)

    def add(self, other):
        d, a, b, prec = self._aligned(other)
        return RatU(self.ctx, upoly.up_add(self.ctx, a, b), d, prec)

    def sub(self, other):
        d, a, b, prec = self._aligned(other)
        return RatU(self.ctx, upoly.up_sub(self.ctx, a, b), d, prec)

    def mul(self, other, cap):
        return RatU(
            self.ctx,
            upoly.up_mul(self.ctx, self.num, other.num, cap=cap),
            self.den + other.den,
            min(self.prec, other.prec),
        )

    def integral_part(self, target_ctx, needed_prec):
        """Divide out the denominator exactly and reduce to the target ctx."""
        if self.prec - self.den < needed_prec:
            raise PrecisionExhausted("rational layer ran out of p-adic digits")
        try:
            num = [c.divide_exact_pow_p(self.den) for c in self.num]
        except PrecisionExhausted as exc:
            raise IntegralityFailure(
                "series expected to be integral has a true denominator"
            ) from exc
        return [c.change_ctx(target_ctx) for c in num]

    def truncate(self, cap):
        return RatU(self.ctx, self.num[:cap], self.den, self.prec)


def _ratu_invert_unit(f: RatU, length: int) -> RatU:
    """Inverse of a rational series whose constant value is a unit."""
    c0 = f.num[0].divide_exact_pow_p(f.den) if f.den else f.num[0]
    inv = RatU(f.ctx, [c0.inverse()], 0, f.prec - f.den)
    k = 1
    two = RatU(f.ctx, [E0Elem.from_int(f.ctx, 2)], 0, f.prec)
    while k < length:
        k = min(2 * k, length)
        inv = inv.mul(two.sub(f.truncate(k).mul(inv, k)), k)
    return inv


# ---------------------------------------------------------------------------
# the standard p-typical logarithm


@dataclass
class LogData:
    """Sparse logarithm sum_s (a_s / p^s) x^(p^s) with a_s integral (a_0 = 1).

    For the height-n standard law a_s collects all u-monomial contributions in
    degree p^s; for the Honda law a_s is 1 when n | s and 0 otherwise.
    """

    ctx: PrecisionCtx  # the big-precision working context
    terms: list  # list of (s, E0Elem a_s) with a_s != 0, s >= 1
    honda: bool

    def max_den(self):
        return max((s for s, _ in self.terms), default=0)


def ptypical_log_data(ctx: PrecisionCtx, big_ctx: PrecisionCtx, length: int, honda=False) -> LogData:
    """Coefficient data of the logarithm, built by the last-entry recurrence
    a_s = sum_j p^(j-1) u_j^(p^(s-j)) a_(s-j)  (u_n = 1)."""
    p, n = ctx.padic.p, ctx.n
    smax = 0
    while p ** (smax + 1) < length:
        smax += 1
    terms = []
    if honda:
        # log = sum_i x^(p^(n i)) / p^i, i.e. a_(n i) = p^(n i - i)
        for s in range(n, smax + 1, n):
            terms.append((s, E0Elem.one(big_ctx).scale_pow_p(s - s // n)))
        return LogData(big_ctx, terms, True)
    a = {0: E0Elem.one(big_ctx)}
    ugens = [None] + [
        E0Elem.u_gen(big_ctx, i) for i in range(1, n)
    ] + [E0Elem.one(big_ctx)]  # ugens[n] = 1
    for s in range(1, smax + 1):
        acc = E0Elem.zero(big_ctx)
        for j in range(1, min(n, s) + 1):
            uj_pow = _elem_pow(ugens[j], p ** (s - j)) if j < n else E0Elem.one(big_ctx)
            acc = acc + a[s - j] * uj_pow * (p ** (j - 1))
        a[s] = acc
        terms.append((s, acc))
    return LogData(big_ctx, [(s, c) for s, c in terms if not c.is_zero()], False)


def _elem_pow(c: E0Elem, e: int) -> E0Elem:
    out = E0Elem.one(c.ctx)
    base = c
    while e:
        if e & 1:
            out = out * base
        e >>= 1
        if e:
            base = base * base
    return out


def _log_eval(log: LogData, g: RatU, length: int) -> RatU:
    """l(g) as a rational series (g must vanish at the origin)."""
    p = log.ctx.padic.p
    out = g
    power = g
    cur = 1
    for s, a in sorted(log.terms):
        target = p**s
        if target >= length:
            break
        while cur < target:
            # square as far as possible, finish with single multiplies
            if 2 * cur <= target:
                power = power.mul(power, length)
                cur *= 2
            else:
                power = power.mul(g, length)
                cur += 1
        if power.num:
            term = RatU(log.ctx, [c * a for c in power.num], power.den + s, power.prec)
            out = out.add(term)
    return out


def _log_derivative_at(log: LogData, g: RatU, length: int) -> RatU:
    """l'(g); integral because the p^s from differentiating cancels 1/p^s."""
    p = log.ctx.padic.p
    out = RatU(log.ctx, [E0Elem.one(log.ctx)], 0, g.prec)
    power = RatU(log.ctx, [E0Elem.one(log.ctx)], 0, g.prec)
    cur = 0
    for s, a in sorted(log.terms):
        target = p**s - 1
        if target >= length:
            break
        while cur < target:
            if cur > 0 and 2 * cur <= target:
                power = power.mul(power, length)
                cur *= 2
            else:
                power = power.mul(g, length)
                cur += 1
        if power.num:
            term = RatU(log.ctx, [c * a for c in power.num], power.den, power.prec)
            out = out.add(term)
    return out


def _ratu_reversion(log: LogData, length: int) -> RatU:
    """exp = log^{-1} as a rational series, by Newton iteration."""
    ctx = log.ctx
    x = RatU(ctx, [E0Elem.zero(ctx), E0Elem.one(ctx)], 0, ctx.padic.nprec)
    g = x
    rounds = max(1, length).bit_length() + 2
    for _ in range(rounds):
        err = _log_eval(log, g, length).sub(x)
        if not err.num:
            break
        dinv = _ratu_invert_unit(_log_derivative_at(log, g, length), length)
        g = g.sub(err.mul(dinv, length))
    return g


def _ratu_vanishes_to(r: RatU, digits: int) -> bool:
    """True when the value of r is 0 mod p^digits."""
    pe = r.ctx.padic.p ** min(digits + r.den, r.ctx.padic.nprec)
    return all(res % pe == 0 for c in r.num for res in c.terms.values())


def newton_m_series(log: LogData, m: int, length: int, needed_digits: int) -> RatU:
    """Solve l(P) = m l(x): the integer series [m](x) of the standard law.

    Works at any length without touching the two-variable law; the solution
    is integral.
    """
    ctx = log.ctx
    x = RatU(ctx, [E0Elem.zero(ctx), E0Elem.one(ctx)], 0, ctx.padic.nprec)
    rhs = _log_eval(log, x, length)
    rhs = RatU(ctx, [c * m for c in rhs.num], rhs.den, rhs.prec)
    P = RatU(ctx, [E0Elem.zero(ctx), E0Elem.from_int(ctx, m)], 0, ctx.padic.nprec)
    cur = 2
    while True:
        cur = min(2 * cur, length)
        err = _log_eval(log, P, cur).sub(rhs.truncate(cur))
        if err.num:
            dinv = _ratu_invert_unit(_log_derivative_at(log, P, cur), cur)
            P = P.sub(err.mul(dinv, cur))
        if cur == length:
            break
    err = _log_eval(log, P, length).sub(rhs)
    if not _ratu_vanishes_to(err, needed_digits):
        raise PrecisionExhausted("m-series Newton iteration did not converge")
    return P


# ---------------------------------------------------------------------------
# bivariate rational layer (only used while assembling F)


class RatB:
    __slots__ = ("num", "den", "prec")

    def __init__(self, num: Series, den=0, prec=None):
        self.num = num
        self.den = den
        self.prec = num.ctx.padic.nprec if prec is None else prec
        self._strip()

    def _strip(self):
        if self.den == 0 or not self.num.terms:
            if not self.num.terms:
                self.den = 0
            return
        c = self.den
        p = self.num.ctx.padic.p
        for coeff in self.num.terms.values():
            for r in coeff.terms.values():
                v = 0
                while v < c and r % p == 0:
                    r //= p
                    v += 1
                c = min(c, v)
                if c == 0:
                    return
        if c:
            self.num = Series(
                self.num.ctx,
                self.num.arity,
                {e: k.divide_exact_pow_p(c) for e, k in self.num.terms.items()},
            )
            self.den -= c
            self.prec -= c

    def add(self, other):
        W = self.num.ctx.padic.nprec
        d = max(self.den, other.den)
        a = self.num.scale(self.num.ctx.padic.p ** (d - self.den))
        b = other.num.scale(other.num.ctx.padic.p ** (d - other.den))
        pa = min(self.prec + d - self.den, W)
        pb = min(other.prec + d - other.den, W)
        return RatB(a + b, d, min(pa, pb))

    def mul(self, other):
        return RatB(self.num * other.num, self.den + other.den, min(self.prec, other.prec))


# ---------------------------------------------------------------------------
# the FGL object and its operations


@dataclass
class FGL:
    ctx: PrecisionCtx
    F: Series  # arity 2
    log: LogData | None = None
    kind: str = "generic"

    def __repr__(self):
        return f"FGL(kind={self.kind}, p={self.ctx.padic.p}, n={self.ctx.n}, dx={self.ctx.dx})"


def fgl_from_series(ctx: PrecisionCtx, F: Series) -> FGL:
    if F.arity != 2:
        raise InvalidInput("a formal group law is a two-variable series")
    return FGL(ctx, F)


def additive_fgl(ctx) -> FGL:
    x, y = Series.var(ctx, 2, 0), Series.var(ctx, 2, 1)
    return FGL(ctx, x + y, None, "additive")


def multiplicative_fgl(ctx) -> FGL:
    x, y = Series.var(ctx, 2, 0), Series.var(ctx, 2, 1)
    return FGL(ctx, x + y + x * y, None, "multiplicative")


@dataclass
class AxiomReport:
    identity_ok: bool
    commutative_ok: bool
    associative_ok: bool
    first_failure: tuple | None  # (axiom, exponent, coefficient repr)

    @property
    def ok(self):
        return self.identity_ok and self.commutative_ok and self.associative_ok


def check_axioms(F: FGL) -> AxiomReport:
    """Identity, commutativity, associativity; exact at truncation."""
    s = F.F
    ctx = F.ctx
    first = None

    # identity: F(x, 0) = x
    id_terms = {e: c for e, c in s.terms.items() if e[1] == 0}
    x_only = Series(ctx, 2, {(1, 0): E0Elem.one(ctx)})
    ident = Series(ctx, 2, id_terms) - x_only
    identity_ok = ident.is_zero()
    if not identity_ok:
        e = min(ident.terms)
        first = ("identity", e, repr(ident.terms[e]))

    # commutativity
    diff = s - s.permute_vars([1, 0])
    commutative_ok = diff.is_zero()
    if not commutative_ok and first is None:
        e = min(diff.terms)
        first = ("commutativity", e, repr(diff.terms[e]))

    assoc_diff = _associativity_defect(s)
    associative_ok = assoc_diff is None
    if not associative_ok and first is None:
        first = ("associativity", assoc_diff[0], assoc_diff[1])

    return AxiomReport(identity_ok, commutative_ok, associative_ok, first)


def _tri_mul_packed(ctx, a: dict, b: dict):
    """Dense trivariate product of {exp: E0Elem} dicts via the flat kernel."""
    dx = ctx.dx
    stride = 2 * dx - 1
    size = stride**3
    q = ctx.padic.modulus

    def flatten(t):
        comps = {}
        for (i, j, k), c in t.items():
            pos = (i * stride + j) * stride + k
            for uexp, r in c.terms.items():
                comps.setdefault(uexp, [0] * size)[pos] = r
        return comps

    ca, cb = flatten(a), flatten(b)
    acc = {}
    for u1, a1 in ca.items():
        for u2, a2 in cb.items():
            u = tuple(x + y for x, y in zip(u1, u2))
            if sum(u) >= ctx.du:
                continue
            prod = upoly.kron_mul(a1, a2, q, cap=size)
            tgt = acc.get(u)
            if tgt is None:
                acc[u] = prod
            else:
                for i, c in enumerate(prod):
                    if c:
                        tgt[i] = (tgt[i] + c) % q
    out = {}
    for u, arr in acc.items():
        for pos, r in enumerate(arr):
            if not r:
                continue
            k = pos % stride
            j = pos // stride % stride
            i = pos // (stride * stride)
            if i + j + k >= dx:
                continue
            out.setdefault((i, j, k), {})[u] = r
    return {e: E0Elem(ctx, t) for e, t in out.items()}


def _associativity_defect(s: Series):
    """F(F(x,y),z) - F(x,F(y,z)) on the trivariate grid; None when zero."""
    ctx = s.ctx
    one = E0Elem.one(ctx)

    # rows of F by first/second exponent
    by_i: dict[int, dict[int, E0Elem]] = {}
    by_j: dict[int, dict[int, E0Elem]] = {}
    for (i, j), c in s.terms.items():
        by_i.setdefault(i, {})[j] = c
        by_j.setdefault(j, {})[i] = c

    a_terms = {(i, j, 0): c for (i, j), c in s.terms.items()}  # F(x,y)
    b_terms = {(0, i, j): c for (i, j), c in s.terms.items()}  # F(y,z)

    def assemble(base, rows, var_axis):
        # sum_i base^i * (row_i polynomial in the remaining variable)
        top = max(rows)
        acc: dict = {}
        for i in range(top, -1, -1):
            if acc:
                acc = _tri_mul_packed(ctx, acc, base)
            row = rows.get(i)
            if row:
                for e, c in row.items():
                    exp = [0, 0, 0]
                    exp[var_axis] = e
                    exp = tuple(exp)
                    acc[exp] = acc[exp] + c if exp in acc else c
        return acc

    lhs = assemble(a_terms, {i: by_i.get(i, {}) for i in by_i}, 2)
    rhs = assemble(b_terms, {j: by_j.get(j, {}) for j in by_j}, 0)
    keys = set(lhs) | set(rhs)
    zero = E0Elem.zero(ctx)
    for e in sorted(keys):
        d = lhs.get(e, zero) - rhs.get(e, zero)
        if not d.is_zero():
            return (e, repr(d))
    return None


def formal_sum(F: FGL, a: Series, b: Series) -> Series:
    """F(a, b) for one-variable series a, b vanishing at the origin."""
    ctx = F.ctx
    for s in (a, b):
        if not s.constant_term().is_zero():
            raise NonzeroConstant("formal sum arguments must vanish at 0")
    dx = ctx.dx
    # powers of b
    b_pows = [Series.one(ctx, 1)]
    for _ in range(1, dx):
        nxt = b_pows[-1] * b
        if nxt.is_zero():
            b_pows.append(nxt)
            break
        b_pows.append(nxt)
    rows: dict[int, Series] = {}
    for (i, j), c in F.F.terms.items():
        if j < len(b_pows):
            t = b_pows[j].scale(c)
            rows[i] = rows[i] + t if i in rows else t
    out = Series.zero(ctx, 1)
    for i in range(max(rows, default=0), -1, -1):
        out = out * a
        if i in rows:
            out = out + rows[i]
    return out


def formal_inverse(F: FGL) -> Series:
    """iota with F(x, iota(x)) = 0, by inductive correction of coefficients."""
    ctx = F.ctx
    x = Series.var(ctx, 1)
    iota = -x
    for _ in range(ctx.dx + 1):
        r = formal_sum(F, x, iota)
        if r.is_zero():
            break
        k = min(e[0] for e in r.terms)
        iota = iota - Series(ctx, 1, {(k,): r.terms[(k,)]})
    else:
        raise MalformedFGL("formal inverse construction did not terminate")
    return iota


def m_series(F: FGL, m: int) -> Series:
    """[m](x) by binary formal addition; [-m] = [m] o iota."""
    ctx = F.ctx
    x = Series.var(ctx, 1)
    if m == 0:
        return Series.zero(ctx, 1)
    neg = m < 0
    m = abs(m)
    acc = x
    for bit in bin(m)[3:]:
        acc = formal_sum(F, acc, acc)
        if bit == "1":
            acc = formal_sum(F, acc, x)
    if neg:
        acc = compose(acc, formal_inverse(F))
    return acc


def divided_m_series(F: FGL, m: int) -> Series:
    """<m>(x) = [m](x) / x, an exact shift."""
    s = m_series(F, m)
    if any(e[0] == 0 for e in s.terms):
        raise DivisionFailure("[m](x) not divisible by x")
    return Series(F.ctx, 1, {(e[0] - 1,): c for e, c in s.terms.items()})


def m_series_at(F: FGL, m: int, base: Series) -> Series:
    """[m](base) by binary formal addition starting from an arbitrary series."""
    ctx = F.ctx
    if m == 0:
        return Series.zero(ctx, 1)
    neg = m < 0
    m = abs(m)
    acc = base
    for bit in bin(m)[3:]:
        acc = formal_sum(F, acc, acc)
        if bit == "1":
            acc = formal_sum(F, acc, base)
    if neg:
        acc = _subst(formal_inverse(F), acc)
    return acc


def _subst(f: Series, g: Series) -> Series:
    """f(g) where g may have nonzero higher structure but g(0) = 0."""
    out = Series.zero(g.ctx, g.arity)
    for c in reversed(f.coeff_list()):
        out = out * g + Series.constant(g.ctx, g.arity, c)
    return out


def padic_series(F: FGL, a: PadicInt) -> Series:
    """[a](x) for a p-adic a, as the limit over partial digit sums.

    Stops once [p^(k+1)](x) vanishes at truncation; raises PrecisionExhausted
    when the digits of a run out before stabilisation.
    """
    ctx = F.ctx
    p = ctx.padic.p
    digits = []
    r = a.residue
    for _ in range(a.ctx.nprec):
        digits.append(r % p)
        r //= p
    x = Series.var(ctx, 1)
    p_ser = m_series(F, p)
    acc = m_series(F, digits[0]) if digits[0] else Series.zero(ctx, 1)
    P = x
    for k in range(1, len(digits)):
        P = _subst(p_ser, P)
        if P.is_zero():
            return acc
        if digits[k]:
            acc = formal_sum(F, acc, m_series_at(F, digits[k], P))
    P = _subst(p_ser, P)
    if not P.is_zero():
        raise PrecisionExhausted(
            "padic series did not stabilise within the digits of a; "
            "supply a at higher precision or reduce dx"
        )
    return acc


def height(F: FGL):
    """Height read off [p](x) mod the maximal ideal; None means infinite
    at this precision."""
    p = F.ctx.padic.p
    ps = m_series(F, p)
    reduced = {e[0]: c.reduce_mod_m() for e, c in ps.terms.items() if c.reduce_mod_m()}
    if not reduced:
        return None
    lead = min(reduced)
    n = 0
    q = 1
    while q < lead:
        q *= p
        n += 1
    if q != lead:
        raise MalformedFGL(f"leading term of [p](x) mod m at degree {lead}, not a p-power")
    return n


# ---------------------------------------------------------------------------
# construction of the standard laws


def build_ptypical(ctx: PrecisionCtx, honda: bool = False) -> FGL:
    """The standard p-typical law F = exp(log(x) + log(y)) of height n.

    Every coefficient of F must come out integral after cancellation; this is
    asserted, not assumed.
    """
    p = ctx.padic.p
    dx = ctx.dx
    den_cap = _rev_den_cap(ctx, dx)
    big = ctx.with_nprec(ctx.padic.nprec + 2 * den_cap + 4)
    log = ptypical_log_data(ctx, big, dx, honda=honda)
    exp = _ratu_reversion(log, dx)

    # s = l(x) + l(y) as a bivariate rational series
    v = log.max_den()
    sterms = {(1, 0): E0Elem.from_int(big, p**v), (0, 1): E0Elem.from_int(big, p**v)}
    for s_exp, a_s in log.terms:
        d = p**s_exp
        if d < dx:
            sterms[(d, 0)] = a_s.scale_pow_p(v - s_exp)
            sterms[(0, d)] = sterms[(d, 0)]
    big2 = big  # same ctx, arity handled by Series
    s_rat = RatB(Series(big2, 2, sterms), v, big.padic.nprec)

    acc = RatB(Series.zero(big2, 2), 0, big.padic.nprec)
    for c in reversed(exp.num):
        acc = acc.mul(s_rat)
        term = RatB(Series.constant(big2, 2, c), exp.den, exp.prec)
        acc = acc.add(term)
    if acc.den:
        # all coefficients must be divisible: F is integral
        try:
            numt = {e: c.divide_exact_pow_p(acc.den) for e, c in acc.num.terms.items()}
        except PrecisionExhausted as exc:
            raise IntegralityFailure("p-typical law failed the integrality check") from exc
        acc = RatB(Series(big2, 2, numt), 0, acc.prec - acc.den)
    if acc.prec < ctx.padic.nprec:
        raise PrecisionExhausted("not enough working digits while assembling F")

    F_terms = {e: c.change_ctx(ctx) for e, c in acc.num.terms.items()}
    F = Series(ctx, 2, F_terms)
    # cheap sanity: F(x, 0) = x
    idpart = {e: c for e, c in F.terms.items() if e[1] == 0}
    if idpart != {(1, 0): E0Elem.one(ctx)}:
        raise IntegralityFailure("constructed F fails F(x,0) = x")
    fgl = FGL(ctx, F, log, "honda" if honda else "ptypical")
    if honda:
        _verify_honda_p_series(fgl, exp)
    return fgl


def _rev_den_cap(ctx, dx):
    p = ctx.padic.p
    return (dx - 1) // (p - 1) + _smax(p, dx) + 2


def _smax(p, dx):
    s = 0
    while p ** (s + 1) < dx:
        s += 1
    return s


def build_honda(ctx: PrecisionCtx) -> FGL:
    """The height-n integral law with log = sum x^(p^(ni)) / p^i."""
    return build_ptypical(ctx, honda=True)


def _verify_honda_p_series(F: FGL, exp: RatU):
    """Check [p](x) = exp(px) +_F x^(p^n) at truncation."""
    ctx = F.ctx
    p, n = ctx.padic.p, ctx.n
    # exp(px) is integral: den(e_k) <= (k-1)/(p-1) < k = v_p(p^k)
    big = exp.ctx
    pk = [E0Elem.zero(big)] * len(exp.num)
    for k in range(1, len(exp.num)):
        pk[k] = exp.num[k].scale_pow_p(k)
    exp_px = RatU(big, pk, exp.den, exp.prec)
    coeffs = exp_px.integral_part(ctx, ctx.padic.nprec)
    lhs = m_series(F, p)
    xpn = Series(ctx, 1, {(p**n,): E0Elem.one(ctx)}) if p**n < ctx.dx else Series.zero(ctx, 1)
    rhs = formal_sum(F, Series.from_coeff_list(ctx, coeffs), xpn)
    if lhs != rhs:
        raise IntegralityFailure("Honda law failed the displayed p-series identity")


def log_linearity_check(F: FGL, a: PadicInt) -> bool:
    """l([a](x)) = a l(x) at truncation, for laws built with a logarithm."""
    if F.log is None:
        raise InvalidInput("law carries no logarithm")
    ctx = F.ctx
    s = padic_series(F, a)
    big = F.log.ctx
    lift = RatU(big, [c.change_ctx(big) for c in s.coeff_list()], 0, ctx.padic.nprec)
    lhs = _log_eval(F.log, lift, ctx.dx)
    x = RatU(big, [E0Elem.zero(big), E0Elem.one(big)], 0, ctx.padic.nprec)
    rhs = _log_eval(F.log, x, ctx.dx)
    rhs = RatU(big, [c * a.residue for c in rhs.num], rhs.den, rhs.prec)
    diff = lhs.sub(rhs)
    tol = ctx.padic.nprec - diff.den
    return all(c.is_zero() or c.vp_constant() >= tol for c in diff.num) if diff.num else True


# ---------------------------------------------------------------------------
# integer series at large length (no bivariate law needed)


def ptypical_m_series_coeffs(ctx: PrecisionCtx, m: int, length: int, honda=False):
    """[m](x) of the standard law as a coefficient list of the given length.

    Computed from the logarithm functional equation by Newton iteration, which
    reaches lengths far beyond what binary formal addition over the truncated
    two-variable law could; agrees with m_series wherever both apply.
    """
    big = ctx.with_nprec(ctx.padic.nprec + _smax(ctx.padic.p, length) + 2)
    log = ptypical_log_data(ctx, big, length, honda=honda)
    P = newton_m_series(log, m, length, ctx.padic.nprec)
    return P.integral_part(ctx, ctx.padic.nprec)


# ---------------------------------------------------------------------------
# Weierstrass preparation


@dataclass
class WeierstrassFactorization:
    degree: int
    g: list  # monic polynomial, coefficient list over E0 (or a quotient ring)
    unit: list  # unit power series, same coefficient type
    iterations: int = 0

    def g_series(self, ctx) -> Series:
        return Series.from_coeff_list(ctx, self.g)


class _E0Ops:
    """Coefficient-ring operations for Weierstrass preparation over E0."""

    def __init__(self, ctx):
        self.ctx = ctx

    def zero(self):
        return E0Elem.zero(self.ctx)

    def one(self):
        return E0Elem.one(self.ctx)

    def mul(self, a, b, cap):
        return upoly.up_mul(self.ctx, a, b, cap=cap)

    def invert_unit(self, a, length):
        return upoly.up_invert_unit(self.ctx, a, length)

    def in_max_ideal(self, c):
        return c.in_maximal_ideal()

    def is_unit(self, c):
        return c.is_unit()


class GenericRingOps:
    """Same protocol over any local coefficient ring with E0Elem-style ops."""

    def __init__(self, ring):
        self.ring = ring

    def zero(self):
        return self.ring.zero()

    def one(self):
        return self.ring.one()

    def mul(self, a, b, cap):
        a = [c for c in a]
        b = [c for c in b]
        n = len(a) + len(b) - 1 if a and b else 0
        n = min(n, cap) if cap else n
        out = [self.ring.zero()] * n
        for i, c in enumerate(a):
            if c.is_zero() or i >= n:
                continue
            for j, d in enumerate(b):
                if i + j >= n:
                    break
                if not d.is_zero():
                    out[i + j] = out[i + j] + c * d
        while out and out[-1].is_zero():
            out.pop()
        return out

    def invert_unit(self, a, length):
        inv = [a[0].inverse()]
        k = 1
        two = [self.ring.one() + self.ring.one()]
        while k < length:
            k = min(2 * k, length)
            prod = self.mul(a[:k], inv, k)
            tm = [two[0] - (prod[0] if prod else self.ring.zero())]
            for i in range(1, k):
                tm.append(-(prod[i] if i < len(prod) else self.ring.zero()))
            inv = self.mul(inv, tm, k)
        return inv

    def in_max_ideal(self, c):
        return c.in_maximal_ideal()

    def is_unit(self, c):
        return c.is_unit()


def weierstrass_prepare(f, degree: int | None = None, ctx=None, ops=None, schedule="forward"):
    """Factor a Weierstrass series as unit * monic polynomial.

    f is a coefficient list (or arity-1 Series); the unique fixed point of
      H <- rho(f)^{-1} (1 - rho(low(f) * H))
    gives u = H^{-1} and g = the low part of f*H plus x^degree.  The residual
    f - u*g vanishes identically at truncation.  `schedule` picks the seed of
    the iteration; all schedules converge to the same factorization.
    """
    if isinstance(f, Series):
        ctx = f.ctx
        f = f.coeff_list()
    if ops is None:
        ops = _E0Ops(ctx)
    f = list(f)
    while f and f[-1].is_zero():
        f.pop()
    if not f:
        raise NotWeierstrass("zero series")
    if degree is None:
        degree = next((i for i, c in enumerate(f) if ops.is_unit(c)), None)
        if degree is None:
            raise NotWeierstrass("no unit coefficient below truncation")
    D = degree
    if len(f) <= D or not ops.is_unit(f[D]):
        raise NotWeierstrass(f"coefficient of x^{D} is not a unit")
    for i in range(D):
        if i < len(f) and not ops.in_max_ideal(f[i]):
            raise NotWeierstrass(f"coefficient of x^{i} is not in the maximal ideal")
    if D == 0:
        unit = list(f)
        return WeierstrassFactorization(0, [ops.one()], unit, 0)

    L = len(f)
    cap = L
    low = f[:D]
    rho = f[D:]
    rho_inv = ops.invert_unit(rho, cap)
    if schedule == "forward":
        H = rho_inv
    elif schedule == "unit_seed":
        H = [f[D].inverse()]
    else:
        raise InvalidInput(f"unknown schedule {schedule!r}")
    iters = 0
    limit = (ctx.padic.nprec if ctx is not None else 64) * 3 + 16
    while True:
        iters += 1
        if iters > limit:
            raise PrecisionExhausted("weierstrass iteration failed to stabilise")
        QH = ops.mul(low, H, cap)
        rhoQH = QH[D:]
        tail = [-c for c in rhoQH]
        if tail:
            tail[0] = tail[0] + ops.one()
        else:
            tail = [ops.one()]
        H_new = ops.mul(rho_inv, tail, cap)
        if H_new == H:
            break
        H = H_new
    fH = ops.mul(f, H, cap)
    g = fH[:D] + [ops.one()]
    unit = ops.invert_unit(H, cap)
    # residual must vanish identically at truncation
    resid = ops.mul(unit, g, cap)
    n = max(len(resid), len(f))
    for i in range(n):
        a = resid[i] if i < len(resid) else ops.zero()
        b = f[i] if i < len(f) else ops.zero()
        if not (a - b).is_zero():
            raise PrecisionExhausted("weierstrass residual nonzero at truncation")
    return WeierstrassFactorization(D, g, unit, iters)


def pr_weierstrass(F: FGL, r: int) -> WeierstrassFactorization:
    """g_r: the Weierstrass polynomial of [p^r](x), of degree p^(n r)."""
    ctx = F.ctx
    p, n = ctx.padic.p, ctx.n
    if r == 0:
        return WeierstrassFactorization(1, [E0Elem.zero(ctx), E0Elem.one(ctx)], [E0Elem.one(ctx)], 0)
    if F.log is not None:
        coeffs = ptypical_m_series_coeffs(ctx, p**r, ctx.dx, honda=F.kind == "honda")
    else:
        ps = m_series(F, p)
        acc = ps
        for _ in range(r - 1):
            acc = _subst(ps, acc)
        coeffs = acc.coeff_list()
    D = p ** (n * r)
    if D >= ctx.dx:
        raise PrecisionExhausted(f"dx too small for the degree-{D} Weierstrass polynomial")
    return weierstrass_prepare(coeffs, D, ctx=ctx)


def formal_difference_quotient(F: FGL) -> Series:
    """Q with x -_F y = (x - y) Q(x,y); Q has unit constant term."""
    ctx = F.ctx
    iota = formal_inverse(F)
    # x -_F y = F(x, iota(y))
    iy = Series(ctx, 2, {(0, e[0]): c for e, c in iota.terms.items()})
    xs = Series.var(ctx, 2, 0)
    diff = _subst_bivar(F.F, xs, iy)
    # divide by (x - y): downward recursion on the y-degree
    by_j: dict[int, dict[int, E0Elem]] = {}
    for (i, j), c in diff.terms.items():
        by_j.setdefault(j, {})[i] = c
    K = max(by_j, default=0)
    q_rows: dict[int, dict[int, E0Elem]] = {}
    # a_k = x q_k - q_(k-1)  =>  q_(k-1) = x q_k - a_k, from the top down
    cur: dict[int, E0Elem] = {}
    for k in range(K, 0, -1):
        a_k = by_j.get(k, {})
        nxt = {}
        for i, c in cur.items():
            nxt[i + 1] = c
        for i, c in a_k.items():
            nxt[i] = nxt.get(i, E0Elem.zero(ctx)) - c if i in nxt else -c
        nxt = {i: c for i, c in nxt.items() if not c.is_zero()}
        q_rows[k - 1] = nxt
        cur = nxt
    out = {}
    for j, row in q_rows.items():
        for i, c in row.items():
            out[(i, j)] = c
    return Series(ctx, 2, out)


def _subst_bivar(f: Series, a: Series, b: Series) -> Series:
    """f(a, b) for a bivariate f and arguments vanishing at the origin."""
    ctx = a.ctx
    b_pows = [Series.one(ctx, b.arity)]
    maxj = max((e[1] for e in f.terms), default=0)
    for _ in range(maxj):
        b_pows.append(b_pows[-1] * b)
    rows: dict[int, Series] = {}
    for (i, j), c in f.terms.items():
        t = b_pows[j].scale(c)
        rows[i] = rows[i] + t if i in rows else t
    out = Series.zero(ctx, a.arity)
    for i in range(max(rows, default=0), -1, -1):
        out = out * a
        if i in rows:
            out = out + rows[i]
    return out
