"""The truncated coefficient ring Zp[[u_1..u_{n-1}]] and power series over it.

A PrecisionCtx fixes the three truncation parameters at once: p-adic digits
(nprec), total u-degree (du) and total degree in the series variables (dx).
Every public result is correct modulo the ideal

    (p^nprec, (u_1..u_{n-1})^du, (x_1..x_d)^dx).

E0Elem is a coefficient (a u-polynomial with p-adic integer coefficients);
Series is a truncated power series of any arity over E0.  Series of arity one
play the role of one-variable series, higher arity of multivariate ones.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import combinations, permutations

from .errors import (
    CtxMismatch,
    IndexOutOfRange,
    InvalidInput,
    NonUnit,
    NonUnitLinearTerm,
    NonzeroConstant,
    NotSymmetric,
    PrecisionExhausted,
)
from .padic import PadicCtx, PadicInt
from . import upoly


@dataclass(frozen=True)
class PrecisionCtx:
    padic: PadicCtx
    n: int = 1
    du: int = 1
    dx: int = 16

    def __post_init__(self):
        if self.n < 1:
            raise InvalidInput("height n must be >= 1")
        if self.du < 1 or self.dx < 1:
            raise InvalidInput("du and dx must be >= 1")

    @property
    def ucount(self) -> int:
        return self.n - 1

    @property
    def uzero(self) -> tuple:
        return (0,) * self.ucount

    def with_nprec(self, nprec: int) -> "PrecisionCtx":
        return PrecisionCtx(self.padic.with_nprec(nprec), self.n, self.du, self.dx)

    def with_dx(self, dx: int) -> "PrecisionCtx":
        return PrecisionCtx(self.padic, self.n, self.du, dx)


class E0Elem:
    """Element of Zp[[u_1..u_{n-1}]] mod (p^nprec, (u)^du).

    terms maps u-exponent tuples to residues in (0, p^nprec); zero residues
    are never stored.  Instances are treated as immutable.
    """

    __slots__ = ("ctx", "terms")

    def __init__(self, ctx: PrecisionCtx, terms: dict):
        self.ctx = ctx
        q = ctx.padic.modulus
        clean = {}
        for uexp, r in terms.items():
            if sum(uexp) >= ctx.du:
                continue
            r %= q
            if r:
                clean[uexp] = r
        self.terms = clean

    # -- constructors -------------------------------------------------------
    @classmethod
    def zero(cls, ctx):
        return cls(ctx, {})

    @classmethod
    def one(cls, ctx):
        return cls(ctx, {ctx.uzero: 1})

    @classmethod
    def from_int(cls, ctx, a: int):
        return cls(ctx, {ctx.uzero: a})

    @classmethod
    def u_gen(cls, ctx, i: int):
        """The generator u_i, 1 <= i <= n-1."""
        if not 1 <= i <= ctx.ucount:
            raise IndexOutOfRange(f"u_{i} does not exist at height {ctx.n}")
        exp = [0] * ctx.ucount
        exp[i - 1] = 1
        return cls(ctx, {tuple(exp): 1})

    # -- ring ops ------------------------------------------------------------
    def _check(self, other):
        if self.ctx != other.ctx:
            raise CtxMismatch("coefficients from different precision contexts")

    def __add__(self, other):
        self._check(other)
        out = dict(self.terms)
        for uexp, r in other.terms.items():
            out[uexp] = out.get(uexp, 0) + r
        return E0Elem(self.ctx, out)

    def __sub__(self, other):
        self._check(other)
        out = dict(self.terms)
        for uexp, r in other.terms.items():
            out[uexp] = out.get(uexp, 0) - r
        return E0Elem(self.ctx, out)

    def __neg__(self):
        return E0Elem(self.ctx, {u: -r for u, r in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, int):
            return E0Elem(self.ctx, {u: r * other for u, r in self.terms.items()})
        self._check(other)
        out = {}
        du = self.ctx.du
        for u1, r1 in self.terms.items():
            for u2, r2 in other.terms.items():
                uexp = tuple(a + b for a, b in zip(u1, u2))
                if sum(uexp) >= du:
                    continue
                out[uexp] = out.get(uexp, 0) + r1 * r2
        return E0Elem(self.ctx, out)

    __rmul__ = __mul__

    def __eq__(self, other):
        return isinstance(other, E0Elem) and self.ctx == other.ctx and self.terms == other.terms

    def is_zero(self) -> bool:
        return not self.terms

    def is_one(self) -> bool:
        return self.terms == {self.ctx.uzero: 1}

    def constant(self) -> int:
        """The u-free coefficient as an integer residue."""
        return self.terms.get(self.ctx.uzero, 0)

    def constant_padic(self) -> PadicInt:
        return PadicInt(self.ctx.padic, self.constant())

    def is_unit(self) -> bool:
        """Units of the local ring: the u-free part must be a p-unit."""
        return self.constant() % self.ctx.padic.p != 0

    def in_maximal_ideal(self) -> bool:
        return self.constant() % self.ctx.padic.p == 0

    def inverse(self) -> "E0Elem":
        if not self.is_unit():
            raise NonUnit("inverse of a non-unit coefficient")
        c_inv = E0Elem.from_int(self.ctx, self.ctx.padic.unit_inverse(self.constant()))
        # z = c (1 - n) with n supported in positive u-degrees: geometric sum
        n = E0Elem.one(self.ctx) - c_inv * self
        out = E0Elem.one(self.ctx)
        power = n
        for _ in range(1, self.ctx.du):
            if power.is_zero():
                break
            out = out + power
            power = power * n
        return out * c_inv

    def reduce_mod_m(self) -> int:
        """Image in the residue field F_p = E0/(p, u_1..u_{n-1})."""
        return self.constant() % self.ctx.padic.p

    def vp_constant(self) -> int:
        return PadicInt(self.ctx.padic, self.constant()).val

    def scale_pow_p(self, e: int) -> "E0Elem":
        """Multiply by p^e (e >= 0)."""
        return E0Elem(self.ctx, {u: r * self.ctx.padic.p**e for u, r in self.terms.items()})

    def divide_exact_pow_p(self, e: int) -> "E0Elem":
        """Divide by p^e; every coefficient must be divisible at precision.

        The quotient is only known mod p^(nprec-e); the caller is responsible
        for having worked at sufficient precision.
        """
        if e == 0:
            return self
        pe = self.ctx.padic.p**e
        out = {}
        for u, r in self.terms.items():
            if r % pe:
                raise PrecisionExhausted("coefficient not divisible by p^%d" % e)
            out[u] = r // pe
        return E0Elem(self.ctx, out)

    def change_ctx(self, ctx: PrecisionCtx) -> "E0Elem":
        """Reinterpret at another precision (reduces; never invents digits)."""
        return E0Elem(ctx, dict(self.terms))

    def __repr__(self):
        if not self.terms:
            return "E0(0)"
        bits = []
        for uexp in sorted(self.terms):
            mono = "*".join(f"u{i+1}^{e}" for i, e in enumerate(uexp) if e)
            bits.append(f"{self.terms[uexp]}{'*' + mono if mono else ''}")
        return "E0(" + " + ".join(bits) + ")"


class Series:
    """Truncated power series in `arity` variables over E0.

    terms maps exponent tuples (total degree < ctx.dx) to E0Elem.  Arity-one
    series double as one-variable power series (USeries); higher arity as
    multivariate ones (MSeries).
    """

    __slots__ = ("ctx", "arity", "terms")

    def __init__(self, ctx: PrecisionCtx, arity: int, terms: dict):
        self.ctx = ctx
        self.arity = arity
        clean = {}
        for exp, c in terms.items():
            if len(exp) != arity:
                raise InvalidInput("exponent arity mismatch")
            if sum(exp) >= ctx.dx:
                continue
            if not c.is_zero():
                clean[exp] = c
        self.terms = clean

    # -- constructors --------------------------------------------------------
    @classmethod
    def zero(cls, ctx, arity=1):
        return cls(ctx, arity, {})

    @classmethod
    def one(cls, ctx, arity=1):
        return cls(ctx, arity, {(0,) * arity: E0Elem.one(ctx)})

    @classmethod
    def constant(cls, ctx, arity, c: E0Elem):
        return cls(ctx, arity, {(0,) * arity: c})

    @classmethod
    def var(cls, ctx, arity=1, i=0):
        """The i-th variable (0-based)."""
        exp = [0] * arity
        exp[i] = 1
        return cls(ctx, arity, {tuple(exp): E0Elem.one(ctx)})

    @classmethod
    def from_coeff_list(cls, ctx, coeffs):
        return cls(ctx, 1, {(i,): c for i, c in enumerate(coeffs)})

    def coeff_list(self):
        n = 1 + max((e[0] for e in self.terms), default=-1)
        zero = E0Elem.zero(self.ctx)
        out = [zero] * n
        for (i,), c in self.terms.items():
            out[i] = c
        return out

    # -- basics ---------------------------------------------------------------
    def _check(self, other):
        if self.ctx != other.ctx or self.arity != other.arity:
            raise CtxMismatch("series from different contexts or arities")

    def __add__(self, other):
        self._check(other)
        out = dict(self.terms)
        for exp, c in other.terms.items():
            out[exp] = out[exp] + c if exp in out else c
        return Series(self.ctx, self.arity, out)

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return Series(self.ctx, self.arity, {e: -c for e, c in self.terms.items()})

    def scale(self, c) -> "Series":
        if isinstance(c, int):
            c = E0Elem.from_int(self.ctx, c)
        return Series(self.ctx, self.arity, {e: k * c for e, k in self.terms.items()})

    def __mul__(self, other):
        self._check(other)
        if not self.terms or not other.terms:
            return Series.zero(self.ctx, self.arity)
        if self.arity == 1:
            prod = upoly.up_mul(self.ctx, self.coeff_list(), other.coeff_list(), cap=self.ctx.dx)
            return Series.from_coeff_list(self.ctx, prod)
        if len(self.terms) * len(other.terms) > 5000:
            return self._mul_packed(other)
        dx = self.ctx.dx
        out = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                exp = tuple(a + b for a, b in zip(e1, e2))
                if sum(exp) >= dx:
                    continue
                prod = c1 * c2
                out[exp] = out[exp] + prod if exp in out else prod
        return Series(self.ctx, self.arity, out)

    def _mul_packed(self, other):
        """Dense multivariate product through the flat Kronecker kernel."""
        dx = self.ctx.dx
        stride = 2 * dx - 1
        size = stride ** self.arity

        def flatten(s):
            comps = {}
            for exp, c in s.terms.items():
                pos = 0
                for e in exp:
                    pos = pos * stride + e
                for uexp, r in c.terms.items():
                    arr = comps.setdefault(uexp, [0] * size)
                    arr[pos] = r
            return comps

        q = self.ctx.padic.modulus
        ca, cb = flatten(self), flatten(other)
        acc: dict[tuple, list[int]] = {}
        for u1, arr1 in ca.items():
            for u2, arr2 in cb.items():
                uexp = tuple(a + b for a, b in zip(u1, u2))
                if sum(uexp) >= self.ctx.du:
                    continue
                prod = upoly.kron_mul(arr1, arr2, q, cap=size)
                tgt = acc.get(uexp)
                if tgt is None:
                    acc[uexp] = prod
                else:
                    for i, c in enumerate(prod):
                        if c:
                            tgt[i] = (tgt[i] + c) % q
        out = {}
        for uexp, arr in acc.items():
            for pos, r in enumerate(arr):
                if not r:
                    continue
                exp, rem = [], pos
                for _ in range(self.arity):
                    exp.append(rem % stride)
                    rem //= stride
                exp = tuple(reversed(exp))
                if sum(exp) >= dx:
                    continue
                cur = out.get(exp)
                if cur is None:
                    out[exp] = {uexp: r}
                else:
                    cur[uexp] = cur.get(uexp, 0) + r
        return Series(self.ctx, self.arity, {e: E0Elem(self.ctx, t) for e, t in out.items()})

    def __eq__(self, other):
        return (
            isinstance(other, Series)
            and self.ctx == other.ctx
            and self.arity == other.arity
            and self.terms == other.terms
        )

    def is_zero(self):
        return not self.terms

    def coefficient(self, exp: tuple) -> E0Elem:
        return self.terms.get(tuple(exp), E0Elem.zero(self.ctx))

    def constant_term(self) -> E0Elem:
        return self.coefficient((0,) * self.arity)

    def max_total_degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def permute_vars(self, perm) -> "Series":
        """Apply x_i -> x_{perm[i]}."""
        out = {}
        for exp, c in self.terms.items():
            new = [0] * self.arity
            for i, e in enumerate(exp):
                new[perm[i]] = e
            out[tuple(new)] = c
        return Series(self.ctx, self.arity, out)

    def __repr__(self):
        return f"Series(arity={self.arity}, {len(self.terms)} terms, dx={self.ctx.dx})"


# ---------------------------------------------------------------------------
# arithmetic entry points


def series_arith(f: Series, g: Series, op: str) -> Series:
    if op == "add":
        return f + g
    if op == "sub":
        return f - g
    if op == "mul":
        return f * g
    raise InvalidInput(f"unknown op {op!r}")


def compose(f: Series, g: Series) -> Series:
    """f(g) for one-variable f; g may have any arity but g(0) must be 0."""
    if f.arity != 1:
        raise InvalidInput("compose expects a one-variable outer series")
    if not g.constant_term().is_zero():
        raise NonzeroConstant("inner series must vanish at the origin")
    out = Series.zero(g.ctx, g.arity)
    for c in reversed(f.coeff_list()):
        out = out * g + Series.constant(g.ctx, g.arity, c)
    return out


def evaluate(f: Series, args: list) -> Series:
    """Evaluate f at a list of series (one per variable), each vanishing at 0."""
    if len(args) != f.arity:
        raise InvalidInput("wrong number of arguments")
    for g in args:
        if not g.constant_term().is_zero():
            raise NonzeroConstant("substituted series must vanish at the origin")
    target_arity = args[0].arity
    ctx = args[0].ctx
    pow_cache = [{0: Series.one(ctx, target_arity)} for _ in range(f.arity)]

    def var_power(i, e):
        cache = pow_cache[i]
        if e not in cache:
            best = max(k for k in cache if k <= e)
            acc = cache[best]
            for k in range(best + 1, e + 1):
                acc = acc * args[i]
                cache[k] = acc
        return cache[e]

    out = Series.zero(ctx, target_arity)
    for exp in sorted(f.terms):
        mono = Series.constant(ctx, target_arity, f.terms[exp].change_ctx(ctx))
        for i, e in enumerate(exp):
            if e:
                mono = mono * var_power(i, e)
        out = out + mono
    return out


def unit_invert(f: Series) -> Series:
    """Multiplicative inverse of a series with unit constant term."""
    if not f.constant_term().is_unit():
        raise NonUnit("constant term is not a unit")
    if f.arity == 1:
        inv = upoly.up_invert_unit(f.ctx, f.coeff_list(), f.ctx.dx)
        return Series.from_coeff_list(f.ctx, inv)
    inv = Series.constant(f.ctx, f.arity, f.constant_term().inverse())
    two = Series.constant(f.ctx, f.arity, E0Elem.from_int(f.ctx, 2))
    steps = max(1, f.ctx.dx).bit_length() + 1
    for _ in range(steps):
        inv = inv * (two - f * inv)
    return inv


def reversion(f: Series) -> Series:
    """Compositional inverse g with f(g) = g(f) = x mod x^dx."""
    if f.arity != 1:
        raise InvalidInput("reversion expects a one-variable series")
    if not f.constant_term().is_zero():
        raise NonzeroConstant("series must vanish at the origin")
    f1 = f.coefficient((1,))
    if not f1.is_unit():
        raise NonUnitLinearTerm("linear coefficient must be a unit")
    ctx = f.ctx
    x = Series.var(ctx, 1)
    g = x.scale(f1.inverse())
    fprime = Series(ctx, 1, {(e[0] - 1,): c * e[0] for e, c in f.terms.items() if e[0] >= 1})
    for _ in range(max(1, ctx.dx).bit_length() + 2):
        err = compose(f, g) - x
        if err.is_zero():
            break
        corr = err * unit_invert(compose(fprime, g))
        g = g - corr
    else:
        raise PrecisionExhausted("reversion did not converge")
    return g


# ---------------------------------------------------------------------------
# symmetric function toolkit


def elementary_symmetric(ctx: PrecisionCtx, d: int, k: int) -> Series:
    """sigma_k in x_1..x_d (sigma_0 = 1)."""
    if not 0 <= k <= d:
        raise IndexOutOfRange(f"sigma_{k} undefined for {d} variables")
    one = E0Elem.one(ctx)
    terms = {}
    for subset in combinations(range(d), k):
        exp = [0] * d
        for i in subset:
            exp[i] = 1
        terms[tuple(exp)] = one
    return Series(ctx, d, terms)


def is_symmetric(s: Series) -> bool:
    d = s.arity
    if d == 1:
        return True
    swap = list(range(d))
    swap[0], swap[1] = 1, 0
    cycle = [(i + 1) % d for i in range(d)]
    return s.permute_vars(swap) == s and s.permute_vars(cycle) == s


def symmetrize_to_elementary(s: Series, d: int | None = None) -> Series:
    """Rewrite a symmetric series as a series in sigma_1..sigma_d.

    Lexicographic peeling: repeatedly subtract c * sigma^beta matching the
    lex-leading monomial.  The result, expanded back in the x variables,
    reproduces the input exactly at truncation.
    """
    d = s.arity if d is None else d
    if d != s.arity:
        raise InvalidInput("arity mismatch")
    if not is_symmetric(s):
        raise NotSymmetric("input is not invariant under the symmetric group")
    ctx = s.ctx
    sigmas = [elementary_symmetric(ctx, d, k) for k in range(d + 1)]
    expansion_cache: dict[tuple, Series] = {(0,) * d: Series.one(ctx, d)}

    def expand(beta):
        if beta in expansion_cache:
            return expansion_cache[beta]
        # peel one factor off the last nonzero slot
        i = max(j for j, b in enumerate(beta) if b)
        prev = list(beta)
        prev[i] -= 1
        out = expand(tuple(prev)) * sigmas[i + 1]
        expansion_cache[beta] = out
        return out

    residue = s
    out_terms = {}
    guard = 0
    while residue.terms:
        guard += 1
        if guard > 200000:
            raise NotSymmetric("leading-monomial peeling failed to terminate")
        alpha = max(residue.terms)
        if list(alpha) != sorted(alpha, reverse=True):
            raise NotSymmetric("lex-leading exponent is not dominant")
        c = residue.terms[alpha]
        beta = tuple(
            (alpha[i] - alpha[i + 1]) if i + 1 < d else alpha[d - 1] for i in range(d)
        )
        out_terms[beta] = out_terms.get(beta, E0Elem.zero(ctx)) + c
        residue = residue - expand(beta).scale(c)
    return Series(ctx, d, out_terms)


def expand_in_x(phi: Series, d: int) -> Series:
    """Inverse of symmetrize_to_elementary: substitute sigma_k(x) into phi."""
    ctx = phi.ctx
    sigmas = [elementary_symmetric(ctx, d, k + 1) for k in range(d)]
    return evaluate(phi, sigmas)


@dataclass(frozen=True)
class SymBasisIndex:
    d: int
    bound: int
    kind: str  # "sigma_monomial" | "orbit_sum"
    exponents: tuple

    def label(self) -> str:
        if self.kind == "sigma_monomial":
            return "*".join(f"s{i+1}^{e}" for i, e in enumerate(self.exponents) if e) or "1"
        return "orb" + str(list(self.exponents))


def invariant_basis(d: int, bound: int, kind: str) -> list[SymBasisIndex]:
    """Index set for the rank-C(bound+d-1, d) module of symmetric invariants.

    sigma_monomial: exponent vectors beta with sum(beta) < bound.
    orbit_sum: weakly increasing alpha with entries in [0, bound).
    """
    if bound < 1:
        raise InvalidInput("bound must be >= 1")
    out = []
    if kind == "sigma_monomial":
        def rec(prefix, remaining):
            if len(prefix) == d:
                out.append(SymBasisIndex(d, bound, kind, tuple(prefix)))
                return
            for e in range(remaining + 1):
                rec(prefix + [e], remaining - e)
        rec([], bound - 1)
        out.sort(key=lambda b: b.exponents)
    elif kind == "orbit_sum":
        def rec2(prefix, lo):
            if len(prefix) == d:
                out.append(SymBasisIndex(d, bound, kind, tuple(prefix)))
                return
            for e in range(lo, bound):
                rec2(prefix + [e], e)
        rec2([], 0)
        out.sort(key=lambda b: b.exponents)
    else:
        raise InvalidInput(f"unknown basis kind {kind!r}")
    return out


def orbit_of(exp: tuple) -> list[tuple]:
    return sorted(set(permutations(exp)))


# ---------------------------------------------------------------------------
# canonical JSON form


def series_to_json(s: Series, var_names: list[str] | None = None) -> dict:
    names = var_names or [f"x{i+1}" for i in range(s.arity)]
    terms = []
    for exp in sorted(s.terms, key=lambda e: (sum(e), e)):
        c = s.terms[exp]
        for uexp in sorted(c.terms):
            terms.append(
                {
                    "exp": list(exp),
                    "uexp": list(uexp),
                    "val": PadicInt(s.ctx.padic, c.terms[uexp]).digits(),
                }
            )
    return {"vars": names, "terms": terms}


def series_from_json(ctx: PrecisionCtx, doc: dict) -> Series:
    arity = len(doc["vars"])
    terms: dict[tuple, dict] = {}
    p = ctx.padic.p
    for t in doc["terms"]:
        exp = tuple(t["exp"])
        val = sum(int(ch) * p**i for i, ch in enumerate(t["val"]))
        terms.setdefault(exp, {})[tuple(t["uexp"])] = val
    return Series(ctx, arity, {e: E0Elem(ctx, u) for e, u in terms.items()})


def series_to_json_str(s: Series, var_names=None) -> str:
    return json.dumps(series_to_json(s, var_names), sort_keys=False)
