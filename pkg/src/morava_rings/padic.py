"""Fixed-precision p-adic integers, Teichmueller lifts and valuation formulas.

Everything here is exact arithmetic in Z/p^nprec.  A value whose residue is 0
carries valuation nprec, to be read as ">= nprec": at this precision it is
indistinguishable from zero.  Callers that need to certify an exact zero must
raise nprec.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd

from .errors import CtxMismatch, InvalidInput, NonUnit


def int_vp(p: int, a: int) -> int:
    """Valuation of a nonzero integer, by exact factor-out."""
    if a == 0:
        raise InvalidInput("vp of 0 is unbounded")
    a = abs(a)
    v = 0
    while a % p == 0:
        a //= p
        v += 1
    return v


@dataclass(frozen=True)
class PadicCtx:
    p: int
    nprec: int
    modulus: int = field(init=False, compare=False)

    def __post_init__(self):
        if self.p < 3 or any(self.p % d == 0 for d in range(2, int(self.p ** 0.5) + 1)):
            raise InvalidInput(f"p must be an odd prime >= 3, got {self.p}")
        if self.nprec < 1:
            raise InvalidInput("nprec must be >= 1")
        object.__setattr__(self, "modulus", self.p ** self.nprec)

    def with_nprec(self, nprec: int) -> "PadicCtx":
        return PadicCtx(self.p, nprec)

    def make(self, a: int) -> "PadicInt":
        return PadicInt(self, a % self.modulus)

    def unit_inverse(self, a: int) -> int:
        """Inverse of a mod p^nprec; a must be a unit."""
        if a % self.p == 0:
            raise NonUnit(f"{a} is not a unit mod {self.p}^{self.nprec}")
        return pow(a, -1, self.modulus)


@dataclass(frozen=True)
class PadicInt:
    ctx: PadicCtx
    residue: int

    @property
    def val(self) -> int:
        """Valuation, capped at nprec (residue 0 means 'val >= nprec')."""
        if self.residue == 0:
            return self.ctx.nprec
        return int_vp(self.ctx.p, self.residue)

    @property
    def val_exhausted(self) -> bool:
        return self.residue == 0

    def _check(self, other: "PadicInt"):
        if self.ctx != other.ctx:
            raise CtxMismatch("operands from different p-adic contexts")

    def __add__(self, other):
        self._check(other)
        return self.ctx.make(self.residue + other.residue)

    def __sub__(self, other):
        self._check(other)
        return self.ctx.make(self.residue - other.residue)

    def __mul__(self, other):
        self._check(other)
        return self.ctx.make(self.residue * other.residue)

    def __neg__(self):
        return self.ctx.make(-self.residue)

    def inverse(self) -> "PadicInt":
        return self.ctx.make(self.ctx.unit_inverse(self.residue))

    def is_zero(self) -> bool:
        return self.residue == 0

    def digits(self) -> str:
        """Base-p digit string, least significant first."""
        a, out = self.residue, []
        for _ in range(self.ctx.nprec):
            out.append(str(a % self.ctx.p))
            a //= self.ctx.p
        return "".join(out)

    def __repr__(self):
        return f"PadicInt({self.residue} mod {self.ctx.p}^{self.ctx.nprec})"


def padic_arith(a: PadicInt, b: PadicInt | None, op: str) -> PadicInt:
    """Ring operations mod p^nprec; op in {add, sub, mul, inv}."""
    if op == "inv":
        return a.inverse()
    assert b is not None
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise InvalidInput(f"unknown op {op!r}")


def mult_order_mod_p(p: int, k: int) -> int:
    """Smallest a >= 1 with k^a = 1 mod p; divides p - 1."""
    if k % p == 0:
        raise InvalidInput("k must be coprime to p")
    k %= p
    a, acc = 1, k
    while acc != 1:
        acc = acc * k % p
        a += 1
    return a


def vp_pow_minus_one(p: int, k: int, s: int) -> int:
    """v_p(k^s - 1) by the closed formula, never by expanding k^s.

    Zero unless a | s for a the order of k mod p; otherwise
    v_p(k^a - 1) + v_p(s).
    """
    if k % p == 0:
        raise InvalidInput("k must be coprime to p")
    if s < 1:
        raise InvalidInput("s must be >= 1")
    a = mult_order_mod_p(p, k)
    if s % a != 0:
        return 0
    return int_vp(p, k ** a - 1) + (int_vp(p, s) if s % p == 0 else 0)


def vp_factorial(p: int, d: int) -> int:
    """v_p(d!) = (d - digit sum of d in base p) / (p - 1)."""
    if d < 0:
        raise InvalidInput("d must be >= 0")
    digit_sum, a = 0, d
    while a:
        digit_sum += a % p
        a //= p
    return (d - digit_sum) // (p - 1)


def teichmuller(a: int, ctx: PadicCtx) -> PadicInt:
    """The (p-1)-st root of unity congruent to a mod p.

    Computed by iterating x -> x^p, which is stationary exactly on the
    Teichmueller representatives; nprec - 1 steps always suffice.
    """
    if a % ctx.p == 0:
        raise InvalidInput("a must be a unit mod p")
    x = a % ctx.modulus
    while True:
        y = pow(x, ctx.p, ctx.modulus)
        if y == x:
            return PadicInt(ctx, x)
        x = y


def teichmuller_product(ctx: PadicCtx) -> PadicInt:
    """Product of all Teichmueller lifts of (Z/p)^x; equals -1."""
    out = ctx.make(1)
    for a in range(1, ctx.p):
        out = out * teichmuller(a, ctx)
    return out


def vp_exact(p: int, a: int) -> int:
    """Valuation of an arbitrary-precision integer (brute-force oracle)."""
    return int_vp(p, a)


def _is_probable_prime(m: int) -> bool:
    if m < 2:
        return False
    for q in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if m % q == 0:
            return m == q
    d, r = m - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        x = pow(a, d, m)
        if x in (1, m - 1):
            continue
        for _ in range(r - 1):
            x = x * x % m
            if x == m - 1:
                break
        else:
            return False
    return True


def check_prime_power(q: int) -> tuple[int, int]:
    """Return (l, r) with q = l^r, l prime; InvalidInput otherwise."""
    if q < 2:
        raise InvalidInput(f"{q} is not a prime power")
    for l in range(2, q + 1):
        if q % l == 0:
            r = 0
            m = q
            while m % l == 0:
                m //= l
                r += 1
            if m != 1 or not _is_probable_prime(l):
                raise InvalidInput(f"{q} is not a prime power")
            return l, r
    raise InvalidInput(f"{q} is not a prime power")


def coprime(a: int, b: int) -> bool:
    return gcd(a, b) == 1
