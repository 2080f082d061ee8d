"""Dense univariate polynomial kernel over the truncated coefficient ring.

Polynomials are plain lists of E0Elem indexed by exponent.  Multiplication
packs each u-component into a single big integer (Kronecker substitution) so
that CPython's subquadratic integer product does the convolution; everything
else is straightforward list arithmetic.  All helpers reduce coefficients mod
p^nprec and truncate u-monomials at total degree < du.
"""

from __future__ import annotations

from .errors import DivisionFailure, NonUnit


def kron_mul(a: list[int], b: list[int], q: int, cap: int | None = None) -> list[int]:
    """Convolution of coefficient lists with entries in [0, q), reduced mod q."""
    if not a or not b:
        return []
    n = len(a) + len(b) - 1
    if cap is not None:
        n = min(n, cap)
    # cell width: products sum to < min(len) * q^2
    width = 2 * q.bit_length() + min(len(a), len(b)).bit_length() + 2
    width = (width + 7) // 8 * 8
    cell = width // 8
    pa = bytearray(len(a) * cell)
    for i, c in enumerate(a):
        if c:
            pa[i * cell : i * cell + (c.bit_length() + 7) // 8] = c.to_bytes(
                (c.bit_length() + 7) // 8, "little"
            )
    pb = bytearray(len(b) * cell)
    for i, c in enumerate(b):
        if c:
            pb[i * cell : i * cell + (c.bit_length() + 7) // 8] = c.to_bytes(
                (c.bit_length() + 7) // 8, "little"
            )
    prod = int.from_bytes(bytes(pa), "little") * int.from_bytes(bytes(pb), "little")
    raw = prod.to_bytes((len(a) + len(b)) * cell, "little")
    return [int.from_bytes(raw[i * cell : (i + 1) * cell], "little") % q for i in range(n)]


def _schoolbook_mul(a, b, q, cap=None):
    n = len(a) + len(b) - 1
    if cap is not None:
        n = min(n, cap)
    out = [0] * n
    for i, c in enumerate(a):
        if not c or i >= n:
            continue
        for j, d in enumerate(b):
            if i + j >= n:
                break
            if d:
                out[i + j] += c * d
    return [c % q for c in out]


# ---------------------------------------------------------------------------
# u-split representation: dict[u-exponent tuple, list[int]]

def split_u(ctx, poly):
    """list[E0Elem] -> dict[uexp, intlist] (missing entries are zero)."""
    comps: dict[tuple, list[int]] = {}
    for i, c in enumerate(poly):
        if c is None or c.is_zero():
            continue
        for uexp, r in c.terms.items():
            arr = comps.get(uexp)
            if arr is None:
                arr = comps[uexp] = [0] * len(poly)
            arr[i] = r
    return comps


def join_u(ctx, comps, length):
    from .series import E0Elem

    out = []
    for i in range(length):
        terms = {}
        for uexp, arr in comps.items():
            if i < len(arr) and arr[i]:
                terms[uexp] = arr[i]
        out.append(E0Elem(ctx, terms))
    return out


def up_trim(poly):
    n = len(poly)
    while n and poly[n - 1].is_zero():
        n -= 1
    return poly[:n]


def up_mul(ctx, a, b, cap: int | None = None):
    """Product of univariate polynomials over E0, optionally truncated."""
    a, b = up_trim(a), up_trim(b)
    if not a or not b:
        return []
    q = ctx.padic.modulus
    ca, cb = split_u(ctx, a), split_u(ctx, b)
    out_comps: dict[tuple, list[int]] = {}
    n = len(a) + len(b) - 1
    if cap is not None:
        n = min(n, cap)
    for ua, arra in ca.items():
        for ub, arrb in cb.items():
            uexp = tuple(x + y for x, y in zip(ua, ub))
            if sum(uexp) >= ctx.du:
                continue
            prod = kron_mul(arra, arrb, q, cap)
            acc = out_comps.get(uexp)
            if acc is None:
                out_comps[uexp] = prod
            else:
                for i, c in enumerate(prod):
                    acc[i] = (acc[i] + c) % q
    return up_trim(join_u(ctx, out_comps, n))


def up_add(ctx, a, b):
    from .series import E0Elem

    n = max(len(a), len(b))
    zero = E0Elem.zero(ctx)
    out = []
    for i in range(n):
        x = a[i] if i < len(a) else zero
        y = b[i] if i < len(b) else zero
        out.append(x + y)
    return up_trim(out)


def up_sub(ctx, a, b):
    return up_add(ctx, a, [-c for c in b])


def up_scale(ctx, a, s):
    return up_trim([c * s for c in a])


def up_reduce_mod(ctx, a, mod):
    """Remainder of a modulo a monic polynomial, exact."""
    a = list(a)
    d = len(mod) - 1
    assert mod[d].is_one(), "modulus must be monic"
    for i in range(len(a) - 1, d - 1, -1):
        c = a[i]
        if c.is_zero():
            continue
        a[i] = c - c  # zero of the right ctx
        for j in range(d):
            if not mod[j].is_zero():
                a[i - d + j] = a[i - d + j] - c * mod[j]
    return up_trim(a[:d])


def up_divmod_monic(ctx, a, mod):
    """(quotient, remainder) for division by a monic polynomial."""
    a = list(a)
    d = len(mod) - 1
    q = [a[0] - a[0]] * max(len(a) - d, 0) if len(a) > d else []
    for i in range(len(a) - 1, d - 1, -1):
        c = a[i]
        if c.is_zero():
            continue
        q[i - d] = c
        for j in range(d + 1):
            if not mod[j].is_zero():
                a[i - d + j] = a[i - d + j] - c * mod[j]
    return up_trim(q), up_trim(a[:d])


def up_mulmod(ctx, a, b, mod):
    return up_reduce_mod(ctx, up_mul(ctx, a, b), mod)


def up_pow_mod(ctx, a, e, mod):
    from .series import E0Elem

    out = [E0Elem.one(ctx)]
    base = up_reduce_mod(ctx, a, mod)
    while e:
        if e & 1:
            out = up_mulmod(ctx, out, base, mod)
        e >>= 1
        if e:
            base = up_mulmod(ctx, base, base, mod)
    return out


def up_exact_divide(ctx, a, b):
    """Quotient a / b for monic b with zero remainder; DivisionFailure else."""
    q, r = up_divmod_monic(ctx, a, b)
    if up_trim(r):
        raise DivisionFailure("division left a nonzero remainder at precision")
    return q


def up_invert_unit(ctx, a, length):
    """Inverse of a unit power series (a[0] a unit) to the given length."""
    from .series import E0Elem

    if not a or not a[0].is_unit():
        raise NonUnit("series with non-unit constant term")
    inv = [a[0].inverse()]
    k = 1
    while k < length:
        k = min(2 * k, length)
        prod = up_mul(ctx, a[:k], inv, cap=k)
        two_minus = up_sub(ctx, [E0Elem.from_int(ctx, 2)], prod)
        inv = up_mul(ctx, inv, two_minus, cap=k)
    return inv


def up_compose(ctx, f, g, cap):
    """f(g) truncated to cap terms; g must have zero constant term."""
    from .series import E0Elem

    assert not g or g[0].is_zero()
    out = []
    for c in reversed(up_trim(f)):
        out = up_mul(ctx, out, g, cap=cap)
        out = up_add(ctx, out, [c])
    return up_trim(out)
