from math import factorial

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from morava_rings.errors import CtxMismatch, InvalidInput, NonUnit
from morava_rings.padic import (
    PadicCtx,
    check_prime_power,
    int_vp,
    mult_order_mod_p,
    padic_arith,
    teichmuller,
    teichmuller_product,
    vp_factorial,
    vp_pow_minus_one,
)

C34 = PadicCtx(3, 4)


def test_ctx_rejects_bad_p():
    with pytest.raises(InvalidInput):
        PadicCtx(2, 4)
    with pytest.raises(InvalidInput):
        PadicCtx(9, 4)
    with pytest.raises(InvalidInput):
        PadicCtx(3, 0)


def test_inverse_of_two_mod_81():
    # 2 * 41 = 82 = 1 mod 81
    assert padic_arith(C34.make(2), None, "inv").residue == 41


def test_add_identity():
    a = C34.make(17)
    assert padic_arith(a, C34.make(0), "add") == a


def test_mul_past_precision_is_zero_with_exhausted_val():
    r = padic_arith(C34.make(3), C34.make(27), "mul")
    assert r.residue == 0
    assert r.val == 4 and r.val_exhausted


def test_inv_nonunit_raises():
    with pytest.raises(NonUnit):
        C34.make(6).inverse()


def test_ctx_mismatch():
    with pytest.raises(CtxMismatch):
        C34.make(1) + PadicCtx(3, 5).make(1)


@given(st.integers(0, 80), st.integers(0, 80))
def test_valuation_multiplicative_capped(x, y):
    a, b = C34.make(x), C34.make(y)
    assert (a * b).val == min(a.val + b.val, 4)


def test_vp_pow_minus_one_examples():
    assert vp_pow_minus_one(3, 4, 3) == 2  # 4^3 - 1 = 63 = 3^2 * 7
    assert vp_pow_minus_one(3, 2, 1) == 0  # order of 2 mod 3 is 2
    assert vp_pow_minus_one(3, 2, 6) == 2  # 2^6 - 1 = 63
    with pytest.raises(InvalidInput):
        vp_pow_minus_one(3, 6, 2)


@settings(max_examples=300)
@given(st.sampled_from([3, 5, 7]), st.integers(2, 60), st.integers(1, 40))
def test_vp_pow_minus_one_against_bruteforce(p, k, s):
    if k % p == 0:
        k += 1
    assert vp_pow_minus_one(p, k, s) == (int_vp(p, k**s - 1) if (k**s - 1) % p == 0 else 0)


def test_vp_factorial_examples():
    assert vp_factorial(3, 9) == 4  # 9! = 3^4 * 4480
    assert vp_factorial(3, 2) == 0
    assert vp_factorial(3, 10) == 4  # digits 101_3, (10-2)/2


@pytest.mark.parametrize("p", [3, 5, 7])
def test_vp_factorial_exhaustive(p):
    for d in range(201):
        expect = int_vp(p, factorial(d)) if d > 1 else 0
        assert vp_factorial(p, d) == expect


def test_teichmuller_basics():
    c = PadicCtx(3, 2)
    assert teichmuller(2, c).residue == 8  # -1 mod 9
    assert teichmuller(1, C34).residue == 1
    with pytest.raises(InvalidInput):
        teichmuller(3, C34)


@pytest.mark.parametrize("p,n", [(3, 4), (5, 3), (7, 3), (3, 8)])
def test_teichmuller_root_of_unity_and_reduction(p, n):
    ctx = PadicCtx(p, n)
    for a in range(1, p):
        w = teichmuller(a, ctx)
        assert pow(w.residue, p - 1, ctx.modulus) == 1
        assert w.residue % p == a


@pytest.mark.parametrize("p", [3, 5, 7])
def test_teichmuller_product_is_minus_one(p):
    ctx = PadicCtx(p, 6)
    assert teichmuller_product(ctx).residue == ctx.modulus - 1


def test_mult_order():
    assert mult_order_mod_p(3, 4) == 1
    assert mult_order_mod_p(3, 2) == 2
    assert mult_order_mod_p(7, 3) == 6  # 3 is a primitive root mod 7
    with pytest.raises(InvalidInput):
        mult_order_mod_p(3, 9)


@given(st.sampled_from([3, 5, 7]), st.integers(1, 200))
def test_mult_order_divides_p_minus_one(p, k):
    if k % p == 0:
        k += 1
    assert (p - 1) % mult_order_mod_p(p, k) == 0


def test_check_prime_power():
    assert check_prime_power(4) == (2, 2)
    assert check_prime_power(7) == (7, 1)
    assert check_prime_power(125) == (5, 3)
    with pytest.raises(InvalidInput):
        check_prime_power(12)
