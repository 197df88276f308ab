from __future__ import annotations

import itertools
from fractions import Fraction

import pytest
import sympy
from flint import fmpq
from hypothesis import given, settings
from hypothesis import strategies as st

from bispectral_aw.aw_core import (LambdaPoly, Parameters, SymmetricLaurent, aw_poly, lambda_n,
                                   lambda_sym, make_aw_qdiff_op, make_conjugated_recurrence_op,
                                   make_contiguous_qdiff_op, make_recurrence_op, phi43_terminating,
                                   qpochhammer, xi, xi_ratio)
from bispectral_aw.errors import DomainError
from bispectral_aw.exact_arith import LaurentPoly, RatFunc
from bispectral_aw.operators import opn_apply, opz_apply

from conftest import draw_params, frac

X = LaurentPoly({1: 1, -1: 1}, "z")


def _seq(p):
    return lambda m: aw_poly(m, p) if m >= 0 else LaurentPoly.const(0, "z")


# -- q-shifted factorials and the 4phi3 ------------------------------------------

def test_qpochhammer_examples():
    q = fmpq(1, 4)
    assert qpochhammer(fmpq(3, 7), 0, q) == 1
    assert qpochhammer(fmpq(1, 2), 2, q) == fmpq(7, 16)
    assert all(qpochhammer(q, n, q) > 0 for n in range(12))
    assert qpochhammer((fmpq(1, 2), fmpq(1, 3)), 2, q) == fmpq(7, 16) * (1 - fmpq(1, 3)) * (1 - fmpq(1, 12))


def test_phi43_trivial_and_two_terms():
    q = fmpq(1, 4)
    up = [q**0, fmpq(1, 3), fmpq(2, 5), fmpq(-1, 2)]
    lo = [fmpq(1, 7), fmpq(3, 11), fmpq(-2, 9)]
    assert phi43_terminating(up, lo, q, 0, q) == 1
    up1 = [q**-1, fmpq(1, 3), fmpq(2, 5), fmpq(-1, 2)]
    # hand expansion of the l <= 1 terms
    num = (1 - q**-1) * (1 - fmpq(1, 3)) * (1 - fmpq(2, 5)) * (1 + fmpq(1, 2))
    den = (1 - fmpq(1, 7)) * (1 - fmpq(3, 11)) * (1 + fmpq(2, 9)) * (1 - q)
    assert phi43_terminating(up1, lo, q, 1, q) == 1 + num / den * q


def test_phi43_requires_termination():
    q = fmpq(1, 4)
    with pytest.raises(DomainError):
        phi43_terminating([fmpq(1, 3)] * 4, [fmpq(1, 5)] * 3, q, 2, q)


# -- the polynomials ------------------------------------------------------------------

def _sympy_aw(n, p):
    """Independent expansion of the terminating series with sympy."""
    z = sympy.Symbol("z")
    q, a, b, c, d = (sympy.Rational(int(v.p), int(v.q)) for v in (p.q, p.a, p.b, p.c, p.d))

    def poch(x, m):
        return sympy.prod([(1 - x * q**i) for i in range(m)]) if m else sympy.Integer(1)

    total = 0
    for l in range(n + 1):
        total += (poch(q**-n, l) * poch(a * b * c * d * q ** (n - 1), l) * poch(a * z, l)
                  * poch(a / z, l) * q**l
                  / (poch(a * b, l) * poch(a * c, l) * poch(a * d, l) * poch(q, l)))
    pre = poch(a * b, n) * poch(a * c, n) * poch(a * d, n) / a**n
    return sympy.Poly(sympy.expand(pre * total * z**n), z)


@pytest.mark.parametrize("n", [0, 1, 2, 3, 4])
def test_aw_poly_against_independent_expansion(n, example_params):
    p = example_params
    got = aw_poly(n, p)
    poly = _sympy_aw(n, p)
    for (e,), c in poly.terms():
        assert frac(got.coeff(e - n)) == Fraction(int(c.p), int(c.q))
    assert len(got.terms) == len(poly.terms())


def test_aw_poly_shape(generic_params):
    p = generic_params
    assert aw_poly(0, p) == LaurentPoly.const(1, "z")
    p1 = aw_poly(1, p)
    assert set(p1.terms) <= {-1, 0, 1} and p1.coeff(1) == p1.coeff(-1)
    for n in range(9):
        f = aw_poly(n, p)
        assert isinstance(f, SymmetricLaurent)
        assert f.degree() == n and f.valuation() == -n


def test_sears_symmetry_all_permutations():
    p = draw_params(2)
    base = [aw_poly(n, p) for n in range(7)]
    for perm in itertools.permutations("abcd"):
        pp = p.permuted("".join(perm))
        assert all(aw_poly(n, pp) == base[n] for n in range(7))


# -- eigenvalues and xi -----------------------------------------------------------------

def test_lambda_examples(example_params):
    p = example_params
    assert lambda_n(0, p) == 0
    assert lambda_n(1, p) == fmpq(239, 80)
    t = LaurentPoly({1: 1})
    expect = (RatFunc(LaurentPoly({-1: 1})) - 1) * (1 - RatFunc(t) * (p.abcd / p.q))
    assert lambda_n("t", p) == expect


def test_lambda_distinct():
    p = draw_params(4)
    vals = [lambda_n(n, p) for n in range(21)]
    assert len(set(vals)) == 21


def test_lambda_poly_evaluation(generic_params):
    p = generic_params
    h = LambdaPoly([fmpq(1, 2), -3, fmpq(2, 5)])
    for n in range(5):
        lam = lambda_n(n, p)
        assert h(n, p) == fmpq(1, 2) - 3 * lam + fmpq(2, 5) * lam**2
        assert h.to_laurent(p).evaluate(p.q**n) == h(n, p)
    assert LambdaPoly.from_laurent(h.to_laurent(p), p) == h
    assert LambdaPoly.from_laurent(LaurentPoly({1: 1}), p) is None


def test_xi_examples(generic_params):
    p = generic_params
    q, a, b, c, d = p.q, p.a, p.b, p.c, p.d
    assert xi("a", 0, p) == 1
    assert xi("a", 1, p) == q * (1 - p.abcd / q) / (a * (1 - b * c) * (1 - b * d) * (1 - c * d) * (1 - q))
    for n in range(6):
        assert xi_ratio("a", p).evaluate(q**n) == xi("a", n + 1, p) / xi("a", n, p)


def test_xi_symmetric_in_the_other_three():
    p = draw_params(6)
    for perm in itertools.permutations("bcd"):
        pp = p.permuted("a" + "".join(perm))
        assert all(xi("a", n, pp) == xi("a", n, p) for n in range(7))


def test_parameter_validation():
    with pytest.raises(DomainError):
        Parameters(fmpq(1), fmpq(1, 2), fmpq(1, 3), fmpq(1, 5), fmpq(1, 7))
    with pytest.raises(DomainError):
        Parameters(fmpq(1, 4), 0, fmpq(1, 3), fmpq(1, 5), fmpq(1, 7))
    # abcd = q^-1
    with pytest.raises(DomainError):
        Parameters(fmpq(1, 4), fmpq(2), fmpq(2), fmpq(1), fmpq(1))
    p = Parameters("1/4", "1/8", "1/3", "1/5", "1/2")
    assert p.s == fmpq(1, 8) + fmpq(1, 3) + fmpq(1, 5) + fmpq(1, 2)
    assert p.s_prime == 8 + 3 + 5 + 2
    assert Parameters.from_json(p.to_json()) == p


# -- the classical operators ---------------------------------------------------------------

def test_recurrence_boundary_coefficient(generic_params):
    L = make_recurrence_op(generic_params)
    assert L.at(-1, 0) == 0
    p = generic_params
    # n = 0 row: A_0 p_1 + B_0 p_0 = 2x p_0
    assert aw_poly(1, p) * L.at(1, 0) + aw_poly(0, p) * L.at(0, 0) == X


@given(st.integers(0, 10_000))
@settings(max_examples=20)
def test_recurrence_and_qdiff_eigen_equations(seed):
    p = draw_params(seed)
    L = make_recurrence_op(p)
    B = make_aw_qdiff_op(p)
    for n in range(8):
        assert opn_apply(L, _seq(p), n, lower=0) == X * aw_poly(n, p)
        assert opz_apply(B, aw_poly(n, p)) == aw_poly(n, p) * lambda_n(n, p)


def test_qdiff_kills_constants_and_keeps_symmetry(generic_params):
    B = make_aw_qdiff_op(generic_params)
    assert opz_apply(B, LaurentPoly.const(1, "z")).is_zero()
    for m in range(1, 6):
        out = opz_apply(B, LaurentPoly({m: 1, -m: 1}, "z"), expect_laurent=True)
        SymmetricLaurent.of(out)


@pytest.mark.parametrize("ell", list("abcd"))
def test_contiguous_relation(ell):
    p = draw_params(9)
    B = make_contiguous_qdiff_op(ell, p)
    for n in range(1, 9):
        cur = aw_poly(n, p) * xi(ell, n, p)
        prev = aw_poly(n - 1, p) * xi(ell, n - 1, p)
        assert opz_apply(B, cur - prev) == (cur + prev) * (p.q ** (1 - n) - p.abcd * p.q ** (n - 1))


def test_contiguous_first_degree_by_hand(example_params):
    p = example_params
    B = make_contiguous_qdiff_op("a", p)
    a, b, c, d, q = p.a, p.b, p.c, p.d, p.q
    # the two terms of the series at n = 1, with (1 - az)(1 - a/z) = 1 - aX + a^2
    p1 = (LaurentPoly.const((1 - a * b) * (1 - a * c) * (1 - a * d) / a, "z")
          + (1 - a * X + LaurentPoly.const(a * a, "z")) * ((1 - q**-1) * (1 - p.abcd) * q / (1 - q) / a))
    assert p1 == aw_poly(1, p)
    lhs = opz_apply(B, p1 * xi("a", 1, p) - 1)
    assert lhs == (p1 * xi("a", 1, p) + 1) * (1 - p.abcd)


def test_conjugated_recurrence_closed_form(generic_params):
    p = generic_params
    for ell in "abcd":
        La = make_conjugated_recurrence_op(ell, p)
        assert La == make_recurrence_op(p).conjugate_by_ratio(xi_ratio(ell, p))
        a = p.roles(ell)[0]
        total = La.coeffs[1] + La.coeffs[0] + La.coeffs[-1]
        assert total == RatFunc.const(a / p.q + p.q / a)


def test_lambda_sym_half_shift():
    p = draw_params(1)
    r = p.sqrt_q
    assert r is not None
    f = lambda_sym(p, Fraction(1, 2))
    for n in range(4):
        assert f.evaluate(p.q**n) == lambda_n(Fraction(2 * n + 1, 2), p)
