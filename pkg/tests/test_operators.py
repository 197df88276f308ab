from __future__ import annotations

import json

import pytest
from flint import fmpq
from hypothesis import given, settings
from hypothesis import strategies as st

from bispectral_aw.aw_core import (aw_poly, lambda_n, make_aw_qdiff_op, make_conjugated_recurrence_op,
                                   make_recurrence_op, xi_ratio)
from bispectral_aw.errors import DomainError, EvaluationError
from bispectral_aw.exact_arith import LaurentPoly, RatFunc
from bispectral_aw.operators import (DiffOpN, QDiffOpZ, ShiftOp, opn_apply, opn_compose,
                                     opn_conjugate, opz_apply, opz_compose)

from conftest import laurent_polys, rationals

Q = fmpq(1, 4)
X = LaurentPoly({1: 1, -1: 1}, "z")


def _coeff(var):
    return st.builds(lambda n, d: RatFunc(n, d), laurent_polys(var, -2, 2),
                     st.sampled_from([LaurentPoly.const(1, var), LaurentPoly({0: 1, 1: -2}, var),
                                      LaurentPoly({0: 1, 2: fmpq(-1, 3)}, var)]))


def diffops(cls=DiffOpN):
    return st.dictionaries(st.integers(-2, 2), _coeff(cls.var), min_size=1, max_size=3).map(
        lambda d: cls(d, Q))


def _seq(p):
    return lambda m: aw_poly(m, p) if m >= 0 else LaurentPoly.const(0, "z")


# -- operators in n ------------------------------------------------------------

def test_identity_and_shift():
    f = lambda n: fmpq(n)  # noqa: E731
    assert opn_apply(DiffOpN.identity(Q), f, 7) == 7
    assert opn_apply(DiffOpN.shift(1, Q), f, 7) == 8


def test_recurrence_applied_at_two(generic_params):
    p = generic_params
    assert opn_apply(make_recurrence_op(p), _seq(p), 2) == X * aw_poly(2, p)


def test_compose_examples(generic_params):
    L = make_recurrence_op(generic_params)
    I = DiffOpN.identity(generic_params.q)
    assert opn_compose(L, I) == L
    assert opn_compose(DiffOpN.shift(1, Q), DiffOpN.shift(-1, Q)) == DiffOpN.identity(Q)
    L2 = opn_compose(L, L)
    p = generic_params
    for n in range(5):
        assert opn_apply(L2, _seq(p), n, lower=0) == X * X * aw_poly(n, p)


@given(diffops(), diffops(), diffops())
@settings(max_examples=100)
def test_compose_associative(A, B, C):
    assert (A @ B) @ C == A @ (B @ C)


@given(diffops(QDiffOpZ), diffops(QDiffOpZ), diffops(QDiffOpZ))
@settings(max_examples=100)
def test_qcompose_associative(A, B, C):
    assert opz_compose(opz_compose(A, B), C) == opz_compose(A, opz_compose(B, C))


@given(diffops(), diffops(), st.integers(0, 5))
@settings(max_examples=100)
def test_apply_respects_composition(A, B, n):
    f = lambda m: fmpq(m * m + 1, m + 7)  # noqa: E731
    try:
        lhs = opn_apply(A @ B, f, n)
        rhs = opn_apply(A, lambda m: opn_apply(B, f, m), n)
    except EvaluationError:
        return
    assert lhs == rhs


@given(diffops(), diffops(), laurent_polys("t", -2, 2, nonzero=True))
@settings(max_examples=100)
def test_conjugation_is_multiplicative(A, B, g):
    assert opn_conjugate(A @ B, g) == opn_conjugate(A, g) @ opn_conjugate(B, g)


@given(diffops(QDiffOpZ), diffops(QDiffOpZ))
@settings(max_examples=100)
def test_order_subadditive(A, B):
    C = A @ B
    if not C.is_zero():
        assert C.order <= A.order + B.order


def test_conjugation_by_constant_and_zero(generic_params):
    L = make_recurrence_op(generic_params)
    assert opn_conjugate(L, fmpq(5, 3)) == L
    with pytest.raises(DomainError):
        opn_conjugate(L, 0)
    with pytest.raises(ValueError):
        opn_conjugate(L)


def test_conjugated_coefficients(generic_params):
    p = generic_params
    q, a, b, c, d = p.q, p.a, p.b, p.c, p.d
    La = opn_conjugate(make_recurrence_op(p), ratio=xi_ratio("a", p))
    for n in range(6):
        t = q**n
        A = a * (1 - b * c * t) * (1 - b * d * t) * (1 - c * d * t) * (1 - q * t) / (
            q * (1 - p.abcd * t * t / q) * (1 - p.abcd * t * t))
        assert La.at(1, n) == A
        assert La.at(0, n) == a / q + q / a - La.at(1, n) - La.at(-1, n)
    assert La == make_conjugated_recurrence_op("a", p)


def test_pole_reports_shift():
    t = LaurentPoly({1: 1})
    L = DiffOpN({1: RatFunc(LaurentPoly.const(1), LaurentPoly.const(1) - t * 4)}, Q)
    with pytest.raises(EvaluationError) as err:
        opn_apply(L, lambda m: fmpq(1), 1)
    assert err.value.shift == 1


# -- q-difference operators -------------------------------------------------------

def test_qdiff_examples(generic_params):
    p = generic_params
    h = LaurentPoly({2: 1, -1: 3}, "z")
    assert opz_apply(QDiffOpZ.identity(p.q), h) == h
    assert opz_compose(QDiffOpZ.shift(1, p.q), QDiffOpZ.shift(-1, p.q)) == QDiffOpZ.identity(p.q)
    B = make_aw_qdiff_op(p)
    # p_1 = u X + v and B kills constants, so B X = lambda_1 p_1 / u
    p1 = aw_poly(1, p)
    u = p1.coeff(1)
    assert opz_apply(B, X) == p1 * (lambda_n(1, p) / u)
    assert opz_apply(B, aw_poly(3, p)) == aw_poly(3, p) * lambda_n(3, p)
    B2 = opz_compose(B, B)
    for n in range(7):
        assert opz_apply(B2, aw_poly(n, p)) == aw_poly(n, p) * lambda_n(n, p) ** 2


def test_qdiff_returns_ratfunc_when_not_laurent():
    z = LaurentPoly({1: 1}, "z")
    B = QDiffOpZ({0: RatFunc(LaurentPoly.const(1, "z"), LaurentPoly.const(1, "z") - z)}, Q)
    out = opz_apply(B, z)
    assert isinstance(out, RatFunc) and not out.is_laurent()


@given(diffops(QDiffOpZ))
@settings(max_examples=100)
def test_json_roundtrip(B):
    data = json.loads(json.dumps(B.to_json()))
    assert ShiftOp.from_json(data) == B
    assert data["variable"] == "z"


def test_json_roundtrip_recurrence(generic_params):
    L = make_recurrence_op(generic_params)
    assert ShiftOp.from_json(json.loads(json.dumps(L.to_json()))) == L


def test_polynomial_of_operator(generic_params):
    p = generic_params
    B = make_aw_qdiff_op(p)
    P = B.poly([1, 2, 3])
    for n in range(4):
        lam = lambda_n(n, p)
        assert opz_apply(P, aw_poly(n, p)) == aw_poly(n, p) * (1 + 2 * lam + 3 * lam**2)
