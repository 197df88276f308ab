from __future__ import annotations

import json
import math

import numpy as np
import pytest
from flint import fmpq

from bispectral_aw.aw_core import Parameters, aw_poly, make_conjugated_recurrence_op
from bispectral_aw.bispectral_n import intertwine_Lf
from bispectral_aw.operators import opn_apply
from bispectral_aw.errors import DomainError, NumericalError, SliceError
from bispectral_aw.exact_arith import LaurentPoly, RatFunc
from bispectral_aw.orthogonality import (MeasureSpec, QuadratureConfig, Slice, aw_weight,
                                         darboux_chain, divisor_identity, inner_product,
                                         measure_for_spec, mixed_example, one_mass_example,
                                         one_sided_example, recover_mass, second_solutions,
                                         slice_eigenvalue, two_sided_example, v_solutions,
                                         verify_orthogonality)
from bispectral_aw.wronskian_ext import ExtensionSpec, p_hat, psi

Q4 = fmpq(1, 4)
R4 = fmpq(1, 2)
PRESETS = [one_mass_example, one_sided_example, two_sided_example, mixed_example]


def slice_params(alpha, l, eps, b=fmpq(1, 3), c=fmpq(-1, 5)):
    return Parameters(Q4, eps * Q4**alpha * R4**l, b, c, eps * R4**l)


def _casoratian(u1, u2, p):
    return u1(1, p) * u2(0, p) - u1(0, p) * u2(1, p)


# -- slice eigenfunctions ---------------------------------------------------------

def test_simplest_slice_solutions():
    p = slice_params(1, 1, 1)
    u1, u2 = second_solutions(0, Slice(1, 1), p)
    assert u1.to_laurent(p) == LaurentPoly.const(1, "t")
    t = LaurentPoly({1: 1}, "t")
    shape = (1 - t * (p.b * p.c)) * (1 - t * p.q) * LaurentPoly({-1: 1}, "t")
    ratio = RatFunc.of(u2.to_laurent(p)) / RatFunc.of(shape)
    assert ratio.is_laurent() and ratio.num.is_constant() and not ratio.is_zero()


@pytest.mark.parametrize("alpha", [1, 2, 3])
@pytest.mark.parametrize("l", [1, 2])
@pytest.mark.parametrize("eps", [1, -1])
def test_slice_eigen_relation(alpha, l, eps):
    p = slice_params(alpha, l, eps)
    sl = Slice(alpha, l, eps)
    op = make_conjugated_recurrence_op("a", p)
    for m in range(alpha):
        e = slice_eigenvalue(m, sl, p)
        assert e == eps * (Q4 ** m * R4**l + 1 / (Q4**m * R4**l))
        u1, u2 = second_solutions(m, sl, p)
        for u in (u1, u2):
            f = u.to_laurent(p)
            assert op.act(f) == RatFunc.of(f) * e
        assert _casoratian(u1, u2, p) != 0


@pytest.mark.parametrize("beta", [1, 2])
def test_b_side_solutions(beta):
    t_ = 1
    p = Parameters(Q4, fmpq(1, 3), -(Q4**beta) * R4**t_, -(R4**t_), fmpq(-1, 5))
    sl = Slice(beta, t_, -1)
    op = make_conjugated_recurrence_op("b", p)
    for m in range(beta):
        e = slice_eigenvalue(m, sl, p)
        assert e < -2
        v1, v2 = v_solutions(m, sl, p)
        for v in (v1, v2):
            f = v.to_laurent(p)
            assert op.act(f) == RatFunc.of(f) * e
        assert _casoratian(v1, v2, p) != 0
        # mirror of the a-side construction
        w1, w2 = second_solutions(m, sl, p.permuted("badc"))
        assert (v1, v2) == (w1, w2)


def test_slice_errors():
    p = slice_params(1, 1, 1)
    with pytest.raises(SliceError):
        second_solutions(0, Slice(2, 1), p)
    with pytest.raises(SliceError):
        second_solutions(1, Slice(1, 1), p)
    with pytest.raises(SliceError):
        Slice(0, 1).check(p)


# -- Darboux chain -------------------------------------------------------------------

@pytest.fixture(scope="module", params=PRESETS, ids=lambda f: f.__name__)
def preset(request):
    return request.param()


def test_chain_factorises(preset):
    ch = darboux_chain(preset)
    assert len(ch.steps) == preset.k
    assert ch.factorization_ok()
    assert ch.matches_wronskian()


def test_chain_operator_matches_intertwining(preset):
    ch = darboux_chain(preset)
    assert ch.L_hat() == intertwine_Lf([0, 1], preset)
    assert sorted(ch.L_hat().support) == [-1, 0, 1]


def test_chain_polynomials_match_up_to_scalars(preset):
    ch = darboux_chain(preset)
    k = preset.k
    for n in range(k, k + 4):
        a, b = p_hat(n, preset), ch.intermediate(k, n)
        scale = a.coeff(n) / b.coeff(n)
        assert scale != 0 and a == b * scale


def test_chain_first_step_kills_psi():
    s = one_mass_example()
    Q1 = darboux_chain(s).steps[0].Q
    for n in range(1, 9):
        assert opn_apply(Q1, lambda m: psi(1, m, s), n) == 0


# -- the weight and quadrature --------------------------------------------------------

def test_weight_domain():
    p = one_mass_example().params
    with pytest.raises(DomainError):
        aw_weight(1.0, p)
    with pytest.raises(DomainError):
        aw_weight(-1.5, p)


def test_weight_positive_on_grid():
    p = one_mass_example().params
    xs = np.linspace(-0.995, 0.995, 100)
    assert all(aw_weight(float(x), p) > 0 for x in xs)


def test_weight_truncation_converges():
    p = one_mass_example().params
    q = float(p.q)
    for x in (-0.7, 0.1, 0.93):
        ref = aw_weight(x, p, trunc=128)
        assert abs(aw_weight(x, p, trunc=64) - ref) <= 1e-14 * abs(ref)
        # the geometric bound: about q**trunc relative
        assert abs(aw_weight(x, p, trunc=20) - ref) <= 50 * q**20 * abs(ref)


def test_classical_orthogonality():
    p = Parameters(Q4, fmpq(1, 8), fmpq(1, 3), fmpq(1, 5), fmpq(1, 2))
    m = MeasureSpec(p)
    assert inner_product(LaurentPoly.const(1, "z"), LaurentPoly.const(1, "z"), m) > 0
    rep = verify_orthogonality(ExtensionSpec(p, ()), m, 6)
    assert rep.passed and rep.max_rel_offdiag < 1e-10
    assert recover_mass(ExtensionSpec(p, ()), m, []) == []


def test_quadrature_nonconvergence_reported():
    p = one_mass_example().params
    quad = QuadratureConfig(nodes=(2, 3), trunc=64, tol=1e-14)
    with pytest.raises(NumericalError):
        inner_product(aw_poly(6, p), aw_poly(6, p), MeasureSpec(p), quad)


def test_measure_validation_and_json():
    p = one_mass_example().params
    with pytest.raises(DomainError):
        MeasureSpec(p, (fmpq(1, 2),))
    m = MeasureSpec(p, (fmpq(5, 4),), ((fmpq(5, 4), -0.5),), 2.0)
    assert MeasureSpec.from_json(json.loads(json.dumps(m.to_json()))) == m


# -- masses and orthogonality of the extended polynomials -------------------------------------

def _matched(spec):
    m, locs = measure_for_spec(spec)
    return m.with_masses(recover_mass(spec, m, locs)), locs


def test_one_mass_location_and_orthogonality():
    s = one_mass_example()
    m, locs = _matched(s)
    # x_0 = (q^{1/2} + q^{-1/2}) / 2 for q = 1/4
    assert locs == [fmpq(5, 4)]
    rep = verify_orthogonality(s, m, 6)
    assert rep.passed and rep.max_rel_offdiag < 1e-8
    # the mass is fitted to p_hat_1; p_hat_2 is orthogonal to 1 independently
    one = LaurentPoly.const(1, "z")
    g2 = inner_product(p_hat(2, s), one, m)
    g22 = inner_product(p_hat(2, s), p_hat(2, s), m)
    assert abs(g2) < 1e-8 * math.sqrt(abs(g22 * inner_product(one, one, m)))


def test_mass_depends_continuously_on_the_free_parameter():
    s1, s2 = one_mass_example(nu_prime="1/2"), one_mass_example(nu_prime="501/1000")
    nu1 = _matched(s1)[0].masses[0][1]
    nu2 = _matched(s2)[0].masses[0][1]
    assert abs(nu1 - nu2) < 0.01 * max(1.0, abs(nu1))


def test_mismatched_mass_breaks_orthogonality():
    s = one_mass_example()
    m, _ = _matched(s)
    (x, nu), = m.masses
    bad = m.with_masses(((x, nu * 1.05),))
    rep = verify_orthogonality(s, bad, 6)
    assert not rep.passed and rep.max_rel_offdiag > 1e-4


@pytest.mark.parametrize("make", [one_sided_example, two_sided_example, mixed_example])
def test_presets_orthogonal(make):
    s = make()
    m, locs = _matched(s)
    assert all(abs(float(x)) > 1 for x in locs)
    rep = verify_orthogonality(s, m, 6)
    assert rep.passed and rep.max_rel_offdiag < 1e-8


def test_two_sided_masses_on_both_sides():
    _, locs = measure_for_spec(two_sided_example())
    assert sorted(float(x) > 1 for x in locs) == [False, True]
    assert min(float(x) for x in locs) < -1


@pytest.mark.parametrize("alpha,l", [(1, 1), (2, 1), (1, 2), (3, 1)])
def test_divisor_identity(alpha, l):
    p = slice_params(alpha, l, 1)
    assert divisor_identity(Slice(alpha, l), p) < 1e-10


def test_divided_measure_is_scaled_lower_measure():
    # dividing by (x - x_0) on the simplest slice equals -2 sqrt(q) times the
    # measure with a lowered to q^{1/2}
    p = slice_params(1, 1, 1)
    x0 = (R4 + 1 / R4) / 2
    lowered = Parameters(Q4, R4, p.b, p.c, R4, m_max=0)
    one = LaurentPoly.const(1, "z")
    f = aw_poly(2, p)
    lhs = inner_product(f, one + f, MeasureSpec(p, (x0,)))
    rhs = -2 * float(R4) * inner_product(f, one + f, MeasureSpec(lowered))
    assert abs(lhs - rhs) < 1e-12 * abs(rhs)
