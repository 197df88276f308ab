"""Operators in the degree index: the Casoratian operator Q, the algebra of
admissible f, and the intertwined operators with L_hat Q = Q f(L).

Q is stored as xi^a_gamma times a purely rational operator Q_tilde; every
symbolic identity is checked on Q_tilde, where all coefficients are
rational functions of t.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

from flint import fmpq

from .aw_core import (LambdaPoly, Parameters, aw_poly, is_half_power_of_q, make_conjugated_recurrence_op,
                      make_recurrence_op, xi, xi_ratio, xi_shift_ratio)
from .errors import (DegenerateParameterError, GenericityError, InternalError,
                     NotInAlgebraError)
from .exact_arith import LaurentPoly, NoSolution, RatFunc, linsolve, poly_det, rat
from .operators import DiffOpN, opn_apply
from .wronskian_ext import ExtensionSpec, certify, genericity_ratio, tau, tau_entry

__all__ = [
    "QOperator",
    "build_Q",
    "p_hat_via_Q",
    "leading_coefficient_check",
    "leading_coefficient_expected",
    "g_eigenpoly",
    "eigenvalue_factor",
    "MembershipResult",
    "az_membership",
    "az_annihilator",
    "az_minimal",
    "intertwine_Lf",
    "intertwine_residual",
]


@dataclass(frozen=True)
class QOperator:
    """Q = xi^a_gamma * op (for k = 0, Q is the identity)."""

    op: DiffOpN
    spec: ExtensionSpec

    @property
    def scaled(self) -> bool:
        return self.spec.k > 0

    def coefficient(self, l: int, n: int) -> fmpq:
        """Q^{(-l)} at integer n >= 0."""
        c = self.op.at(-l, n)
        return c * xi("a", n, self.spec.params) if self.scaled else c

    def apply(self, f, n: int, lower: int | None = 0):
        v = opn_apply(self.op, f, n, lower)
        return v * xi("a", n, self.spec.params) if self.scaled else v

    def kernel_operator(self, delta: str) -> DiffOpN:
        """Q_tilde conjugated by xi^delta: it annihilates phi iff Q kills phi/xi^delta."""
        return self.op.conjugate_by_ratio(xi_ratio(delta, self.spec.params))


@lru_cache(maxsize=None)
def build_Q(spec: ExtensionSpec) -> QOperator:
    """Cofactor expansion of the normalised Casoratian along its last column."""
    p = spec.params
    k = spec.k
    if k == 0:
        return QOperator(DiffOpN.identity(p.q), spec)
    certify(spec)
    rows = {l: [tau_entry(l, j, spec) for j in range(1, k + 1)] for l in range(1, k + 2)}
    coeffs = {}
    for l in range(1, k + 2):
        minor = [rows[r] for r in range(1, k + 2) if r != l]
        m = poly_det(minor)
        m = RatFunc.of(m, "t")
        sign = 1 if (l + k + 1) % 2 == 0 else -1
        coeffs[-(l - 1)] = m * xi_shift_ratio("a", -(l - 1), p) * sign
    op = DiffOpN(coeffs, p.q)
    if op.coeff(0).is_zero():
        raise GenericityError("leading coefficient of Q vanishes identically", "3.6a")
    return QOperator(op, spec)


def p_hat_via_Q(n: int, spec: ExtensionSpec):
    Q = build_Q(spec)
    return Q.apply(lambda m: aw_poly(m, spec.params), n, lower=0)


def leading_coefficient_expected(spec: ExtensionSpec, signed: bool = True) -> RatFunc:
    """chi_n xi^a_{n-k-1} / (chi_{n-1} xi^a_n) * tau_{n-1}, as a function of t.

    p_n sits in the first row and last column of the Casoratian, so its
    cofactor carries the sign (-1)^k; ``signed=False`` drops it.
    """
    p = spec.params
    if spec.k == 0:
        return RatFunc.const(1, "t")
    out = genericity_ratio(spec) * tau(spec).tau.dilate(1 / p.q)
    return out * (-1) ** spec.k if signed else out


def leading_coefficient_check(spec: ExtensionSpec, signed: bool = True) -> bool:
    return build_Q(spec).op.coeff(0) == leading_coefficient_expected(spec, signed)


# -- eigenpolynomials -------------------------------------------------------

def eigenvalue_factor(ell: str, j: int, p: Parameters) -> fmpq:
    """ell/q^{j+1} + q^{j+1}/ell."""
    v = p.value(ell)
    return v / p.q ** (j + 1) + p.q ** (j + 1) / v


def _check_nondegenerate(ell: str, p: Parameters):
    v = p.value(ell)
    r = p.sqrt_q
    # v = +/- q^{1+s/2} with s >= 0
    for s in range(0, 2 * p.m_max + 1):
        if r is not None:
            cand = p.q * r**s
        elif s % 2 == 0:
            cand = p.q ** (1 + s // 2)
        else:
            continue
        if v == cand or v == -cand:
            raise DegenerateParameterError(
                f"parameter {ell} = ±q^(1+{s}/2); eigenvalues of the conjugated operator collide")


def g_eigenpoly(ell: str, j: int, p: Parameters) -> LambdaPoly:
    """Degree-j polynomial eigenfunction of the ell-conjugated recurrence operator."""
    _check_nondegenerate(ell, p)
    a, b, c, d = p.roles(ell)
    q = p.q
    low = (q**2 / (a * b), q**2 / (a * c), q**2 / (a * d))
    t = LaurentPoly({1: 1}, "t")
    ti = LaurentPoly({-1: 1}, "t")
    pref = fmpq(1)
    for x in low:
        for i in range(j):
            pref *= 1 - x * q**i
    if pref == 0:
        raise DegenerateParameterError(
            f"a lower parameter of the series for g^{ell}_{j} is a nonpositive power of q; "
            "the normalised eigenpolynomial vanishes identically")
    term = LaurentPoly.const(pref, "t")
    total = LaurentPoly.const(0, "t")
    for l in range(j + 1):
        total = total + term
        if l == j:
            break
        num = (1 - q ** (l - j)) * (1 - q ** (j + 2 + l) / a**2)
        den = 1 - q ** (l + 1)
        for x in low:
            den *= 1 - x * q**l
        term = term * (1 - t * q ** (l + 1)) * (1 - ti * (q ** (l + 2) / p.abcd)) * (num * q / den)
    out = LambdaPoly.from_laurent(total, p, 0)
    if out is None or out.degree != j:
        raise InternalError("eigenpolynomial is not a degree-j polynomial in lambda")
    return out


# -- the algebra A_z --------------------------------------------------------

@dataclass(frozen=True)
class MembershipResult:
    member: bool
    certificate: tuple | None = None  # k x k matrix C with f(L) psi_j = sum_i C[i][j] psi_i

    def __bool__(self):
        return self.member


def _orbit(op: DiffOpN, phi: LaurentPoly, d: int) -> list[LaurentPoly]:
    """phi, L phi, ..., L^d phi as Laurent polynomials."""
    out = [phi]
    for _ in range(d):
        v = op.act(out[-1])
        if not v.is_laurent():
            raise InternalError("conjugated recurrence did not preserve Laurent polynomials")
        out.append(v.num)
    return out


def _coords(polys: Sequence[LaurentPoly]) -> tuple[list[int], list[list[fmpq]]]:
    exps = sorted({e for f in polys for e in f.terms})
    return exps, [[f.coeff(e) for e in exps] for f in polys]


def _groups(spec: ExtensionSpec) -> dict[str, list[int]]:
    g: dict[str, list[int]] = {}
    for j, d in enumerate(spec.deltas):
        g.setdefault(d, []).append(j)
    return g


def az_membership(f: Sequence, spec: ExtensionSpec) -> MembershipResult:
    """Decide whether f(L) maps span(psi_1..psi_k) into itself.

    ``f`` lists coefficients of a polynomial in X = z + 1/z (lowest first).
    Columns with different delta are handled separately: the ratio of two
    different xi factors is not rational in t, so no cancellation between
    groups is possible.
    """
    f = [rat(c) for c in f]
    k = spec.k
    p = spec.params
    if k == 0:
        return MembershipResult(True, ())
    cert = [[fmpq(0)] * k for _ in range(k)]
    for delta, idx in _groups(spec).items():
        op = make_conjugated_recurrence_op(delta, p)
        basis = [spec.phis[i].to_laurent(p) for i in idx]
        for jj in idx:
            orbit = _orbit(op, basis[idx.index(jj)], len(f) - 1)
            y = LaurentPoly.const(0, "t")
            for c, v in zip(f, orbit):
                y = y + v * c
            exps, rows = _coords(basis + [y])
            m = [[rows[i][e] for i in range(len(basis))] for e in range(len(exps))]
            sol = linsolve(m, rows[-1])
            if isinstance(sol, NoSolution):
                return MembershipResult(False, None)
            for pos, i in enumerate(idx):
                cert[i][jj] = sol.particular[pos]
    return MembershipResult(True, tuple(tuple(r) for r in cert))


def az_annihilator(spec: ExtensionSpec) -> list[fmpq]:
    """A nonzero f with f(L) psi_j = 0 for all j: product of eigenvalue factors."""
    p = spec.params
    top: dict[str, int] = {}
    for d, phi in spec.choices:
        _check_nondegenerate(d, p)
        top[d] = max(top.get(d, -1), phi.degree)
    poly = [fmpq(1)]
    for d in sorted(top):
        for i in range(top[d] + 1):
            e = eigenvalue_factor(d, i, p)
            # multiply by (e - X)
            nxt = [fmpq(0)] * (len(poly) + 1)
            for s, c in enumerate(poly):
                nxt[s] += e * c
                nxt[s + 1] -= c
            poly = nxt
    return poly


def az_minimal(spec: ExtensionSpec, max_degree: int) -> dict[int, list[fmpq]]:
    """Exhaustive search: for each degree d <= max_degree, a monic member of
    degree d with zero constant term, if one exists."""
    p = spec.params
    k = spec.k
    found: dict[int, list[fmpq]] = {}
    if k == 0:
        for d in range(1, max_degree + 1):
            found[d] = [fmpq(0)] * d + [fmpq(1)]
        return found
    groups = _groups(spec)
    ops = {d: make_conjugated_recurrence_op(d, p) for d in groups}
    orbits = {j: _orbit(ops[spec.deltas[j]], spec.phis[j].to_laurent(p), max_degree) for j in range(k)}
    for d in range(1, max_degree + 1):
        # unknowns: f_1..f_{d-1}, then certificate entries c[i][j] for same-delta pairs
        pairs = [(i, j) for idx in groups.values() for j in idx for i in idx]
        nf = d - 1
        rows: list[list[fmpq]] = []
        rhs: list[fmpq] = []
        for j in range(k):
            same = [i for i in groups[spec.deltas[j]]]
            polys = [orbits[j][s] for s in range(1, d + 1)] + [spec.phis[i].to_laurent(p) for i in same]
            exps, _ = _coords(polys)
            for e in exps:
                row = [orbits[j][s].coeff(e) for s in range(1, d)]
                row += [fmpq(0)] * len(pairs)
                for i in same:
                    row[nf + pairs.index((i, j))] = -spec.phis[i].to_laurent(p).coeff(e)
                rows.append(row)
                rhs.append(-orbits[j][d].coeff(e))
        if not rows[0]:
            found[d] = [fmpq(0)] * d + [fmpq(1)]
            continue
        sol = linsolve(rows, rhs)
        if isinstance(sol, NoSolution):
            continue
        fc = [fmpq(0)] + [sol.particular[s] for s in range(nf)] + [fmpq(1)]
        found[d] = fc
    return found


# -- intertwining -----------------------------------------------------------

def intertwine_Lf(f: Sequence, spec: ExtensionSpec, check_membership: bool = True) -> DiffOpN:
    """Solve L_hat Q = Q f(L) for L_hat, top shift first."""
    f = [rat(c) for c in f]
    p = spec.params
    L = make_recurrence_op(p)
    F = L.poly(f)
    if spec.k == 0:
        return F
    if check_membership and not az_membership(f, spec):
        raise NotInAlgebraError("f(L) does not preserve the span of the psi sequences")
    Q = build_Q(spec).op
    k = spec.k
    d = len(f) - 1
    q = p.q
    Q0 = Q.coeff(0)
    if Q0.is_zero():
        raise GenericityError("Q^(0) vanishes", "3.6a")
    QF = Q.compose(F)
    Lt: dict[int, RatFunc] = {}
    for s in range(d, -d - 1, -1):
        acc = QF.coeff(s)
        for j in range(s + 1, min(d, s + k) + 1):
            if j in Lt:
                acc = acc - Lt[j] * Q.coeff(s - j).dilate(q**j)
        Lt[s] = acc / Q0.dilate(q**s)
    Ltil = DiffOpN(Lt, q)
    if not (Ltil.compose(Q) - QF).is_zero():
        raise NotInAlgebraError("intertwining relation has a nonzero residual")
    return Ltil.conjugate_by_ratio(xi_ratio("a", p))


def intertwine_residual(Lhat: DiffOpN, f: Sequence, spec: ExtensionSpec) -> DiffOpN:
    """L_hat Q - Q f(L), written on the rational part of Q (zero iff the relation holds)."""
    p = spec.params
    F = make_recurrence_op(p).poly([rat(c) for c in f])
    Q = build_Q(spec).op
    if spec.k == 0:
        return Lhat.compose(Q) - Q.compose(F)
    Ltil = Lhat.conjugate_by_ratio(xi_ratio("a", p).inverse())
    return Ltil.compose(Q) - Q.compose(F)
