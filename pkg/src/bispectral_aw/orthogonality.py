"""Extensions orthogonal with respect to a measure on the real line.

Exact part: the two-dimensional polynomial eigenspaces of the conjugated
recurrence operator on special parameter slices, and the factorisation of
the intertwining into elementary Darboux steps.  Numeric part: the
Askey-Wilson weight, Gauss-Chebyshev quadrature for measures with a
rational divisor and point masses, Gram matrices and mass recovery.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from flint import fmpq

from .aw_core import (LambdaPoly, Parameters, SymmetricLaurent, aw_poly,
                      make_conjugated_recurrence_op, make_recurrence_op, xi_ratio)
from .bispectral_n import build_Q, g_eigenpoly
from .errors import DomainError, GenericityError, InternalError, NumericalError, SliceError
from .exact_arith import LaurentPoly, RatFunc, rat, rat_str
from .operators import DiffOpN, opn_apply
from .wronskian_ext import ExtensionSpec, p_hat

__all__ = [
    "Slice",
    "second_solutions",
    "v_solutions",
    "slice_eigenvalue",
    "eigenvalue_of",
    "DarbouxStep",
    "DarbouxChain",
    "darboux_chain",
    "aw_weight",
    "QuadratureConfig",
    "MeasureSpec",
    "inner_product",
    "gram_matrix",
    "OrthogonalityReport",
    "verify_orthogonality",
    "recover_mass",
    "measure_for_spec",
    "divisor_identity",
    "one_mass_example",
    "one_sided_example",
    "two_sided_example",
    "mixed_example",
]


# -- slices with two-dimensional eigenspaces --------------------------------

@dataclass(frozen=True)
class Slice:
    """a = eps q^{alpha + l/2}, d = eps q^{l/2} (after relabelling the parameters)."""

    alpha: int
    l: int
    eps: int = 1

    def check(self, p: Parameters):
        if self.alpha < 1 or self.l < 1 or self.eps not in (1, -1):
            raise SliceError("need alpha, l >= 1 and eps = +1 or -1")
        try:
            a = self.eps * p.qpow(Fraction(2 * self.alpha + self.l, 2))
            d = self.eps * p.qpow(Fraction(self.l, 2))
        except DomainError as exc:
            raise SliceError(str(exc)) from exc
        if p.a != a or p.d != d:
            raise SliceError(
                f"parameters do not lie on the slice: need a = {rat_str(a)}, d = {rat_str(d)}")


def _terminating_t_series(upper_const, lower, length: int, p: Parameters, t_pairs) -> LaurentPoly:
    """sum_{i<=length} prod (u;q)_i prod (t-part;q)_i / ((q;q)_i prod (low;q)_i) q^i.

    ``t_pairs`` are Laurent polynomials f(t) whose q-shifted factorials
    (f;q)_i = prod (1 - f q^s) enter each term.
    """
    q = p.q
    total = LaurentPoly.const(0, "t")
    term = LaurentPoly.const(1, "t")
    for i in range(length + 1):
        total = total + term
        if i == length:
            break
        num = fmpq(1)
        for u in upper_const:
            num *= 1 - u * q**i
        den = 1 - q ** (i + 1)
        for b in lower:
            den *= 1 - b * q**i
        if den == 0:
            raise DomainError("vanishing lower parameter in terminating series")
        for f in t_pairs:
            term = term * (1 - f * q**i)
        term = term * (num * q / den)
    return total


def second_solutions(m: int, sl: Slice, p: Parameters) -> tuple[LambdaPoly, LambdaPoly]:
    """The pair (u1, u2) of polynomial eigenfunctions of the a-conjugated
    recurrence operator with eigenvalue eps (q^{m+l/2} + q^{-m-l/2})."""
    sl.check(p)
    if not 0 <= m < sl.alpha:
        raise SliceError(f"m must lie in 0..{sl.alpha - 1}")
    q = p.q
    a, b, c, d = p.a, p.b, p.c, p.d
    abcd = p.abcd
    t = LaurentPoly({1: 1}, "t")
    ti = LaurentPoly({-1: 1}, "t")
    # first solution: terminates after alpha-1-m terms
    j = sl.alpha - 1 - m
    u1 = _terminating_t_series(
        [q ** (m - sl.alpha + 1), q ** (-m + sl.alpha + 1) / a**2],
        [q**2 / (a * b), q**2 / (a * c), q**2 / (a * d)], j, p,
        [t * q, ti * (q**2 / abcd)])
    # second solution: prefactor times a series terminating after m terms
    L = sl.alpha + sl.l - 1
    pref = LaurentPoly.monomial(-L, 1, "t")
    for s in range(L):
        pref = pref * (1 - t * (b * c * q**s)) * (1 - t * q ** (s + 1))
    series = _terminating_t_series(
        [q ** (m + sl.l), q ** (-m)], [a * d, b * d, c * d], m, p,
        [ti, t * (abcd / q)])
    u2 = pref * series
    out = []
    for f in (u1, u2):
        g = LambdaPoly.from_laurent(f, p, 0)
        if g is None:
            raise InternalError("slice eigenfunction is not a polynomial in lambda")
        out.append(g)
    return out[0], out[1]


def v_solutions(m: int, sl: Slice, p: Parameters) -> tuple[LambdaPoly, LambdaPoly]:
    """The b-based pair: second_solutions with (a, b, c, d) -> (b, a, d, c)."""
    return second_solutions(m, sl, p.permuted("badc"))


def slice_eigenvalue(m: int, sl: Slice, p: Parameters) -> fmpq:
    """2 x_m = eps (q^{m+l/2} + q^{-m-l/2})."""
    s = Fraction(2 * m + sl.l, 2)
    return sl.eps * (p.qpow(s) + 1 / p.qpow(s))


def eigenvalue_of(delta: str, phi: LambdaPoly, p: Parameters) -> fmpq | None:
    """If phi(lambda) is an eigenfunction of the delta-conjugated recurrence
    operator, return the eigenvalue; otherwise None."""
    f = phi.to_laurent(p)
    if f.is_zero():
        return None
    img = make_conjugated_recurrence_op(delta, p).act(f)
    if not img.is_laurent():
        return None
    g = img.num
    e = f.degree()
    ratio = g.coeff(e) / f.coeff(e)
    return ratio if g == f * ratio else None


# -- Darboux chain ----------------------------------------------------------

@dataclass(frozen=True)
class DarbouxStep:
    eigenvalue: fmpq        # 2 x_{m_j}
    P: DiffOpN              # forward: A E + p0
    Q: DiffOpN              # backward: Id - r E^{-1}
    L_before: DiffOpN
    L_after: DiffOpN


@dataclass(frozen=True)
class DarbouxChain:
    steps: tuple[DarbouxStep, ...]
    spec: ExtensionSpec

    @property
    def product(self) -> DiffOpN:
        """Q^(k) ... Q^(1)."""
        p = self.spec.params
        out = DiffOpN.identity(p.q)
        for st in self.steps:
            out = st.Q.compose(out)
        return out

    @property
    def L_final(self) -> DiffOpN:
        if not self.steps:
            return make_recurrence_op(self.spec.params)
        return self.steps[-1].L_after

    def normalization(self) -> RatFunc:
        """Q_tilde^{(0)}: the Wronskian operator is xi^a_n Q_tilde^{(0)}(q^n) times the product."""
        return build_Q(self.spec).op.coeff(0)

    def factorization_ok(self) -> bool:
        for st in self.steps:
            shift = DiffOpN.mult(st.eigenvalue, st.P.q)
            if st.P.compose(st.Q) + shift != st.L_before:
                return False
            if st.Q.compose(st.P) + shift != st.L_after:
                return False
        return True

    def matches_wronskian(self) -> bool:
        Qt = build_Q(self.spec).op
        return Qt == self.product * Qt.coeff(0)

    def L_hat(self) -> DiffOpN:
        """The final operator conjugated into the normalisation of p_hat."""
        p = self.spec.params
        c0 = self.normalization()
        ratio = xi_ratio("a", p) * c0.dilate(p.q) / c0
        return self.L_final.conjugate_by_ratio(ratio)

    def intermediate(self, j: int, n: int):
        """p^{(j)}_n = Q^(j) ... Q^(1) p_n (sequences vanish below 0)."""
        p = self.spec.params
        if j == 0:
            return aw_poly(n, p) if n >= 0 else LaurentPoly.const(0, "z")
        if n < 0:
            return LaurentPoly.const(0, "z")
        return opn_apply(self.steps[j - 1].Q, lambda m: self.intermediate(j - 1, m), n, lower=0)


def darboux_chain(spec: ExtensionSpec) -> DarbouxChain:
    """Factor the intertwining into k elementary Darboux steps at the eigenvalues of the psi_j."""
    p = spec.params
    q = p.q
    L = make_recurrence_op(p)
    eig = []
    for d, phi in spec.choices:
        e = eigenvalue_of(d, phi, p)
        if e is None:
            raise GenericityError(f"phi for delta={d} is not an eigenfunction; no Darboux chain")
        eig.append(e)
    # each psi_j is xi^{delta_j}^{-1} times a rational multiplier; track multipliers
    frames = [xi_ratio(d, p) for d in spec.deltas]
    mults = [RatFunc.of(phi.to_laurent(p), "t") for phi in spec.phis]
    steps = []
    for j in range(spec.k):
        frame_back = frames[j].dilate(1 / q).inverse()  # psi frame ratio F_g / F_{g-1}
        m = mults[j]
        if m.is_zero():
            raise GenericityError("transformed eigenfunction vanishes identically")
        r = frame_back * m / m.dilate(1 / q)
        Qj = DiffOpN({0: 1, -1: -r}, q)
        A = L.coeff(1)
        C = L.coeff(-1)
        Pj = DiffOpN({1: A, 0: -C / r}, q)
        shift = DiffOpN.mult(eig[j], q)
        if Pj.compose(Qj) + shift != L:
            raise GenericityError(f"step {j + 1}: operator minus eigenvalue does not factor")
        L_next = Qj.compose(Pj) + shift
        steps.append(DarbouxStep(eig[j], Pj, Qj, L, L_next))
        # transform the remaining eigenfunctions
        for i in range(j + 1, spec.k):
            fb = frames[i].dilate(1 / q).inverse()
            mi = mults[i]
            mults[i] = mi - r * mi.dilate(1 / q) / fb
        L = L_next
    return DarbouxChain(tuple(steps), spec)


# -- measures and quadrature ------------------------------------------------

def _qpoch_inf(x: complex, q: float, trunc: int) -> complex:
    out = 1.0 + 0j
    qi = 1.0
    for _ in range(trunc):
        out *= 1 - x * qi
        qi *= q
    return out


def aw_weight(x: float, p: Parameters, trunc: int = 64) -> float:
    """(z^2, z^-2; q)_inf / (az, a/z, bz, b/z, cz, c/z, dz, d/z; q)_inf with z = x + i sqrt(1-x^2).

    The truncated products differ from the infinite ones by a relative
    error of order q^trunc (all arguments have modulus at most 1).
    """
    if not -1 < x < 1:
        raise DomainError("weight is evaluated on the open interval (-1, 1)")
    q = float(p.q)
    z = complex(x, math.sqrt(1 - x * x))
    num = _qpoch_inf(z * z, q, trunc) * _qpoch_inf(1 / (z * z), q, trunc)
    den = 1.0 + 0j
    for v in (p.a, p.b, p.c, p.d):
        v = float(v)
        den *= _qpoch_inf(v * z, q, trunc) * _qpoch_inf(v / z, q, trunc)
    w = num / den
    if abs(w.imag) > 1e-12 * max(1.0, abs(w.real)):
        raise NumericalError(f"weight has imaginary residue {w.imag:g} at x={x}")
    return w.real


def _aw_weight_vec(xs: np.ndarray, p: Parameters, trunc: int) -> np.ndarray:
    q = float(p.q)
    z = xs + 1j * np.sqrt(1 - xs * xs)
    qs = q ** np.arange(trunc)
    def poch(v):
        return np.prod(1 - np.outer(v, qs), axis=1)
    num = poch(z * z) * poch(1 / (z * z))
    den = np.ones_like(z)
    for v in (p.a, p.b, p.c, p.d):
        v = float(v)
        den = den * poch(v * z) * poch(v / z)
    w = num / den
    if np.any(np.abs(w.imag) > 1e-12 * np.maximum(1.0, np.abs(w.real))):
        raise NumericalError("weight has a non-negligible imaginary part")
    return w.real


@dataclass(frozen=True)
class QuadratureConfig:
    nodes: tuple[int, ...] = (256, 512, 1024)
    trunc: int = 64
    tol: float = 1e-10

    def check(self, p: Parameters):
        need = math.ceil(math.log(self.tol) / math.log(float(p.q)))
        if self.trunc < need:
            raise DomainError(f"product truncation {self.trunc} too short for tolerance; need {need}")


@dataclass(frozen=True)
class MeasureSpec:
    """w dx / (2 pi sqrt(1-x^2) prod (x - x_m)) times ``scale``, plus point masses."""

    params: Parameters
    divisor_roots: tuple = ()
    masses: tuple = ()  # pairs (x, nu)
    scale: float = 1.0

    def __post_init__(self):
        p = self.params
        if max(abs(p.a), abs(p.b), abs(p.c), abs(p.d)) >= 1:
            raise DomainError("measure needs |a|, |b|, |c|, |d| < 1")
        for x in self.divisor_roots:
            if -1 <= float(x) <= 1:
                raise DomainError("divisor root inside [-1, 1]")

    def with_masses(self, masses) -> "MeasureSpec":
        return MeasureSpec(self.params, self.divisor_roots, tuple(masses), self.scale)

    def to_json(self) -> dict:
        return {
            "params": self.params.to_json(),
            "divisor_roots": [rat_str(rat(x)) for x in self.divisor_roots],
            "masses": [{"x": rat_str(rat(x)), "nu": float(nu)} for x, nu in self.masses],
            "scale": float(self.scale),
        }

    @classmethod
    def from_json(cls, data: dict, m_max: int = 64) -> "MeasureSpec":
        return cls(Parameters.from_json(data["params"], m_max),
                   tuple(rat(x) for x in data.get("divisor_roots", [])),
                   tuple((rat(m["x"]), float(m["nu"])) for m in data.get("masses", [])),
                   float(data.get("scale", 1.0)))


def _cheb_eval(f: LaurentPoly, xs):
    if not isinstance(f, SymmetricLaurent):
        f = SymmetricLaurent.of(f)
    cs = [float(c) for c in f.cheb_coeffs()]
    return np.polynomial.chebyshev.chebval(xs, cs)


def _continuous_part(fs: Sequence, gs: Sequence, m: MeasureSpec, N: int, trunc: int) -> np.ndarray:
    k = np.arange(1, N + 1)
    xs = np.cos((2 * k - 1) * np.pi / (2 * N))
    w = _aw_weight_vec(xs, m.params, trunc)
    for r in m.divisor_roots:
        w = w / (xs - float(r))
    w = w * (m.scale / (2 * N))
    F = np.array([_cheb_eval(f, xs) for f in fs])
    G = np.array([_cheb_eval(g, xs) for g in gs])
    return (F * w) @ G.T


def _discrete_part(fs, gs, m: MeasureSpec) -> np.ndarray:
    out = np.zeros((len(fs), len(gs)))
    for x, nu in m.masses:
        xf = float(x)
        fv = np.array([_cheb_eval(f, xf) for f in fs])
        gv = np.array([_cheb_eval(g, xf) for g in gs])
        out += float(nu) * np.outer(fv, gv)
    return out


def _converged(fs, gs, m: MeasureSpec, quad: QuadratureConfig) -> tuple[np.ndarray, int]:
    quad.check(m.params)
    prev = None
    for N in quad.nodes:
        cur = _continuous_part(fs, gs, m, N, quad.trunc)
        if prev is not None:
            scale = max(1.0, float(np.max(np.abs(cur))))
            if float(np.max(np.abs(cur - prev))) <= quad.tol * scale:
                return cur, N
        prev = cur
    raise NumericalError("quadrature did not converge across the configured node counts")


def inner_product(f, g, m: MeasureSpec, quad: QuadratureConfig = QuadratureConfig()) -> float:
    cont, _ = _converged([f], [g], m, quad)
    return float(cont[0, 0] + _discrete_part([f], [g], m)[0, 0])


def gram_matrix(polys: Sequence, m: MeasureSpec, quad: QuadratureConfig = QuadratureConfig()):
    cont, N = _converged(polys, polys, m, quad)
    return cont + _discrete_part(polys, polys, m), N


@dataclass
class OrthogonalityReport:
    gram: list
    max_rel_offdiag: float
    passed: bool
    tol: float
    nodes: int
    masses: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "gram": self.gram,
            "max_rel_offdiag": self.max_rel_offdiag,
            "passed": self.passed,
            "tol": self.tol,
            "nodes": self.nodes,
            "masses": [{"x": rat_str(rat(x)), "nu": float(nu)} for x, nu in self.masses],
        }


def verify_orthogonality(spec: ExtensionSpec, m: MeasureSpec, n_max: int, tol: float = 1e-8,
                         quad: QuadratureConfig = QuadratureConfig()) -> OrthogonalityReport:
    polys = [p_hat(n, spec) for n in range(n_max + 1)]
    G, N = gram_matrix(polys, m, quad)
    worst = 0.0
    for i in range(n_max + 1):
        for j in range(n_max + 1):
            if i == j:
                continue
            scale = math.sqrt(abs(G[i, i] * G[j, j]))
            if scale == 0:
                worst = math.inf
                continue
            worst = max(worst, abs(G[i, j]) / scale)
    return OrthogonalityReport(G.tolist(), worst, worst < tol, tol, N, list(m.masses))


def recover_mass(spec: ExtensionSpec, m: MeasureSpec, locations: Sequence,
                 quad: QuadratureConfig = QuadratureConfig()) -> list[tuple]:
    """Masses nu_j at the given locations making p_hat_1..p_hat_k orthogonal to 1."""
    k = len(locations)
    if k == 0:
        return []
    polys = [p_hat(i, spec) for i in range(1, k + 1)]
    one = LaurentPoly.const(1, "z")
    cont, _ = _converged(polys, [one], m.with_masses(()), quad)
    A = np.array([[float(_cheb_eval(f, float(x))) for x in locations] for f in polys])
    rhs = -cont[:, 0]
    if abs(np.linalg.det(A)) < 1e-300 or np.linalg.cond(A) > 1e14:
        raise GenericityError("mass system is singular")
    nu = np.linalg.solve(A, rhs)
    return [(rat(x), float(v)) for x, v in zip(locations, nu)]


def measure_for_spec(spec: ExtensionSpec) -> tuple[MeasureSpec, list]:
    """Divisor and mass locations x_j = (eigenvalue_j)/2 for an eigenfunction-based spec."""
    p = spec.params
    locs = []
    for d, phi in spec.choices:
        e = eigenvalue_of(d, phi, p)
        if e is None:
            raise GenericityError("choice is not an eigenfunction; no orthogonality measure")
        locs.append(e / 2)
    return MeasureSpec(p, tuple(locs), ()), locs


def divisor_identity(sl: Slice, p: Parameters, n_max: int = 3,
                     quad: QuadratureConfig = QuadratureConfig()) -> float:
    """Largest relative gap between two evaluations of the same Gram matrix.

    With a = d q^alpha, (az, a/z; q)_inf differs from (dz, d/z; q)_inf by the
    factors (1 - 2 e_i x + e_i^2) = -2 e_i (x - x_i), e_i = d q^i, i < alpha.
    So the weight for a divided by prod (x - x_i) is prod(-2 e_i) times the
    weight with a replaced by d.
    """
    sl.check(p)
    es = [p.d * p.q**i for i in range(sl.alpha)]
    roots = tuple((e + 1 / e) / 2 for e in es)
    scale = 1.0
    for e in es:
        scale *= -2 * float(e)
    divided = MeasureSpec(p, roots)
    # only the weight is evaluated, so recurrence denominators are irrelevant here
    lowered = MeasureSpec(Parameters(p.q, p.d, p.b, p.c, p.d, m_max=0), (), (), scale)
    polys = [aw_poly(n, p) for n in range(n_max + 1)]
    G1, _ = gram_matrix(polys, divided, quad)
    G2, _ = gram_matrix(polys, lowered, quad)
    return float(np.max(np.abs(G1 - G2)) / max(1e-300, float(np.max(np.abs(G1)))))


# -- worked configurations --------------------------------------------------

def _span(u1: LambdaPoly, u2: LambdaPoly, nu) -> LambdaPoly:
    return u1 + u2 * rat(nu)


def one_mass_example(q="1/4", b="1/3", c="-1/5", nu_prime="1/2") -> ExtensionSpec:
    """eps = alpha = l = 1: a = q^{3/2}, d = q^{1/2}, phi = u1 + nu' u2 with m = 0."""
    q = rat(q)
    r = q.sqrt()
    p = Parameters(q, q * r, rat(b), rat(c), r)
    sl = Slice(1, 1, 1)
    u1, u2 = second_solutions(0, sl, p)
    return ExtensionSpec(p, (("a", _span(u1, u2, nu_prime)),), label="one-mass")


def one_sided_example(q="1/4", b="1/3", c="-1/5", nus=("1/2", "-2/3")) -> ExtensionSpec:
    """alpha = 2, l = 1: two masses to the right of the interval (m = 0, 1)."""
    q = rat(q)
    r = q.sqrt()
    p = Parameters(q, q**2 * r, rat(b), rat(c), r)
    sl = Slice(2, 1, 1)
    choices = []
    for m, nu in zip((0, 1), nus):
        u1, u2 = second_solutions(m, sl, p)
        choices.append(("a", _span(u1, u2, nu)))
    return ExtensionSpec(p, tuple(choices), label="one-sided")


def two_sided_example(q="1/4", alpha: int = 2, l: int = 1, beta: int = 1, t: int = 1,
                      ms=(0, 0), nus=("1/2", "1/3")) -> ExtensionSpec:
    """a = q^{alpha+l/2}, b = -q^{beta+t/2}, c = -q^{t/2}, d = q^{l/2}: one mass on
    each side of the interval.

    abcd = q^{alpha+beta+l+t}, so parameter validation can only exclude
    abcd q^m = 1 for |m| below that exponent.  With alpha = beta = l = t = 1
    the nondegeneracy conditions fail at n = -1 and n = 0 for every choice
    of the free parameters, hence the defaults.
    """
    q = rat(q)
    p = Parameters(q, q**alpha * q.sqrt()**l, -(q**beta) * q.sqrt()**t, -(q.sqrt()**t),
                   q.sqrt()**l, m_max=alpha + beta + l + t - 1)
    u1, u2 = second_solutions(ms[0], Slice(alpha, l, 1), p)
    v1, v2 = v_solutions(ms[1], Slice(beta, t, -1), p)
    return ExtensionSpec(p, (("a", _span(u1, u2, nus[0])), ("b", _span(v1, v2, nus[1]))),
                         label="two-sided")


def mixed_example(q="1/4", b="1/3", c="-1/5", nu_prime="1/2", ell: str = "b",
                  j: int = 0) -> ExtensionSpec:
    """A free-parameter slice choice (alpha = 2, l = 1, m = 0) combined with the
    parameter-free eigenpolynomial g^ell_j.

    On the alpha = l = 1 slice every such mix with ell in {b, c} violates
    the nondegeneracy conditions at n = 0, so the wider slice is used.
    """
    q = rat(q)
    r = q.sqrt()
    p = Parameters(q, q**2 * r, rat(b), rat(c), r)
    u1, u2 = second_solutions(0, Slice(2, 1, 1), p)
    g = g_eigenpoly(ell, j, p)
    return ExtensionSpec(p, (("a", _span(u1, u2, nu_prime)), (ell, g)), label="mixed")
