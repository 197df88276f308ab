"""q-difference operators in z for the extended polynomials.

Covers the algebra A_n of admissible eigenvalue polynomials, discrete
integrals and the Reach-type Casoratian identity, the operators B_bar
attached to a Laurent polynomial r, and the construction of B_hat^h by
solving for its coefficients and verifying the result exactly.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from flint import fmpq, fmpq_mat, fmpq_poly

from .aw_core import (LambdaPoly, Parameters, lambda_sym, make_aw_qdiff_op,
                      make_contiguous_qdiff_op, peel, xi)
from .errors import (DomainError, InternalError, NotInAlgebraError, OrderBoundExceeded)
from .exact_arith import LaurentPoly, RatFunc, linsolve, NoSolution, poly_det, rat
from .operators import QDiffOpZ, opz_apply
from .wronskian_ext import ExtensionSpec, certify, p_hat, tau

log = logging.getLogger(__name__)

__all__ = [
    "discrete_integral",
    "wronskian",
    "reach_F",
    "reach_rhs",
    "cofactor_relation",
    "an_membership",
    "AnMembership",
    "an_generators",
    "an_member_from_integral",
    "semigroup_generators",
    "eps_factor",
    "split_symmetric",
    "build_rbar_op",
    "rbar_residual",
    "BhResult",
    "build_Bh",
    "verify_Bh",
]


# -- discrete calculus ------------------------------------------------------

def discrete_integral(f: Callable[[int], object], m: int, n: int):
    """Signed sum: f(m+1)+...+f(n) for n > m, 0 for n = m, minus f(n+1)+...+f(m) for n < m."""
    acc = fmpq(0)
    if n > m:
        for s in range(m + 1, n + 1):
            acc = acc + f(s)
    elif n < m:
        for s in range(n + 1, m + 1):
            acc = acc - f(s)
    return acc


def wronskian(fs: Sequence[Callable[[int], object]], n: int):
    """det [f_j(n - i)] for i = 0..m-1 (the discrete Wronskian)."""
    m = len(fs)
    if m == 0:
        return fmpq(1)
    return poly_det([[f(n - i) for f in fs] for i in range(m)])


def _omit(fs, j):
    return [f for i, f in enumerate(fs) if i != j]


def reach_F(fs: Sequence[Callable[[int], object]], lowers: Sequence[int], n: int):
    """F_n built from f^(0), ..., f^(k+1) with lower limits n_1..n_{k+1}.

    ``fs[0]`` is f^(0); ``lowers[j-1]`` is the lower limit for column j.
    """
    f0, cols = fs[0], list(fs[1:])
    k = len(cols) - 1
    if len(lowers) != k + 1:
        raise ValueError("need one lower limit per column")
    acc = fmpq(0)
    for j in range(1, k + 2):
        rest = _omit(cols, j - 1)
        integral = discrete_integral(lambda s: f0(s) * wronskian(rest, s), lowers[j - 1], n)
        sign = 1 if (k + 1 + j) % 2 == 0 else -1
        acc = acc + cols[j - 1](n) * integral * sign
    return acc


def reach_rhs(fs: Sequence[Callable[[int], object]], lowers: Sequence[int], n: int):
    """Right side of the Reach identity: [integral of f0 Wr(f1..fk)] * Wr(f1..f_{k+1})."""
    f0, cols = fs[0], list(fs[1:])
    k = len(cols) - 1
    integral = discrete_integral(lambda s: f0(s) * wronskian(cols[:k], s), lowers[k], n - 1)
    return integral * wronskian(cols, n)


def reach_lhs(fs: Sequence[Callable[[int], object]], lowers: Sequence[int], n: int):
    cols = list(fs[1:])
    k = len(cols) - 1
    F = lambda m: reach_F(fs, lowers, m)
    return wronskian(cols[:k] + [F], n)


def cofactor_relation(cols: Sequence[Callable[[int], object]], n: int, l: int):
    """sum_j (-1)^{k+1+j} f_j(n-l) Wr(f omitting j)(n); zero for l = 0..k-1."""
    k = len(cols) - 1
    acc = fmpq(0)
    for j in range(1, k + 2):
        sign = 1 if (k + 1 + j) % 2 == 0 else -1
        acc = acc + cols[j - 1](n - l) * wronskian(_omit(cols, j - 1), n) * sign
    return acc


__all__.append("reach_lhs")


# -- the algebra A_n --------------------------------------------------------

def _half_shift(spec: ExtensionSpec) -> Fraction:
    return Fraction(-spec.k, 2)


def eps_factor(k: int, p: Parameters) -> LaurentPoly:
    """1 if k = 0, 1 mod 4, otherwise lambda_{n-k/2+1} - lambda_{n-k/2}."""
    if k % 4 in (0, 1):
        return LaurentPoly.const(1, "t")
    s = Fraction(-k, 2)
    return lambda_sym(p, s + 1) - lambda_sym(p, s)


def _difference(h: LambdaPoly, p: Parameters) -> LaurentPoly:
    """h(lambda_{n+s}) - h(lambda_{n+s-1}) as a Laurent polynomial in t."""
    return h.to_laurent(p) - LambdaPoly(h.coeffs, h.shift - 1).to_laurent(p)


def _tau_prev(spec: ExtensionSpec) -> LaurentPoly:
    return tau(spec).tau.dilate(1 / spec.params.q)


@dataclass(frozen=True)
class AnMembership:
    member: bool
    quotient: LaurentPoly | None = None

    def __bool__(self):
        return self.member


def _as_lambda(h, spec: ExtensionSpec) -> LambdaPoly:
    if not isinstance(h, LambdaPoly):
        h = LambdaPoly(h, _half_shift(spec))
    if h.shift != _half_shift(spec) and not h.is_zero():
        raise DomainError(f"h must be written in lambda_(n-k/2); got shift {h.shift}")
    return h


def an_membership(h, spec: ExtensionSpec) -> AnMembership:
    """h(lambda_{n-k/2}) - h(lambda_{n-k/2-1}) divisible by tau_{n-1}?"""
    h = _as_lambda(h, spec)
    if h.is_zero():
        return AnMembership(True, LaurentPoly.const(0, "t"))
    diff = _difference(h, spec.params)
    quo = diff.divexact(_tau_prev(spec))
    return AnMembership(quo is not None, quo)


def _poly_part(f: LaurentPoly, lift: int) -> fmpq_poly:
    """t**lift * f as an ordinary polynomial (lift must clear negative powers)."""
    if f.is_zero():
        return fmpq_poly(0)
    if f.val + lift < 0:
        raise InternalError("lift too small")
    return f.poly.left_shift(f.val + lift)


def an_generators(spec: ExtensionSpec, max_degree: int) -> dict[int, LambdaPoly]:
    """One member of A_n of each achievable degree 1..max_degree (monic, zero
    constant term), found by exact linear algebra on remainders modulo tau_{n-1}."""
    p = spec.params
    s = _half_shift(spec)
    T = _tau_prev(spec)
    out: dict[int, LambdaPoly] = {}
    if T.is_constant():
        for d in range(1, max_degree + 1):
            out[d] = LambdaPoly([0] * d + [1], s)
        return out
    # a monomial factor of T is a unit; divide polynomial parts
    Tp = T.poly
    diffs = [_difference(LambdaPoly([0] * i + [1], s), p) for i in range(max_degree + 1)]
    lift = max([0] + [-f.val for f in diffs if not f.is_zero()])
    rems = [divmod(_poly_part(f, lift), Tp)[1] if not f.is_zero() else fmpq_poly(0) for f in diffs]
    width = Tp.degree()
    vec = lambda r: [r.coeffs()[e] if e < len(r.coeffs()) else fmpq(0) for e in range(width)]
    for d in range(1, max_degree + 1):
        cols = [vec(rems[i]) for i in range(1, d)]
        rhs = [-c for c in vec(rems[d])]
        if d == 1:
            if all(c == 0 for c in rhs):
                out[d] = LambdaPoly([0, 1], s)
            continue
        m = [[cols[i][e] for i in range(d - 1)] for e in range(width)]
        sol = linsolve(m, rhs)
        if isinstance(sol, NoSolution):
            continue
        out[d] = LambdaPoly([0] + list(sol.particular) + [1], s)
    return out


def semigroup_generators(degrees) -> list[int]:
    """Minimal generators of the additive semigroup spanned by ``degrees``."""
    gens: list[int] = []
    reach = {0}
    for d in sorted(set(degrees)):
        if d <= 0:
            continue
        if d not in reach:
            gens.append(d)
        # extend the set of sums up to the largest degree
        top = max(degrees)
        frontier = set(reach)
        for g in gens:
            for x in list(frontier):
                y = x + g
                while y <= top:
                    frontier.add(y)
                    y += g
        reach = frontier
    return gens


def an_member_from_integral(g, spec: ExtensionSpec) -> LambdaPoly:
    """The member of A_n given by summing eps^(k+2)_s g(lambda_{s-(k+1)/2}) tau_{s-1}
    from s = 1 to n (so its value at n = 0 is zero)."""
    p = spec.params
    k = spec.k
    if not isinstance(g, LambdaPoly):
        g = LambdaPoly(g, Fraction(-(k + 1), 2))
    summand = eps_factor(k + 2, p) * g.to_laurent(p) * _tau_prev(spec)
    q = p.q
    terms = {}
    for e, c in summand.terms.items():
        if e == 0:
            raise InternalError("summand has a constant term; its antidifference is not Laurent")
        terms[e] = c / (1 - q ** (-e))
    H = LaurentPoly(terms, "t")
    H = H - H.evaluate(fmpq(1))
    out = LambdaPoly.from_laurent(H, p, _half_shift(spec))
    if out is None:
        raise InternalError("antidifference is not a polynomial in lambda_(n-k/2)")
    return out


# -- auxiliary operators B_bar -----------------------------------------------

def split_symmetric(r: LaurentPoly, p: Parameters) -> tuple[list[fmpq], list[fmpq]]:
    """r = R1 + R2 * r0 with R1, R2 polynomials in R = t + q^2/(abcd t).

    Returns the coefficient lists of R1 and R2 in powers of R.
    """
    c = p.q**2 / p.abcd
    Ir = r.subs_monomial(c, -1) if not r.is_zero() else r
    base = LaurentPoly({1: 1, -1: c}, "t")
    r0 = LaurentPoly({1: 1, -1: -c}, "t")
    R1 = (r + Ir) * fmpq(1, 2)
    skew = (r - Ir) * fmpq(1, 2)
    R2 = skew.divexact(r0) if not skew.is_zero() else skew
    if R2 is None:
        raise InternalError("antisymmetric part is not divisible by r0")
    c1 = peel(R1, base)
    c2 = peel(R2, base)
    if c1 is None or c2 is None:
        raise InternalError("symmetric part is not a polynomial in R")
    return c1, c2


def build_rbar_op(ell: str, r, p: Parameters) -> QDiffOpZ:
    """Operator B_bar with  r(t) xi_n p_n - r(q^2/(abcd t)) xi_{n-1} p_{n-1}
    = B_bar [xi_n p_n - xi_{n-1} p_{n-1}]  (xi = xi^ell)."""
    if not isinstance(r, LaurentPoly):
        r = LaurentPoly.const(rat(r), "t")
    q = p.q
    abcd = p.abcd
    B = make_aw_qdiff_op(p)
    Br0 = make_contiguous_qdiff_op(ell, p) * (-q / abcd)
    BR = (B * (2 * q**2 / (abcd * (1 + q))) + Br0 * ((1 - q) / (1 + q))
          + QDiffOpZ.mult(2 * q * (abcd + q) / (abcd * (1 + q)), q))
    c1, c2 = split_symmetric(r, p)
    out = BR.poly(c1) if c1 else QDiffOpZ({}, q)
    if c2:
        out = out + Br0.compose(BR.poly(c2))
    return out


def rbar_residual(B: QDiffOpZ, ell: str, r, p: Parameters, n: int):
    """Left minus right side of the B_bar relation at degree n (a Laurent polynomial in z)."""
    from .aw_core import aw_poly
    if not isinstance(r, LaurentPoly):
        r = LaurentPoly.const(rat(r), "t")
    t = p.q**n
    c = p.q**2 / p.abcd
    cur = aw_poly(n, p) * xi(ell, n, p)
    prev = aw_poly(n - 1, p) * xi(ell, n - 1, p) if n >= 1 else LaurentPoly.const(0, "z")
    lhs = cur * r.evaluate(t) - prev * r.evaluate(c / t)
    rhs = opz_apply(B, cur - prev)
    return RatFunc.of(lhs, "z") - RatFunc.of(rhs, "z")


# -- B_hat by solve and verify ---------------------------------------------

@dataclass
class BhResult:
    op: QDiffOpZ
    h: LambdaPoly
    order: int
    fit_range: tuple[int, int]
    verified_range: tuple[int, int]
    escalations: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "operator": self.op.to_json(),
            "h": self.h.to_json(),
            "order": self.order,
            "fit_range": list(self.fit_range),
            "verified_range": list(self.verified_range),
            "escalations": list(self.escalations),
        }


def _sample_points(count: int, avoid: Callable[[fmpq], bool]):
    out = []
    s = 0
    while len(out) < count:
        z0 = fmpq(2 * s + 7, s + 3)
        s += 1
        if avoid(z0):
            continue
        out.append(z0)
    return out


def _pointwise(z0: fmpq, M: int, ns: range, vals, hn, q: fmpq):
    """Solve sum_i c_i p_hat_n(q^i z0) = h_n p_hat_n(z0) for the 2M+1 values c_i."""
    rows = []
    rhs = []
    for n in ns:
        f = vals[n]
        rows.append([f.evaluate(z0 * q**i) for i in range(-M, M + 1)])
        rhs.append(hn[n] * f.evaluate(z0))
    A = fmpq_mat(rows)
    b = fmpq_mat([[x] for x in rhs])
    aug = fmpq_mat([r + [x] for r, x in zip(rows, rhs)])
    rk = A.rank()
    if rk < 2 * M + 1:
        return "degenerate"
    if aug.rank() > rk:
        return None
    # full column rank: solve the square subsystem of independent rows
    pick = []
    sub = []
    for idx, r in enumerate(rows):
        trial = fmpq_mat(sub + [r])
        if trial.rank() == len(sub) + 1:
            sub.append(r)
            pick.append(idx)
        if len(sub) == 2 * M + 1:
            break
    x = fmpq_mat(sub).solve(fmpq_mat([[rhs[i]] for i in pick]))
    return [x[i, 0] for i in range(2 * M + 1)]


def _candidate_den(E: int, mult: int, q: fmpq) -> fmpq_poly:
    d = fmpq_poly([1])
    for e in range(-E, E + 1):
        d *= fmpq_poly([1, 0, -q**e]) ** mult
    return d


def _interpolate(xs, ys) -> fmpq_poly:
    n = len(xs)
    V = fmpq_mat([[x**j for j in range(n)] for x in xs])
    c = V.solve(fmpq_mat([[y] for y in ys]))
    return fmpq_poly([c[j, 0] for j in range(n)])


def verify_Bh(op: QDiffOpZ, h: LambdaPoly, spec: ExtensionSpec, ns) -> dict[int, bool]:
    """Exact eigen-relation check B p_hat_n == h(lambda_{n-k/2}) p_hat_n for each n."""
    p = spec.params
    out = {}
    for n in ns:
        f = p_hat(n, spec)
        lhs = op.act(f)
        out[n] = lhs == RatFunc.of(f * h(n, p), "z")
    return out


def build_Bh(h, spec: ExtensionSpec, order_cap: int | None = None, n_test: int = 10,
             check_membership: bool = True) -> BhResult:
    """q-difference operator with B p_hat_n = h(lambda_{n-k/2}) p_hat_n.

    The ansatz has support [-M, M] with M = deg h.  At each sample point z0
    the coefficient values solve an overdetermined linear system; each
    coefficient is then recovered as an interpolated numerator over a
    product of factors (1 - q^e z^2), checked at extra points, and the
    final operator is verified exactly on n_test further degrees.
    """
    h = _as_lambda(h, spec)
    p = spec.params
    q = p.q
    if check_membership and not an_membership(h, spec):
        raise NotInAlgebraError("h is not in the eigenvalue algebra")
    certify(spec)
    if h.degree <= 0:
        c = h.coeffs[0] if h.coeffs else fmpq(0)
        op = QDiffOpZ.mult(c, q)
        return BhResult(op, h, 0, (0, 0), (0, n_test), [])
    M0 = h.degree
    cap = order_cap if order_cap is not None else 2 * M0 + 2
    log_notes: list[str] = []
    M = M0
    while 2 * M <= cap:
        res = _try_order(h, spec, M, n_test)
        if res is not None:
            res.escalations = log_notes
            return res
        note = f"no operator of order {2 * M} found; retrying with order {2 * M + 2}"
        log.warning(note)
        log_notes.append(note)
        M += 1
    raise OrderBoundExceeded(f"no operator of order <= {cap} satisfies the eigen-relation")


def _try_order(h: LambdaPoly, spec: ExtensionSpec, M: int, n_test: int) -> BhResult | None:
    p = spec.params
    q = p.q
    k = spec.k
    N = 4 * M + 2
    ns = range(0, N + 1)
    vals = {n: p_hat(n, spec) for n in ns}
    hn = {n: h(n, p) for n in ns}
    E = 2 * M + k + 1
    for mult in (1, 2, M + 1):
        den = _candidate_den(E, mult, q)
        deg_num = den.degree() + 2
        need = deg_num + 1 + 4

        def bad(z0):
            return den(z0) == 0 or any((z0 * q**i) ** 2 == 1 or (z0 * q**i) == 0
                                       for i in range(-M - 1, M + 2))

        pts = []
        samples = []
        s_try = _sample_points(need + 8, bad)
        for z0 in s_try:
            sol = _pointwise(z0, M, ns, vals, hn, q)
            if sol is None:
                return None  # inconsistent: no operator of this order
            if sol == "degenerate":
                continue
            pts.append(z0)
            samples.append(sol)
            if len(pts) == need:
                break
        if len(pts) < need:
            raise InternalError("could not find enough nondegenerate sample points")
        fit, extra = pts[:deg_num + 1], pts[deg_num + 1:]
        coeffs = {}
        ok = True
        for idx, i in enumerate(range(-M, M + 1)):
            ys = [samples[s][idx] * den(pts[s]) for s in range(deg_num + 1)]
            num = _interpolate(fit, ys)
            for s in range(deg_num + 1, len(pts)):
                if num(pts[s]) != samples[s][idx] * den(pts[s]):
                    ok = False
                    break
            if not ok:
                break
            coeffs[i] = RatFunc(LaurentPoly._make("z", 0, num) if not num.is_zero()
                                else LaurentPoly.const(0, "z"),
                                LaurentPoly._make("z", 0, den))
        if not ok:
            log.info("denominator multiplicity %d too small; widening", mult)
            continue
        op = QDiffOpZ(coeffs, q)
        checks = verify_Bh(op, h, spec, range(N + 1, N + 1 + n_test))
        if not all(checks.values()):
            continue
        return BhResult(op, h, op.order, (0, N), (N + 1, N + n_test))
    return None
