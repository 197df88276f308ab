"""Askey-Wilson polynomials and their operators in n and in z."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

from flint import fmpq

from .errors import DomainError, InternalError
from .exact_arith import LaurentPoly, RatFunc, rat, rat_str, substitute
from .operators import DiffOpN, QDiffOpZ

__all__ = [
    "Parameters",
    "SymmetricLaurent",
    "LambdaPoly",
    "qpochhammer",
    "phi43_terminating",
    "aw_poly",
    "lambda_n",
    "lambda_sym",
    "xi",
    "xi_ratio",
    "xi_shift_ratio",
    "make_recurrence_op",
    "make_conjugated_recurrence_op",
    "make_aw_qdiff_op",
    "make_contiguous_qdiff_op",
    "random_parameters",
    "peel",
    "is_half_power_of_q",
]

_ROLES = {"a": "abcd", "b": "bcda", "c": "cdab", "d": "dabc"}


def _half(sigma) -> Fraction:
    s = Fraction(sigma)
    if (2 * s).denominator != 1:
        raise DomainError(f"shift {sigma} is not a half-integer")
    return s


@dataclass(frozen=True)
class Parameters:
    """q and the four Askey-Wilson parameters, all exact rationals."""

    q: fmpq
    a: fmpq
    b: fmpq
    c: fmpq
    d: fmpq
    m_max: int = field(default=64, compare=False)

    def __post_init__(self):
        for name in "qabcd":
            object.__setattr__(self, name, rat(getattr(self, name)))
        if not (0 < self.q < 1):
            raise DomainError("q must lie in (0, 1)")
        for name in "abcd":
            if getattr(self, name) == 0:
                raise DomainError(f"parameter {name} must be nonzero")
        abcd = self.abcd
        for m in range(-self.m_max, self.m_max + 1):
            if abcd * self.q**m == 1:
                raise DomainError(f"abcd*q^{m} = 1 makes recurrence denominators vanish")

    @property
    def abcd(self) -> fmpq:
        return self.a * self.b * self.c * self.d

    @property
    def s(self) -> fmpq:
        return self.a + self.b + self.c + self.d

    @property
    def s_prime(self) -> fmpq:
        return 1 / self.a + 1 / self.b + 1 / self.c + 1 / self.d

    @property
    def sqrt_q(self) -> fmpq | None:
        try:
            return self.q.sqrt()
        except Exception:
            return None

    def qpow(self, sigma) -> fmpq:
        """q**sigma for sigma in (1/2)Z, exactly."""
        s = _half(sigma)
        if s.denominator == 1:
            return self.q ** int(s)
        r = self.sqrt_q
        if r is None:
            raise DomainError("half-integer power of q requires q to be a rational square")
        return r ** int(2 * s)

    def value(self, name: str) -> fmpq:
        return getattr(self, name)

    def roles(self, ell: str) -> tuple[fmpq, fmpq, fmpq, fmpq]:
        """Parameters reordered so that ``ell`` comes first (cyclic substitution)."""
        if ell not in _ROLES:
            raise ValueError(f"unknown parameter {ell!r}")
        return tuple(getattr(self, x) for x in _ROLES[ell])

    def for_ell(self, ell: str) -> "Parameters":
        a, b, c, d = self.roles(ell)
        return Parameters(self.q, a, b, c, d, self.m_max)

    def permuted(self, order: str) -> "Parameters":
        vals = [getattr(self, x) for x in order]
        return Parameters(self.q, *vals, m_max=self.m_max)

    def to_json(self) -> dict:
        return {k: rat_str(getattr(self, k)) for k in "qabcd"}

    @classmethod
    def from_json(cls, data: dict, m_max: int = 64) -> "Parameters":
        return cls(*(rat(data[k]) for k in "qabcd"), m_max=m_max)


def is_half_power_of_q(x, p: Parameters, bound: int | None = None, signed: bool = True) -> bool:
    """True if x = (+/-) q**(j/2) for some |j| <= 2*bound (only integer j when sqrt q is irrational)."""
    x = rat(x)
    bound = p.m_max if bound is None else bound
    r = p.sqrt_q
    base = r if r is not None else p.q
    top = 2 * bound if r is not None else bound
    cands = {x, -x} if signed else {x}
    for j in range(-top, top + 1):
        if base**j in cands:
            return True
    return False


# -- symmetric Laurent polynomials -----------------------------------------

class SymmetricLaurent(LaurentPoly):
    """A Laurent polynomial in z invariant under z -> 1/z."""

    __slots__ = ()

    @classmethod
    def of(cls, f: LaurentPoly) -> "SymmetricLaurent":
        if not f.is_zero():
            if f.invert_var() != f:
                raise DomainError("Laurent polynomial is not symmetric under z -> 1/z")
        obj = cls.__new__(cls)
        obj.var, obj.val, obj.poly = f.var, f.val, f.poly
        return obj

    def cheb_coeffs(self) -> list[fmpq]:
        """Coefficients in T_m(x), using z**m + z**-m = 2 T_m(x)."""
        if self.is_zero():
            return [fmpq(0)]
        deg = self.degree()
        return [self.coeff(0)] + [2 * self.coeff(m) for m in range(1, deg + 1)]


# -- polynomials in lambda --------------------------------------------------

def lambda_sym(p: Parameters, sigma=0) -> LaurentPoly:
    """lambda_{n+sigma} as a Laurent polynomial of t = q**n."""
    s = _half(sigma)
    q = p.q
    abcd_q = p.abcd / q
    return LaurentPoly(
        {-1: 1 / p.qpow(s), 0: -(1 + abcd_q), 1: abcd_q * p.qpow(s)}, "t")


def lambda_n(n_or_t, p: Parameters):
    """lambda_n at an integer (or half-integer) index, or with t replaced by a
    Laurent polynomial / rational function image."""
    if isinstance(n_or_t, (LaurentPoly, RatFunc)):
        return substitute(RatFunc.of(lambda_sym(p)), RatFunc.of(n_or_t))
    if isinstance(n_or_t, str) and n_or_t == "t":
        return RatFunc.of(lambda_sym(p))
    s = _half(n_or_t)
    qn = p.qpow(s)
    return (1 / qn - 1) * (1 - p.abcd * qn / p.q)


def peel(f: LaurentPoly, base: LaurentPoly) -> list[fmpq] | None:
    """Write f as a polynomial in ``base`` (a Laurent polynomial with exponents
    -1, 0, 1 and nonzero top coefficient).  Returns None if impossible."""
    if f.is_zero():
        return []
    top = base.coeff(1)
    d = f.degree()
    if d < 0 or f.valuation() != -d:
        return None
    powers = [LaurentPoly.const(1, f.var)]
    for _ in range(d):
        powers.append(powers[-1] * base)
    coeffs = [fmpq(0)] * (d + 1)
    rem = f
    for i in range(d, -1, -1):
        if rem.is_zero():
            break
        c = rem.coeff(i) / top**i
        coeffs[i] = c
        rem = rem - powers[i] * c
    if not rem.is_zero():
        return None
    return coeffs


class LambdaPoly:
    """h(lambda_{n+shift}) for a polynomial h with rational coefficients."""

    __slots__ = ("coeffs", "shift")

    def __init__(self, coeffs: Iterable, shift=0):
        cs = [rat(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs = tuple(cs)
        self.shift = _half(shift)

    @classmethod
    def const(cls, c, shift=0) -> "LambdaPoly":
        return cls([c], shift)

    @classmethod
    def x(cls, shift=0) -> "LambdaPoly":
        return cls([0, 1], shift)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def _check(self, other: "LambdaPoly"):
        if self.shift != other.shift:
            raise DomainError("LambdaPoly shifts differ")

    def __add__(self, other):
        if not isinstance(other, LambdaPoly):
            other = LambdaPoly([other], self.shift)
        self._check(other)
        n = max(len(self.coeffs), len(other.coeffs))
        a = list(self.coeffs) + [fmpq(0)] * (n - len(self.coeffs))
        b = list(other.coeffs) + [fmpq(0)] * (n - len(other.coeffs))
        return LambdaPoly([x + y for x, y in zip(a, b)], self.shift)

    __radd__ = __add__

    def __neg__(self):
        return LambdaPoly([-c for c in self.coeffs], self.shift)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, LambdaPoly):
            return LambdaPoly([c * rat(other) for c in self.coeffs], self.shift)
        self._check(other)
        if self.is_zero() or other.is_zero():
            return LambdaPoly([], self.shift)
        out = [fmpq(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, x in enumerate(self.coeffs):
            for j, y in enumerate(other.coeffs):
                out[i + j] += x * y
        return LambdaPoly(out, self.shift)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, LambdaPoly):
            return NotImplemented
        return self.coeffs == other.coeffs and (self.shift == other.shift or not self.coeffs)

    def __hash__(self):
        return hash((self.coeffs, self.shift))

    def __repr__(self):
        return f"LambdaPoly({[rat_str(c) for c in self.coeffs]}, shift={self.shift})"

    def __call__(self, n, p: Parameters) -> fmpq:
        lam = lambda_n(Fraction(n) + self.shift, p)
        acc = fmpq(0)
        for c in reversed(self.coeffs):
            acc = acc * lam + c
        return acc

    def eval_at(self, lam) -> fmpq:
        acc = fmpq(0)
        for c in reversed(self.coeffs):
            acc = acc * lam + c
        return acc

    def to_laurent(self, p: Parameters) -> LaurentPoly:
        lam = lambda_sym(p, self.shift)
        acc = LaurentPoly.const(0, "t")
        for c in reversed(self.coeffs):
            acc = acc * lam + c
        return acc

    @classmethod
    def from_laurent(cls, f, p: Parameters, shift=0) -> "LambdaPoly | None":
        """Inverse of to_laurent; None when f is not a polynomial in lambda_{n+shift}."""
        if isinstance(f, RatFunc):
            if not f.is_laurent():
                return None
            f = f.num
        cs = peel(f, lambda_sym(p, shift))
        if cs is None:
            return None
        return cls(cs, shift)

    def to_json(self) -> dict:
        return {"coeffs": [rat_str(c) for c in self.coeffs], "shift": str(self.shift)}

    @classmethod
    def from_json(cls, data) -> "LambdaPoly":
        if isinstance(data, list):
            return cls([rat(c if not isinstance(c, list) else c[0]) for c in data], 0)
        return cls([rat(c) for c in data["coeffs"]], Fraction(data.get("shift", "0")))


# -- q-series ---------------------------------------------------------------

def _qof(p) -> fmpq:
    return p.q if isinstance(p, Parameters) else rat(p)


def qpochhammer(x, n: int, p):
    """(x; q)_n; x may be a tuple for the multi-argument product."""
    if n < 0:
        raise DomainError("negative length in q-shifted factorial")
    q = _qof(p)
    if isinstance(x, (tuple, list)):
        out = fmpq(1)
        for y in x:
            out = out * qpochhammer(y, n, q)
        return out
    out = fmpq(1)
    for l in range(n):
        out = out * (1 - x * q**l)
    return out


def phi43_terminating(num_params: Sequence, den_params: Sequence, arg, n: int, p):
    """Terminating 4phi3 series; one upper parameter must equal q**-n."""
    q = _qof(p)
    if len(num_params) != 4 or len(den_params) != 3:
        raise ValueError("4phi3 needs four upper and three lower parameters")
    target = q ** (-n)
    if not any(not isinstance(u, (LaurentPoly, RatFunc)) and rat(u) == target for u in num_params):
        raise DomainError(f"no upper parameter equals q^-{n}; series does not terminate")
    dens = [rat(b) for b in den_params]
    arg = rat(arg)
    term = fmpq(1)
    total = fmpq(1)
    for l in range(n):
        num = fmpq(1)
        for u in num_params:
            num = (1 - u * q**l) * num
        den = (1 - q ** (l + 1))
        for b in dens:
            den *= 1 - b * q**l
        if den == 0:
            raise DomainError(f"vanishing lower factor at term {l + 1}")
        term = term * num * (arg / den)
        total = total + term
    return total


@lru_cache(maxsize=4096)
def _aw_poly_cached(n: int, p: Parameters) -> LaurentPoly:
    q, a, b, c, d = p.q, p.a, p.b, p.c, p.d
    z = LaurentPoly({1: 1}, "z")
    zi = LaurentPoly({-1: 1}, "z")
    # the prefactor (ab,ac,ad;q)_n cancels the lower q-factorials term by term
    total = LaurentPoly.const(0, "z")
    term = LaurentPoly.const(qpochhammer((a * b, a * c, a * d), n, q) / a**n, "z")
    for l in range(n + 1):
        total = total + term
        if l == n:
            break
        num = (1 - q ** (l - n)) * (1 - p.abcd * q ** (n - 1 + l))
        den = (1 - q ** (l + 1)) * (1 - a * b * q**l) * (1 - a * c * q**l) * (1 - a * d * q**l)
        if den == 0:
            raise DomainError("vanishing lower factor in the Askey-Wilson series")
        term = term * (1 - z * (a * q**l)) * (1 - zi * (a * q**l)) * (num * q / den)
    return total


def aw_poly(n: int, p: Parameters) -> SymmetricLaurent:
    """p_n(x; a, b, c, d) as a Laurent polynomial in z, x = (z + 1/z)/2."""
    if n < 0:
        raise DomainError("negative degree")
    return SymmetricLaurent.of(_aw_poly_cached(n, p))


# -- xi factors -------------------------------------------------------------

def xi(ell: str, n, p: Parameters) -> fmpq:
    """xi^ell_n at an integer index; zero for negative n (reciprocal Gamma-type factor)."""
    if not isinstance(n, int):
        raise TypeError("xi is transcendental in t; use xi_ratio/xi_shift_ratio for symbolic work")
    if n < 0:
        return fmpq(0)
    a, b, c, d = p.roles(ell)
    q = p.q
    den = a**n * qpochhammer((b * c, b * d, c * d, q), n, q)
    if den == 0:
        raise DomainError(f"vanishing denominator in xi^{ell}_{n}")
    return q**n * qpochhammer(p.abcd / q, n, q) / den


def xi_ratio(ell: str, p: Parameters) -> RatFunc:
    """xi^ell_{gamma+1} / xi^ell_gamma as a rational function of t = q**gamma."""
    a, b, c, d = p.roles(ell)
    q = p.q
    t = LaurentPoly({1: 1}, "t")
    num = (1 - t * (p.abcd / q)) * q
    den = (1 - t * (b * c)) * (1 - t * (b * d)) * (1 - t * (c * d)) * (1 - t * q) * a
    return RatFunc(num, den)


def xi_shift_ratio(ell: str, j: int, p: Parameters) -> RatFunc:
    """xi^ell_{gamma+j} / xi^ell_gamma."""
    from .operators import shift_ratio_product
    return shift_ratio_product(xi_ratio(ell, p), j, p.q)


# -- operators --------------------------------------------------------------

def _tpoly(coeffs: dict) -> LaurentPoly:
    return LaurentPoly(coeffs, "t")


def make_recurrence_op(p: Parameters) -> DiffOpN:
    """The three-term operator A_n E + B_n + C_n E^-1 with L p_n = 2x p_n."""
    q, a, b, c, d = p.q, p.a, p.b, p.c, p.d
    abcd = p.abcd
    s, sp = p.s, p.s_prime
    t = _tpoly({1: 1})
    one = _tpoly({0: 1})
    A = RatFunc(one - t * (abcd / q), (one - t * t * (abcd / q)) * (one - t * t * abcd))
    Bnum = (t / q) * ((one + t * t * (abcd / q)) * (s * q + sp * abcd) - (t / q) * ((1 + q) * abcd * (s + sp * q)))
    B = RatFunc(Bnum, (one - t * t * (abcd / q**2)) * (one - t * t * abcd))
    Cnum = one
    for x in (a * b, a * c, a * d, b * c, b * d, c * d):
        Cnum = Cnum * (one - t * (x / q))
    Cnum = Cnum * (one - t)
    C = RatFunc(Cnum, (one - t * t * (abcd / q**2)) * (one - t * t * (abcd / q)))
    return DiffOpN({1: A, 0: B, -1: C}, q)


def make_conjugated_recurrence_op(ell: str, p: Parameters) -> DiffOpN:
    """The recurrence operator conjugated by xi^ell, written out in closed form."""
    q = p.q
    a, b, c, d = p.roles(ell)
    abcd = p.abcd
    t = _tpoly({1: 1})
    one = _tpoly({0: 1})
    Anum = (one - t * (b * c)) * (one - t * (b * d)) * (one - t * (c * d)) * (one - t * q) * a
    A = RatFunc(Anum, (one - t * t * (abcd / q)) * (one - t * t * abcd) * q)
    Cnum = (one - t * (abcd / q**2)) * (one - t * (a * b / q)) * (one - t * (a * c / q)) * (one - t * (a * d / q)) * q
    C = RatFunc(Cnum, (one - t * t * (abcd / q**2)) * (one - t * t * (abcd / q)) * a)
    B = RatFunc.const(a / q + q / a) - A - C
    return DiffOpN({1: A, 0: B, -1: C}, q)


def _A_of(p4, q, first_factor: LaurentPoly) -> RatFunc:
    _, b, c, d = p4
    z = LaurentPoly({1: 1}, "z")
    one = LaurentPoly.const(1, "z")
    num = first_factor * (one - z * b) * (one - z * c) * (one - z * d)
    den = (one - z * z) * (one - z * z * q)
    return RatFunc(num, den)


def make_aw_qdiff_op(p: Parameters) -> QDiffOpZ:
    q = p.q
    z = LaurentPoly({1: 1}, "z")
    A = _A_of(p.roles("a"), q, 1 - z * p.a)
    Ai = A.subs_monomial(1, -1)
    return QDiffOpZ({1: A, 0: -(A + Ai), -1: Ai}, q)


def make_contiguous_qdiff_op(ell: str, p: Parameters) -> QDiffOpZ:
    q = p.q
    roles = p.roles(ell)
    z = LaurentPoly({1: 1}, "z")
    A = _A_of(roles, q, z * roles[0] + q)
    Ai = A.subs_monomial(1, -1)
    mid = RatFunc.const(q - p.abcd / q, "z") - A - Ai
    return QDiffOpZ({1: A, 0: mid, -1: Ai}, q)


# -- random generic parameters ---------------------------------------------

_Q_CHOICES = (fmpq(1, 4), fmpq(4, 9), fmpq(9, 16))


def _generic_ok(p: Parameters) -> bool:
    vals = [p.a, p.b, p.c, p.d]
    bound = 24
    checks = list(vals)
    for i in range(4):
        for j in range(i + 1, 4):
            checks.append(vals[i] * vals[j])
            checks.append(vals[i] / vals[j])
    checks.append(p.abcd)
    for i in range(4):
        checks.append(p.abcd / vals[i])
    return not any(is_half_power_of_q(x, p, bound) for x in checks)


def random_parameters(rng: random.Random, q=None, max_den: int = 9) -> Parameters:
    """Draw generic parameters: q from {1/4, 4/9, 9/16}, a..d small rationals in (-1,1)."""
    while True:
        qq = rat(q) if q is not None else rng.choice(_Q_CHOICES)
        vals = []
        for _ in range(4):
            den = rng.randint(2, max_den)
            num = rng.randint(1, den - 1)
            vals.append(fmpq(num if rng.random() < 0.7 else -num, den))
        try:
            p = Parameters(qq, *vals)
        except DomainError:
            continue
        if _generic_ok(p):
            return p
