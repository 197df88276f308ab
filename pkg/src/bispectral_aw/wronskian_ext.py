"""Wronskian (Casoratian) extensions of the Askey-Wilson polynomials.

An extension is fixed by k pairs (delta_j, phi_j).  The sequences
psi_j(n) = phi_j(lambda_n) / xi^{delta_j}_n are combined with p_n in a
(k+1) x (k+1) Casoratian.  After the normalisation by chi_n every entry of
the matrix is a Laurent polynomial in t = q**n (first k columns) or a
Laurent polynomial in z (last column), so no transcendental factor is ever
evaluated symbolically.

Row convention: row l (1-based) carries the index n - l + 1.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from flint import fmpq

from .aw_core import (LambdaPoly, Parameters, SymmetricLaurent, aw_poly, lambda_sym,
                      xi, xi_ratio, xi_shift_ratio)
from .errors import DomainError, GenericityError, InternalError
from .exact_arith import LaurentPoly, RatFunc, poly_det, rat

__all__ = [
    "ExtensionSpec",
    "TauData",
    "GenericityCertificate",
    "eta",
    "kappa",
    "chi",
    "chi_ratio",
    "tau",
    "tau_entry",
    "involution",
    "p_hat",
    "p_hat_casoratian",
    "certify",
    "genericity_ratio",
    "psi",
    "kappa_ratio_form",
]


@dataclass(frozen=True)
class ExtensionSpec:
    """(k; delta_j; phi_j) over fixed parameters."""

    params: Parameters
    choices: tuple = ()
    n_max: int = field(default=32, compare=False)
    label: str = field(default="", compare=False)

    def __post_init__(self):
        ch = tuple((str(d), phi if isinstance(phi, LambdaPoly) else LambdaPoly(phi))
                   for d, phi in self.choices)
        for d, phi in ch:
            if d not in ("a", "b", "c", "d"):
                raise DomainError(f"delta must be one of a, b, c, d (got {d!r})")
            if phi.shift != 0:
                raise DomainError("phi must be a polynomial in lambda_n (shift 0)")
            if phi.is_zero():
                raise DomainError("phi must be nonzero")
        object.__setattr__(self, "choices", ch)

    @property
    def k(self) -> int:
        return len(self.choices)

    @property
    def deltas(self) -> tuple[str, ...]:
        return tuple(d for d, _ in self.choices)

    @property
    def phis(self) -> tuple[LambdaPoly, ...]:
        return tuple(phi for _, phi in self.choices)

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "choices": [{"delta": d, "phi": [str(c) if c.q != 1 else str(c.p) for c in phi.coeffs]}
                        for d, phi in self.choices],
            "params": self.params.to_json(),
            **({"label": self.label} if self.label else {}),
            **({"m_max": self.params.m_max} if self.params.m_max != 64 else {}),
        }

    @classmethod
    def from_json(cls, data: dict, n_max: int = 32) -> "ExtensionSpec":
        if not isinstance(data, dict):
            raise DomainError("extension spec must be a JSON object")
        unknown = set(data) - {"k", "choices", "params", "label", "m_max", "notes", "slice", "measure"}
        if unknown:
            raise DomainError(f"unknown fields in spec: {sorted(unknown)}")
        params = Parameters.from_json(data["params"], m_max=int(data.get("m_max", 64)))
        choices = []
        for ch in data.get("choices", []):
            coeffs = [rat(c[0] if isinstance(c, list) else c) for c in ch["phi"]]
            choices.append((ch["delta"], LambdaPoly(coeffs)))
        spec = cls(params, tuple(choices), n_max=n_max, label=data.get("label", ""))
        if "k" in data and int(data["k"]) != spec.k:
            raise DomainError(f"k = {data['k']} does not match {spec.k} choices")
        return spec

    @classmethod
    def load(cls, path, n_max: int = 32) -> "ExtensionSpec":
        with open(path) as fh:
            return cls.from_json(json.load(fh), n_max=n_max)


def _t() -> LaurentPoly:
    return LaurentPoly({1: 1}, "t")


def _others(ell: str) -> tuple[str, str]:
    o = [x for x in "bcd" if x != ell]
    return o[0], o[1]


def _qpoch_t(x: fmpq, shift: int, length: int, q: fmpq) -> LaurentPoly:
    """(x q^{n+shift}; q)_length as a Laurent polynomial of t = q**n."""
    out = LaurentPoly.const(1, "t")
    t = _t()
    for i in range(length):
        out = out * (1 - t * (x * q ** (shift + i)))
    return out


def _as_value(f: LaurentPoly, n_or_t, q: fmpq):
    if n_or_t is None or (isinstance(n_or_t, str) and n_or_t == "t"):
        return f
    if isinstance(n_or_t, (LaurentPoly, RatFunc)):
        from .exact_arith import substitute
        return substitute(RatFunc.of(f), RatFunc.of(n_or_t))
    return f.evaluate(q ** int(n_or_t))


@lru_cache(maxsize=None)
def _eta_sym(ell: str, j: int, k: int, p: Parameters) -> LaurentPoly:
    if ell == "a":
        return LaurentPoly.const(1, "t")
    o1, o2 = (p.value(x) for x in _others(ell))
    lv, a, q = p.value(ell), p.a, p.q
    out = LaurentPoly.monomial(-(k - 1), 1, "t")
    out = out * _qpoch_t(lv * o1, 1 - j, j - 1, q) * _qpoch_t(lv * o2, 1 - j, j - 1, q)
    out = out * _qpoch_t(a * o1, 1 - k, k - j, q) * _qpoch_t(a * o2, 1 - k, k - j, q)
    return out


def eta(ell: str, j: int, n_or_t, spec: ExtensionSpec):
    """Column normaliser for a delta = ell column; Laurent in t, or its value at n."""
    if ell == "a":
        raise DomainError("eta is defined for b, c, d only")
    if not 1 <= j <= spec.k:
        raise DomainError("column index out of range")
    return _as_value(_eta_sym(ell, j, spec.k, spec.params), n_or_t, spec.params.q)


@lru_cache(maxsize=None)
def _kappa_sym(ell: str, l: int, j: int, k: int, p: Parameters) -> LaurentPoly:
    if ell == "a":
        return LaurentPoly.const(1, "t")
    o1, o2 = (p.value(x) for x in _others(ell))
    lv, a, q = p.value(ell), p.a, p.q
    out = LaurentPoly.monomial(-(k - 1), (lv / a) ** (j - l), "t")
    out = out * _qpoch_t(a * o1, 1 - k, k - l, q) * _qpoch_t(a * o2, 1 - k, k - l, q)
    out = out * _qpoch_t(lv * o1, 1 - l, l - 1, q) * _qpoch_t(lv * o2, 1 - l, l - 1, q)
    return out


def kappa(ell: str, l: int, j: int, n_or_t, spec: ExtensionSpec):
    if not (1 <= l <= spec.k and 1 <= j <= spec.k):
        raise DomainError("kappa indices out of range")
    return _as_value(_kappa_sym(ell, l, j, spec.k, spec.params), n_or_t, spec.params.q)


def psi(j: int, n: int, spec: ExtensionSpec) -> fmpq:
    """psi_j(n) = phi_j(lambda_n) / xi^{delta_j}_n for n >= 0."""
    d, phi = spec.choices[j - 1]
    x = xi(d, n, spec.params)
    if x == 0:
        raise DomainError(f"psi_{j} is undefined at n={n}")
    return phi(n, spec.params) / x


def chi(n_or_t, spec: ExtensionSpec):
    """Normaliser chi_n (integer n); the symbolic form is only available as a
    shift ratio, see ``chi_ratio``.  The empty extension uses chi = 1."""
    if not isinstance(n_or_t, int):
        raise TypeError("chi is transcendental in t; use chi_ratio")
    n = n_or_t
    k = spec.k
    if k == 0:
        return fmpq(1)
    p = spec.params
    out = fmpq(1)
    deltas = list(spec.deltas) + ["a"]
    for j in range(1, k + 2):
        out = out * xi(deltas[j - 1], n - j + 1, p)
    for j, d in enumerate(spec.deltas, start=1):
        if d != "a":
            out = out * eta(d, j, n, spec)
    return out


def chi_ratio(spec: ExtensionSpec) -> RatFunc:
    """chi_gamma / chi_{gamma-1} as a rational function of t."""
    p = spec.params
    q = p.q
    out = RatFunc.const(1, "t")
    if spec.k == 0:
        return out
    deltas = list(spec.deltas) + ["a"]
    for j in range(1, spec.k + 2):
        out = out * xi_ratio(deltas[j - 1], p).dilate(q ** (-j))
    for j, d in enumerate(spec.deltas, start=1):
        if d != "a":
            e = _eta_sym(d, j, spec.k, p)
            out = out * RatFunc(e) / RatFunc(e.dilate(1 / q))
    return out


@lru_cache(maxsize=None)
def genericity_ratio(spec: ExtensionSpec) -> RatFunc:
    """chi_gamma xi^a_{gamma-k-1} / (chi_{gamma-1} xi^a_gamma), rational in t."""
    p = spec.params
    q = p.q
    out = RatFunc.const(1, "t")
    for j, d in enumerate(spec.deltas, start=1):
        if d == "a":
            continue
        out = out * xi_ratio(d, p).dilate(q ** (-j)) / xi_ratio("a", p).dilate(q ** (-j))
        e = _eta_sym(d, j, spec.k, p)
        out = out * RatFunc(e) / RatFunc(e.dilate(1 / q))
    return out


@lru_cache(maxsize=None)
def kappa_ratio_form(ell: str, l: int, j: int, k: int, p: Parameters) -> RatFunc:
    """eta * (xi^ell_{n-j+1}/xi^a_{n-j+1}) * (xi^a_{n-l+1}/xi^ell_{n-l+1}) as a rational
    function of t; valid for every row index l, including l = k+1."""
    if ell == "a":
        return RatFunc.const(1, "t")
    shift = p.q ** (1 - l)
    r = xi_shift_ratio(ell, l - j, p).dilate(shift) / xi_shift_ratio("a", l - j, p).dilate(shift)
    return r * _eta_sym(ell, j, k, p)


def tau_entry(l: int, j: int, spec: ExtensionSpec):
    """(l, j) entry of the normalised matrix: kappa * phi_j(lambda_{n-l+1}).
    Laurent in t for l <= k; the extra row l = k+1 is only rational."""
    d, phi = spec.choices[j - 1]
    p = spec.params
    ph = phi.to_laurent(p).dilate(p.q ** (1 - l))
    if l <= spec.k:
        return _kappa_sym(d, l, j, spec.k, p) * ph
    return kappa_ratio_form(d, l, j, spec.k, p) * ph


@dataclass(frozen=True)
class TauData:
    tau: LaurentPoly
    tau_bar: LambdaPoly
    eps_kind: str
    eps: LaurentPoly


@lru_cache(maxsize=None)
def tau(spec: ExtensionSpec) -> TauData:
    """tau_n as a Laurent polynomial of t and its factorisation eps * taubar(lambda_{n-(k-1)/2})."""
    k = spec.k
    p = spec.params
    if k == 0:
        one = LaurentPoly.const(1, "t")
        return TauData(one, LambdaPoly([1], Fraction(1, 2)), "trivial", one)
    m = [[tau_entry(l, j, spec) for j in range(1, k + 1)] for l in range(1, k + 1)]
    t_val = poly_det(m)
    if not isinstance(t_val, LaurentPoly):
        t_val = LaurentPoly.const(t_val, "t")
    if t_val.is_zero():
        raise GenericityError("tau vanishes identically (psi are dependent)", "3.6a")
    shift = Fraction(-(k - 1), 2)
    if k % 4 in (0, 1):
        eps = LaurentPoly.const(1, "t")
        kind = "trivial"
    else:
        eps = lambda_sym(p, Fraction(-k, 2) + 1) - lambda_sym(p, Fraction(-k, 2))
        kind = "lambda-difference"
    rest = t_val.divexact(eps)
    if rest is None:
        raise InternalError("tau is not divisible by the expected lambda difference")
    bar = LambdaPoly.from_laurent(rest, p, shift)
    if bar is None:
        raise InternalError("tau quotient is not a polynomial in the shifted lambda")
    return TauData(t_val, bar, kind, eps)


def involution(j: int, f, p: Parameters):
    """t -> q**(j+1) / (abcd t)."""
    c = p.q ** (j + 1) / p.abcd
    if isinstance(f, LambdaPoly):
        raise TypeError("apply the involution to the Laurent form")
    return f.subs_monomial(c, -1)


@dataclass(frozen=True)
class GenericityCertificate:
    n_max: int
    tau_checked: tuple  # n = -1..n_max
    ratio_checked: tuple  # n = 0..n_max


_cert_cache: dict = {}


def certify(spec: ExtensionSpec, n_max: int | None = None) -> GenericityCertificate:
    """Check tau_n != 0 (n >= -1) and the chi ratio condition (n >= 0) up to n_max."""
    n_max = spec.n_max if n_max is None else n_max
    key = (spec, n_max)
    if key in _cert_cache:
        return _cert_cache[key]
    for (s2, m2), cert in _cert_cache.items():
        if s2 == spec and m2 >= n_max:
            return cert
    p = spec.params
    td = tau(spec)
    for n in range(-1, n_max + 1):
        if td.tau.evaluate(p.q**n) == 0:
            raise GenericityError(f"3.6a fails at n={n}: tau_n = 0", "3.6a", n)
    r = genericity_ratio(spec)
    for n in range(0, n_max + 1):
        qn = p.q**n
        if r.den.evaluate(qn) == 0 or r.num.evaluate(qn) == 0:
            raise GenericityError(f"3.6b fails at n={n}", "3.6b", n)
    cert = GenericityCertificate(n_max, tuple(range(-1, n_max + 1)), tuple(range(n_max + 1)))
    _cert_cache[key] = cert
    return cert


def _e_row(l: int, n: int, spec: ExtensionSpec) -> list:
    p = spec.params
    qn = p.q**n
    try:
        row: list = [tau_entry(l, j, spec).evaluate(qn) for j in range(1, spec.k + 1)]
    except DomainError as exc:
        raise GenericityError(f"normalised matrix has a pole at n={n}", "3.6b", n) from exc
    m = n - l + 1
    row.append(aw_poly(m, p) * xi("a", m, p) if m >= 0 else LaurentPoly.const(0, "z"))
    return row


@lru_cache(maxsize=2048)
def p_hat(n: int, spec: ExtensionSpec) -> SymmetricLaurent:
    """The extended polynomial, from the normalised determinant with Laurent entries."""
    if n < 0:
        raise DomainError("negative degree")
    if spec.k == 0:
        return aw_poly(n, spec.params)
    certify(spec, max(n, spec.n_max))
    m = [_e_row(l, n, spec) for l in range(1, spec.k + 2)]
    return SymmetricLaurent.of(poly_det(m))


def p_hat_casoratian(n: int, spec: ExtensionSpec) -> SymmetricLaurent:
    """chi_n times the plain Casoratian of (psi_1..psi_k, p); needs n >= k so
    every xi factor is finite and nonzero."""
    k = spec.k
    if n < k:
        raise DomainError("the plain Casoratian form needs n >= k")
    p = spec.params
    rows = []
    for l in range(1, k + 2):
        m = n - l + 1
        rows.append([psi(j, m, spec) for j in range(1, k + 1)] + [aw_poly(m, p)])
    return SymmetricLaurent.of(poly_det(rows) * chi(n, spec))
