"""Finite-support shift operators with rational-function coefficients.

Both operator kinds share one algebra: an operator is a finite sum
``sum_j c_j(x) S^j`` where ``S`` dilates the variable, ``S c(x) = c(q x) S``.
For operators in the degree index the variable is ``t = q**n`` and ``S`` is
the shift ``n -> n+1``; for q-difference operators the variable is ``z``.
"""

from __future__ import annotations

from typing import Callable, Mapping

from flint import fmpq

from .errors import DomainError, EvaluationError, InternalError
from .exact_arith import LaurentPoly, RatFunc, rat, rat_str

__all__ = [
    "ShiftOp",
    "DiffOpN",
    "QDiffOpZ",
    "opn_apply",
    "opn_compose",
    "opn_conjugate",
    "opz_apply",
    "opz_compose",
    "shift_ratio_product",
]


def shift_ratio_product(ratio: RatFunc, j: int, q) -> RatFunc:
    """g(q**j x) / g(x) given ratio(x) = g(q x) / g(x)."""
    out = RatFunc.const(1, ratio.var)
    if j > 0:
        for i in range(j):
            out = out * ratio.dilate(q**i)
    elif j < 0:
        for i in range(1, -j + 1):
            out = out / ratio.dilate(q ** (-i))
    return out


class ShiftOp:
    var = "t"

    __slots__ = ("q", "coeffs")

    def __init__(self, coeffs: Mapping[int, object], q):
        self.q = rat(q)
        cs: dict[int, RatFunc] = {}
        for j, c in coeffs.items():
            c = RatFunc.of(c, self.var)
            if c.var != self.var:
                raise DomainError(f"coefficient variable {c.var} does not match {self.var}")
            if not c.is_zero():
                cs[int(j)] = c
        self.coeffs = cs

    # -- constructors ------------------------------------------------------
    @classmethod
    def identity(cls, q):
        return cls({0: 1}, q)

    @classmethod
    def shift(cls, j: int, q):
        return cls({j: 1}, q)

    @classmethod
    def mult(cls, f, q):
        return cls({0: f}, q)

    # -- structure ---------------------------------------------------------
    @property
    def support(self) -> list[int]:
        return sorted(self.coeffs)

    def coeff(self, j: int) -> RatFunc:
        return self.coeffs.get(j, RatFunc.const(0, self.var))

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def order(self) -> int:
        if not self.coeffs:
            return 0
        return max(self.coeffs) - min(self.coeffs)

    def _same(self, other):
        if type(other) is not type(self):
            raise TypeError(f"cannot combine {type(self).__name__} and {type(other).__name__}")
        if other.q != self.q:
            raise DomainError("operators have different q")

    # -- algebra -----------------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, ShiftOp):
            other = type(self).mult(other, self.q)
        self._same(other)
        out = dict(self.coeffs)
        for j, c in other.coeffs.items():
            out[j] = out[j] + c if j in out else c
        return type(self)(out, self.q)

    __radd__ = __add__

    def __neg__(self):
        return type(self)({j: -c for j, c in self.coeffs.items()}, self.q)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        """Scalar multiple, or left multiplication by a function of the variable."""
        if isinstance(other, ShiftOp):
            return self.compose(other)
        f = RatFunc.of(other, self.var)
        return type(self)({j: c * f for j, c in self.coeffs.items()}, self.q)

    def __rmul__(self, other):
        f = RatFunc.of(other, self.var)
        return type(self)({j: f * c for j, c in self.coeffs.items()}, self.q)

    def __matmul__(self, other):
        return self.compose(other)

    def compose(self, other: "ShiftOp") -> "ShiftOp":
        """self after other: coefficients c1_j(x) c2_i(q**j x) at shift i+j."""
        self._same(other)
        out: dict[int, RatFunc] = {}
        for j, c1 in self.coeffs.items():
            qj = self.q**j
            for i, c2 in other.coeffs.items():
                term = c1 * c2.dilate(qj)
                s = i + j
                out[s] = out[s] + term if s in out else term
        return type(self)(out, self.q)

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative operator power")
        out = type(self).identity(self.q)
        base = self
        while n:
            if n & 1:
                out = out.compose(base)
            base = base.compose(base)
            n >>= 1
        return out

    def poly(self, coeffs) -> "ShiftOp":
        """sum_i coeffs[i] * self**i (Horner)."""
        out = type(self)({}, self.q)
        for c in reversed(list(coeffs)):
            out = self.compose(out) + type(self).mult(rat(c), self.q)
        return out

    def conjugate(self, g) -> "ShiftOp":
        """g * self * g**-1 for a rational function g."""
        g = RatFunc.of(g, self.var)
        if g.is_zero():
            raise DomainError("conjugation by zero")
        return type(self)(
            {j: c * g / g.dilate(self.q**j) for j, c in self.coeffs.items()}, self.q)

    def conjugate_by_ratio(self, ratio) -> "ShiftOp":
        """g * self * g**-1 where only ratio(x) = g(q x)/g(x) is known."""
        ratio = RatFunc.of(ratio, self.var)
        if ratio.is_zero():
            raise DomainError("conjugation by a zero ratio")
        return type(self)(
            {j: c / shift_ratio_product(ratio, j, self.q) for j, c in self.coeffs.items()},
            self.q)

    def act(self, f) -> RatFunc:
        """sum_j c_j(x) f(q**j x) for a Laurent polynomial or rational function f."""
        acc = RatFunc.const(0, self.var)
        for j, c in self.coeffs.items():
            acc = acc + c * f.dilate(self.q**j)
        return acc

    def map_coeffs(self, fn: Callable[[RatFunc], RatFunc]) -> "ShiftOp":
        return type(self)({j: fn(c) for j, c in self.coeffs.items()}, self.q)

    def __eq__(self, other):
        if not isinstance(other, ShiftOp):
            return NotImplemented
        return (type(self) is type(other) and self.q == other.q
                and self.coeffs.keys() == other.coeffs.keys()
                and all(self.coeffs[j] == other.coeffs[j] for j in self.coeffs))

    def __hash__(self):
        return hash((type(self).__name__, tuple(sorted(self.coeffs))))

    def __repr__(self):
        inner = ", ".join(f"{j}: {c!r}" for j, c in sorted(self.coeffs.items()))
        return f"{type(self).__name__}({{{inner}}})"

    # -- serialization -----------------------------------------------------
    def to_json(self) -> dict:
        return {
            "variable": self.var,
            "q": rat_str(self.q),
            "terms": [
                {"shift": j, "num_coeffs": c.num.to_json(), "den_coeffs": c.den.to_json()}
                for j, c in sorted(self.coeffs.items())
            ],
        }

    @staticmethod
    def from_json(data: dict) -> "ShiftOp":
        var = data["variable"]
        cls = {"t": DiffOpN, "z": QDiffOpZ}.get(var)
        if cls is None:
            raise ValueError(f"unknown operator variable {var!r}")
        coeffs = {}
        for term in data["terms"]:
            num = LaurentPoly.from_json(term["num_coeffs"], var)
            den = LaurentPoly.from_json(term["den_coeffs"], var)
            coeffs[int(term["shift"])] = RatFunc(num, den)
        return cls(coeffs, rat(data["q"]))


class DiffOpN(ShiftOp):
    """Operator in the degree index; coefficients are rational in t = q**n."""

    var = "t"
    __slots__ = ()

    def apply(self, f, n: int, lower: int | None = None):
        return opn_apply(self, f, n, lower)

    def at(self, j: int, n: int) -> fmpq:
        c = self.coeffs.get(j)
        if c is None:
            return fmpq(0)
        try:
            return c.evaluate(self.q**n)
        except DomainError as exc:
            raise EvaluationError(f"coefficient at shift {j} has a pole at n={n}", shift=j) from exc


class QDiffOpZ(ShiftOp):
    """q-difference operator in z."""

    var = "z"
    __slots__ = ()

    def apply(self, h, expect_laurent: bool = False):
        return opz_apply(self, h, expect_laurent)


def opn_apply(L: DiffOpN, f, n: int, lower: int | None = None):
    """sum_j L_j(q**n) f(n+j).

    Terms with a zero coefficient are skipped, and so are terms with
    ``n+j < lower`` when a lower end of the index range is given (sequences
    on N_0 vanish below 0).
    """
    acc = None
    for j in L.support:
        if lower is not None and n + j < lower:
            continue
        c = L.at(j, n)
        if c == 0:
            continue
        term = c * f(n + j)
        acc = term if acc is None else acc + term
    return fmpq(0) if acc is None else acc


def opn_compose(L1: DiffOpN, L2: DiffOpN) -> DiffOpN:
    return L1.compose(L2)


def opn_conjugate(L: DiffOpN, g=None, *, ratio=None) -> DiffOpN:
    if (g is None) == (ratio is None):
        raise ValueError("give exactly one of g or ratio")
    return L.conjugate(g) if g is not None else L.conjugate_by_ratio(ratio)


def opz_apply(B: QDiffOpZ, h, expect_laurent: bool = False):
    """sum_i B_i(z) h(q**i z); returns a LaurentPoly whenever the result is one."""
    if not isinstance(h, (LaurentPoly, RatFunc)):
        h = LaurentPoly.const(h, "z")
    out = B.act(h)
    if out.is_laurent():
        return out.num
    if expect_laurent:
        raise InternalError("q-difference operator did not map a Laurent polynomial to one")
    return out


def opz_compose(B1: QDiffOpZ, B2: QDiffOpZ) -> QDiffOpZ:
    return B1.compose(B2)
