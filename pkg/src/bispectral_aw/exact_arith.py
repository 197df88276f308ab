"""Exact arithmetic over Q: Laurent polynomials, reduced rational functions,
fraction-free determinants and linear solves.

Scalars are ``flint.fmpq``.  Univariate polynomial kernels (multiplication,
division, gcd) are delegated to ``flint.fmpq_poly``; everything that carries
Laurent or rational-function structure is implemented here.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import permutations
from typing import Iterable, Sequence

from flint import fmpq, fmpq_poly

from .errors import DomainError, ShapeError

Rational = fmpq

__all__ = [
    "Rational",
    "rat",
    "rat_str",
    "rat_arith",
    "LaurentPoly",
    "RatFunc",
    "Matrix",
    "poly_det",
    "cofactor_det",
    "linsolve",
    "SolutionSpace",
    "NoSolution",
    "NO_SOLUTION",
    "substitute",
]


def rat(x) -> fmpq:
    """Coerce ``x`` to an exact rational.

    Accepts ints, fmpq, ``fractions.Fraction`` and strings ``"p/q"`` or ``"p"``.
    Floats are rejected because they would silently inject rounding.
    """
    if isinstance(x, fmpq):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, int):
        return fmpq(x)
    if isinstance(x, Fraction):
        return fmpq(x.numerator, x.denominator)
    if isinstance(x, str):
        s = x.strip()
        if "/" in s:
            num, den = s.split("/", 1)
            d = int(den)
            if d == 0:
                raise DomainError(f"zero denominator in {x!r}")
            return fmpq(int(num), d)
        return fmpq(int(s))
    raise TypeError(f"cannot convert {type(x).__name__} to an exact rational")


def rat_str(x: fmpq) -> str:
    x = rat(x)
    return str(int(x.p)) if x.q == 1 else f"{int(x.p)}/{int(x.q)}"


def rat_arith(a, b, op: str) -> fmpq:
    a, b = rat(a), rat(b)
    if op == "+":
        return a + b
    if op in ("-", "−"):
        return a - b
    if op in ("*", "×"):
        return a * b
    if op in ("/", "÷"):
        if b == 0:
            raise DomainError("division by zero")
        return a / b
    raise ValueError(f"unknown operation {op!r}")


def _is_scalar(x) -> bool:
    return isinstance(x, (int, fmpq, Fraction)) and not isinstance(x, bool)


_X = fmpq_poly([0, 1])


class LaurentPoly:
    """Laurent polynomial ``t**val * poly(t)`` in one named variable.

    ``poly`` has nonzero constant term unless the whole thing is zero, which
    makes the representation canonical.
    """

    __slots__ = ("var", "val", "poly")

    def __init__(self, terms=None, var: str = "t"):
        self.var = var
        if terms is None:
            terms = {}
        elif _is_scalar(terms):
            terms = {0: terms}
        if not terms:
            self.val, self.poly = 0, fmpq_poly([])
            return
        lo = min(terms)
        hi = max(terms)
        coeffs = [fmpq(0)] * (hi - lo + 1)
        for e, c in terms.items():
            coeffs[e - lo] = rat(c)
        self.val, self.poly = _normalize(lo, fmpq_poly(coeffs))

    @classmethod
    def _make(cls, var: str, val: int, poly: fmpq_poly) -> "LaurentPoly":
        obj = cls.__new__(cls)
        obj.var = var
        obj.val, obj.poly = _normalize(val, poly)
        return obj

    @classmethod
    def monomial(cls, e: int, c=1, var: str = "t") -> "LaurentPoly":
        return cls._make(var, e, fmpq_poly([rat(c)]))

    @classmethod
    def const(cls, c, var: str = "t") -> "LaurentPoly":
        return cls._make(var, 0, fmpq_poly([rat(c)]))

    @classmethod
    def from_coeffs(cls, coeffs: Sequence, val: int = 0, var: str = "t") -> "LaurentPoly":
        return cls._make(var, val, fmpq_poly([rat(c) for c in coeffs]))

    # -- structure ---------------------------------------------------------
    @property
    def terms(self) -> dict[int, fmpq]:
        if self.poly.is_zero():
            return {}
        return {self.val + i: c for i, c in enumerate(self.poly.coeffs()) if c != 0}

    def is_zero(self) -> bool:
        return self.poly.is_zero()

    def is_constant(self) -> bool:
        return self.poly.is_zero() or (self.val == 0 and self.poly.degree() == 0)

    def is_monomial(self) -> bool:
        return not self.poly.is_zero() and self.poly.degree() == 0

    def constant_value(self) -> fmpq:
        if not self.is_constant():
            raise ValueError("not a constant")
        return self.coeff(0)

    def degree(self) -> int:
        if self.is_zero():
            raise ValueError("degree of the zero Laurent polynomial")
        return self.val + self.poly.degree()

    def valuation(self) -> int:
        if self.is_zero():
            raise ValueError("valuation of the zero Laurent polynomial")
        return self.val

    def coeff(self, e: int) -> fmpq:
        i = e - self.val
        if self.poly.is_zero() or i < 0 or i > self.poly.degree():
            return fmpq(0)
        return self.poly.coeffs()[i]

    def leading_coeff(self) -> fmpq:
        return self.poly.leading_coefficient()

    # -- arithmetic --------------------------------------------------------
    def _coerce(self, other) -> "LaurentPoly | None":
        if isinstance(other, LaurentPoly):
            if other.var != self.var:
                raise DomainError(f"variable mismatch: {self.var} vs {other.var}")
            return other
        if _is_scalar(other):
            return LaurentPoly._make(self.var, 0, fmpq_poly([rat(other)]))
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if o.is_zero():
            return self
        if self.is_zero():
            return o
        v = min(self.val, o.val)
        p = self.poly.left_shift(self.val - v) + o.poly.left_shift(o.val - v)
        return LaurentPoly._make(self.var, v, p)

    __radd__ = __add__

    def __neg__(self):
        return LaurentPoly._make(self.var, self.val, -self.poly)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        if _is_scalar(other):
            return LaurentPoly._make(self.var, self.val, self.poly * rat(other))
        if isinstance(other, LaurentPoly):
            o = self._coerce(other)
            return LaurentPoly._make(self.var, self.val + o.val, self.poly * o.poly)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if _is_scalar(other):
            other = rat(other)
            if other == 0:
                raise DomainError("division by zero")
            return LaurentPoly._make(self.var, self.val, self.poly / other)
        if isinstance(other, LaurentPoly):
            q = self.divexact(other)
            if q is None:
                return RatFunc(self, other)
            return q
        return NotImplemented

    def __rtruediv__(self, other):
        if _is_scalar(other):
            if self.is_monomial():
                return self ** -1 * rat(other)
            return RatFunc(LaurentPoly.const(other, self.var), self)
        return NotImplemented

    def __pow__(self, n: int):
        if n < 0:
            if self.is_monomial():
                c = self.poly.coeffs()[0]
                return LaurentPoly._make(self.var, self.val * n, fmpq_poly([c**n]))
            return RatFunc(LaurentPoly.const(1, self.var), self) ** (-n)
        return LaurentPoly._make(self.var, self.val * n, self.poly**n)

    def divexact(self, other: "LaurentPoly") -> "LaurentPoly | None":
        """Quotient in the Laurent ring, or ``None`` if ``other`` does not divide."""
        o = self._coerce(other)
        if o.is_zero():
            raise DomainError("division by the zero Laurent polynomial")
        if self.is_zero():
            return self
        quo, rem = divmod(self.poly, o.poly)
        if not rem.is_zero():
            return None
        return LaurentPoly._make(self.var, self.val - o.val, quo)

    def divides(self, other: "LaurentPoly") -> bool:
        return other.divexact(self) is not None

    # -- evaluation & substitution ------------------------------------------
    def __call__(self, x):
        return self.evaluate(x)

    def evaluate(self, x):
        if self.is_zero():
            return fmpq(0) if _is_scalar(x) else 0 * x
        if _is_scalar(x):
            x = rat(x)
            if x == 0:
                if self.val < 0:
                    raise DomainError("Laurent polynomial has a pole at 0")
                return self.poly(x) if self.val == 0 else fmpq(0)
            return self.poly(x) * x**self.val
        # floating point or complex (numpy arrays included)
        coeffs = [float(c) for c in self.poly.coeffs()]
        acc = 0 * x
        for c in reversed(coeffs):
            acc = acc * x + c
        return acc * x**self.val

    def subs_monomial(self, c, s: int = 1) -> "LaurentPoly":
        """Return f(c * var**s) for s = +1 or -1."""
        c = rat(c)
        if c == 0:
            raise DomainError("zero substitution image")
        if self.is_zero():
            return self
        coeffs = self.poly.coeffs()
        if s == 1:
            scaled = [coeffs[i] * c ** (self.val + i) for i in range(len(coeffs))]
            return LaurentPoly._make(self.var, self.val, fmpq_poly(scaled))
        if s == -1:
            deg = self.val + len(coeffs) - 1
            scaled = [coeffs[i] * c ** (self.val + i) for i in range(len(coeffs))]
            return LaurentPoly._make(self.var, -deg, fmpq_poly(scaled[::-1]))
        raise ValueError("s must be +1 or -1")

    def dilate(self, c) -> "LaurentPoly":
        return self.subs_monomial(c, 1)

    def invert_var(self) -> "LaurentPoly":
        return self.subs_monomial(1, -1)

    def shift_exponent(self, e: int) -> "LaurentPoly":
        return LaurentPoly._make(self.var, self.val + e, self.poly)

    def with_var(self, var: str) -> "LaurentPoly":
        return LaurentPoly._make(var, self.val, self.poly)

    # -- comparison --------------------------------------------------------
    def __eq__(self, other):
        if _is_scalar(other):
            other = LaurentPoly.const(other, self.var)
        if isinstance(other, RatFunc):
            return other == self
        if not isinstance(other, LaurentPoly):
            return NotImplemented
        if self.is_zero() and other.is_zero():
            return True
        return self.var == other.var and self.val == other.val and self.poly == other.poly

    def __hash__(self):
        return hash((self.var, tuple(sorted(self.terms.items()))))

    def __bool__(self):
        return not self.is_zero()

    def __repr__(self):
        if self.is_zero():
            return "0"
        parts = []
        for e, c in sorted(self.terms.items()):
            cs = rat_str(c)
            if e == 0:
                parts.append(cs)
            else:
                parts.append(f"{cs}*{self.var}^{e}")
        return " + ".join(parts)

    def to_json(self) -> list:
        return [[e, rat_str(c)] for e, c in sorted(self.terms.items())]

    @classmethod
    def from_json(cls, data, var: str = "t") -> "LaurentPoly":
        return cls({int(e): rat(c) for e, c in data}, var)


def _normalize(val: int, poly: fmpq_poly) -> tuple[int, fmpq_poly]:
    if poly.is_zero():
        return 0, poly
    coeffs = poly.coeffs()
    i = 0
    while coeffs[i] == 0:
        i += 1
    if i:
        poly = poly.right_shift(i)
    return val + i, poly


class RatFunc:
    """Reduced quotient num/den of Laurent polynomials.

    ``den`` is an ordinary polynomial with constant term 1; any power of the
    variable and any scalar content live in ``num``.
    """

    __slots__ = ("var", "num", "den")

    def __init__(self, num, den=None, var: str | None = None):
        if var is None:
            var = num.var if isinstance(num, LaurentPoly) else (
                den.var if isinstance(den, LaurentPoly) else "t")
        if not isinstance(num, LaurentPoly):
            num = LaurentPoly.const(num, var)
        if den is None:
            den = LaurentPoly.const(1, var)
        elif not isinstance(den, LaurentPoly):
            den = LaurentPoly.const(den, var)
        if num.var != var or den.var != var:
            raise DomainError("variable mismatch in rational function")
        if den.is_zero():
            raise DomainError("zero denominator")
        self.var = var
        self.num, self.den = _reduce(num, den)

    @classmethod
    def _raw(cls, num: LaurentPoly, den: LaurentPoly) -> "RatFunc":
        obj = cls.__new__(cls)
        obj.var, obj.num, obj.den = num.var, num, den
        return obj

    @classmethod
    def const(cls, c, var: str = "t") -> "RatFunc":
        return cls._raw(LaurentPoly.const(c, var), LaurentPoly.const(1, var))

    @classmethod
    def of(cls, x, var: str = "t") -> "RatFunc":
        if isinstance(x, RatFunc):
            return x
        if isinstance(x, LaurentPoly):
            return cls._raw(x, LaurentPoly.const(1, x.var))
        return cls.const(x, var)

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_laurent(self) -> bool:
        return self.den.is_constant()

    def to_laurent(self) -> LaurentPoly:
        if not self.is_laurent():
            raise DomainError("rational function is not a Laurent polynomial")
        return self.num

    def is_constant(self) -> bool:
        return self.is_laurent() and self.num.is_constant()

    def constant_value(self) -> fmpq:
        if not self.is_constant():
            raise ValueError("not a constant")
        return self.num.constant_value()

    def _coerce(self, other) -> "RatFunc | None":
        if isinstance(other, RatFunc):
            if other.var != self.var:
                raise DomainError(f"variable mismatch: {self.var} vs {other.var}")
            return other
        if isinstance(other, LaurentPoly):
            if other.var != self.var:
                raise DomainError(f"variable mismatch: {self.var} vs {other.var}")
            return RatFunc._raw(other, LaurentPoly.const(1, self.var))
        if _is_scalar(other):
            return RatFunc.const(other, self.var)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if o.is_zero():
            return self
        if self.is_zero():
            return o
        if self.den == o.den:
            return RatFunc(self.num + o.num, self.den)
        g = _lp_gcd(self.den, o.den)
        d1 = self.den.divexact(g)
        d2 = o.den.divexact(g)
        return RatFunc(self.num * d2 + o.num * d1, d1 * o.den)

    __radd__ = __add__

    def __neg__(self):
        return RatFunc._raw(-self.num, self.den)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        if _is_scalar(other):
            return RatFunc._raw(self.num * rat(other), self.den)
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if self.is_zero() or o.is_zero():
            return RatFunc.const(0, self.var)
        g1 = _lp_gcd(self.num, o.den)
        g2 = _lp_gcd(o.num, self.den)
        n1, d2 = self.num.divexact(g1), o.den.divexact(g1)
        n2, d1 = o.num.divexact(g2), self.den.divexact(g2)
        return _canon(n1 * n2, d1 * d2)

    __rmul__ = __mul__

    def inverse(self) -> "RatFunc":
        if self.is_zero():
            raise DomainError("inverse of zero")
        return RatFunc(self.den, self.num)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        return RatFunc._raw(self.num**n, self.den**n)

    def __call__(self, x):
        return self.evaluate(x)

    def evaluate(self, x):
        if _is_scalar(x):
            x = rat(x)
            d = self.den.evaluate(x)
            if d == 0:
                raise DomainError(f"pole at {rat_str(x)}")
            return self.num.evaluate(x) / d
        return self.num.evaluate(x) / self.den.evaluate(x)

    def subs_monomial(self, c, s: int = 1) -> "RatFunc":
        return RatFunc(self.num.subs_monomial(c, s), self.den.subs_monomial(c, s))

    def dilate(self, c) -> "RatFunc":
        return self.subs_monomial(c, 1)

    def __eq__(self, other):
        if isinstance(other, (RatFunc, LaurentPoly)) and other.var != self.var:
            return self.is_zero() and other.is_zero()
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self.num == o.num and self.den == o.den

    def __hash__(self):
        return hash((hash(self.num), hash(self.den)))

    def __bool__(self):
        return not self.is_zero()

    def __repr__(self):
        if self.is_laurent():
            return repr(self.num)
        return f"({self.num!r})/({self.den!r})"

    def to_json(self) -> dict:
        return {"num": self.num.to_json(), "den": self.den.to_json()}


def _lp_gcd(a: LaurentPoly, b: LaurentPoly) -> LaurentPoly:
    # gcd of the polynomial parts; monomial factors are units in the Laurent ring
    return LaurentPoly._make(a.var, 0, a.poly.gcd(b.poly))


def _canon(num: LaurentPoly, den: LaurentPoly) -> RatFunc:
    """Normalize an already coprime pair."""
    if num.is_zero():
        return RatFunc.const(0, num.var)
    c = den.poly.coeffs()[0]
    num = LaurentPoly._make(num.var, num.val - den.val, num.poly / c)
    den = LaurentPoly._make(den.var, 0, den.poly / c)
    return RatFunc._raw(num, den)


def _reduce(num: LaurentPoly, den: LaurentPoly) -> tuple[LaurentPoly, LaurentPoly]:
    if num.is_zero():
        return num, LaurentPoly.const(1, den.var)
    g = num.poly.gcd(den.poly)
    if g.degree() > 0:
        n = LaurentPoly._make(num.var, num.val, divmod(num.poly, g)[0])
        d = LaurentPoly._make(den.var, den.val, divmod(den.poly, g)[0])
    else:
        n, d = num, den
    r = _canon(n, d)
    return r.num, r.den


def substitute(f, image):
    """Replace the variable of ``f`` by ``image``, returning a reduced RatFunc."""
    f = RatFunc.of(f) if not isinstance(f, RatFunc) else f
    image = RatFunc.of(image, f.var)
    if image.is_zero():
        raise DomainError("zero substitution image")
    # monomial images keep everything Laurent: fast path
    if image.is_laurent() and image.num.is_monomial() and abs(image.num.val) == 1:
        c = image.num.leading_coeff()
        return f.subs_monomial(c, image.num.val)
    return _subs_lp(f.num, image) / _subs_lp(f.den, image)


def _subs_lp(p: LaurentPoly, image: RatFunc) -> RatFunc:
    if p.is_zero():
        return RatFunc.const(0, image.var)
    acc = RatFunc.const(0, image.var)
    for c in reversed(p.poly.coeffs()):
        acc = acc * image + c
    return acc * image**p.val


# -- matrices --------------------------------------------------------------

class Matrix:
    """Dense matrix with entries from one exact ring."""

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, entries: Iterable[Iterable]):
        ent = tuple(tuple(r) for r in entries)
        if not ent or not ent[0]:
            raise ShapeError("matrix must be nonempty")
        width = len(ent[0])
        if any(len(r) != width for r in ent):
            raise ShapeError("ragged matrix")
        self.entries = ent
        self.rows = len(ent)
        self.cols = width

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def det(self):
        return poly_det(self)

    def __repr__(self):
        return f"Matrix({self.rows}x{self.cols})"


def _entries(m) -> list[list]:
    if isinstance(m, Matrix):
        return [list(r) for r in m.entries]
    rows = [list(r) for r in m]
    if rows and any(len(r) != len(rows[0]) for r in rows):
        raise ShapeError("ragged matrix")
    return rows


def _exquo(a, b):
    if isinstance(a, LaurentPoly) or isinstance(b, LaurentPoly):
        if not isinstance(a, LaurentPoly):
            a = LaurentPoly.const(a, b.var)
        if not isinstance(b, LaurentPoly):
            b = LaurentPoly.const(b, a.var)
        q = a.divexact(b)
        if q is None:
            raise ArithmeticError("inexact division in fraction-free elimination")
        return q
    return a / b


def _is_zero(x) -> bool:
    if isinstance(x, (LaurentPoly, RatFunc)):
        return x.is_zero()
    return x == 0


def _bareiss(a: list[list]):
    n = len(a)
    sign = 1
    prev = fmpq(1)
    for k in range(n - 1):
        if _is_zero(a[k][k]):
            for r in range(k + 1, n):
                if not _is_zero(a[r][k]):
                    a[k], a[r] = a[r], a[k]
                    sign = -sign
                    break
            else:
                return fmpq(0)
        piv = a[k][k]
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = _exquo(a[i][j] * piv - a[i][k] * a[k][j], prev)
        prev = piv
    return a[n - 1][n - 1] if sign == 1 else -a[n - 1][n - 1]


def poly_det(m):
    """Determinant by fraction-free elimination.

    RatFunc rows are first cleared to Laurent polynomials by their own
    denominator lcm; the result is divided back at the end.
    """
    a = _entries(m)
    n = len(a)
    if n == 0 or any(len(r) != n for r in a):
        raise ShapeError("determinant of a non-square matrix")
    if any(isinstance(x, RatFunc) for r in a for x in r):
        var = next(x.var for r in a for x in r if isinstance(x, RatFunc))
        scale = LaurentPoly.const(1, var)
        cleared = []
        for r in a:
            rr = [RatFunc.of(x, var) for x in r]
            lcm = LaurentPoly.const(1, var)
            for x in rr:
                g = _lp_gcd(lcm, x.den)
                lcm = lcm * x.den.divexact(g)
            cleared.append([x.num * lcm.divexact(x.den) for x in rr])
            scale = scale * lcm
        return RatFunc(_bareiss(cleared) if n > 1 else cleared[0][0], scale)
    if any(isinstance(x, LaurentPoly) for r in a for x in r):
        var = next(x.var for r in a for x in r if isinstance(x, LaurentPoly))
        a = [[x if isinstance(x, LaurentPoly) else LaurentPoly.const(x, var) for x in r] for r in a]
    else:
        a = [[rat(x) for x in r] for r in a]
    if n == 1:
        return a[0][0]
    return _bareiss(a)


def cofactor_det(m):
    """Leibniz expansion; an independent (slow) determinant for small sizes."""
    a = _entries(m)
    n = len(a)
    if any(len(r) != n for r in a):
        raise ShapeError("determinant of a non-square matrix")
    total = fmpq(0)
    for perm in permutations(range(n)):
        inv = sum(1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j])
        prod = fmpq(1)
        for i, p in enumerate(perm):
            prod = prod * a[i][p]
        total = total + (prod if inv % 2 == 0 else -prod)
    return total


class NoSolution:
    """Returned (not raised) by ``linsolve`` for inconsistent systems."""

    def __bool__(self):
        return False

    def __repr__(self):
        return "NoSolution"


NO_SOLUTION = NoSolution()


class SolutionSpace:
    """Affine solution set ``particular + span(nullspace)``."""

    __slots__ = ("particular", "nullspace")

    def __init__(self, particular: list, nullspace: list[list]):
        self.particular = particular
        self.nullspace = nullspace

    @property
    def dimension(self) -> int:
        return len(self.nullspace)

    def __bool__(self):
        return True

    def __repr__(self):
        return f"SolutionSpace(dim={self.dimension})"


def linsolve(m, rhs: Sequence) -> "SolutionSpace | NoSolution":
    """Gauss-Jordan elimination over Q or a rational-function field."""
    a = _entries(m)
    rows = len(a)
    cols = len(a[0]) if rows else 0
    if len(rhs) != rows:
        raise ShapeError("right-hand side length does not match matrix rows")
    field_rf = any(isinstance(x, (RatFunc, LaurentPoly)) for r in a for x in r) or any(
        isinstance(x, (RatFunc, LaurentPoly)) for x in rhs)
    if field_rf:
        var = next(x.var for x in [*(y for r in a for y in r), *rhs] if isinstance(x, (RatFunc, LaurentPoly)))
        conv = lambda x: RatFunc.of(x, var)  # noqa: E731
        zero = RatFunc.const(0, var)
    else:
        conv = rat
        zero = fmpq(0)
    aug = [[conv(x) for x in r] + [conv(b)] for r, b in zip(a, rhs)]
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        p = next((i for i in range(r, rows) if not _is_zero(aug[i][c])), None)
        if p is None:
            continue
        aug[r], aug[p] = aug[p], aug[r]
        inv = 1 / aug[r][c]
        aug[r] = [x * inv for x in aug[r]]
        for i in range(rows):
            if i != r and not _is_zero(aug[i][c]):
                f = aug[i][c]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    for i in range(r, rows):
        if not _is_zero(aug[i][cols]):
            return NO_SOLUTION
    particular = [zero] * cols
    for i, c in enumerate(pivots):
        particular[c] = aug[i][cols]
    free = [c for c in range(cols) if c not in pivots]
    one = conv(1)
    null = []
    for fcol in free:
        v = [zero] * cols
        v[fcol] = one
        for i, c in enumerate(pivots):
            v[c] = -aug[i][fcol]
        null.append(v)
    return SolutionSpace(particular, null)
