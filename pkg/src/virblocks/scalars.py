"""Exact arithmetic foundation: rationals, polynomials, rational functions,
and the complex-double numeric layer with Gamma.

Rationals are arbitrary-precision ``gmpy2.mpq`` values (always stored in
lowest terms with positive denominator).  ``Poly`` is a dense univariate
polynomial whose coefficients live in any field that supports Python
arithmetic operators; in practice the coefficients are either rationals
(polynomials in q or kappa) or ``RatFunc`` values (polynomials in an
auxiliary variable such as h or mu over the field Q(kappa)).
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from typing import Iterable, Union

from gmpy2 import mpq, mpz

from .errors import DivisionByZero, GammaPole, PoleAtEvaluationPoint

Rational = mpq


def rat(a, b=1) -> Rational:
    """Exact rational a/b in lowest terms with positive denominator."""
    if b == 0:
        raise DivisionByZero("rational with zero denominator")
    return mpq(a, b)


@dataclass(frozen=True)
class Tolerances:
    """Numeric tolerance constants, centralized per the one-record policy."""

    pole: float = 1e-12          # relative pole detection in eval_ratfunc
    gamma_pole: float = 1e-10    # distance to nonpositive integers for Gamma
    eval_rel: float = 1e-10      # default relative comparison for numerics


TOL = Tolerances()

# Generic kappa used for all default numeric evaluation: sqrt(7), far from
# low-height rationals.
DEFAULT_KAPPA = 2.6457513110645906


def _inv(c):
    if isinstance(c, RatFunc):
        return c.inv()
    return 1 / c


class Poly:
    """Dense univariate polynomial, lowest degree first.

    The variable tag records formal symbol identity only (one of
    'q', 'k', 'h', 'mu'); operations require matching tags.
    The trailing (highest-degree) coefficient is nonzero unless the
    polynomial is zero, in which case ``coeffs`` is empty.
    """

    __slots__ = ("coeffs", "var")

    def __init__(self, coeffs: Iterable, var: str):
        cs = list(coeffs)
        while cs and _is_zero_coeff(cs[-1]):
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))
        object.__setattr__(self, "var", var)

    def __setattr__(self, *a):
        raise AttributeError("Poly is immutable")

    @staticmethod
    def const(c, var: str) -> "Poly":
        return Poly([c], var)

    @staticmethod
    def x(var: str) -> "Poly":
        return Poly([mpq(0), mpq(1)], var)

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def degree(self) -> int:
        """Degree; -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    def leading(self):
        if not self.coeffs:
            raise ValueError("zero polynomial has no leading coefficient")
        return self.coeffs[-1]

    def _check_var(self, other: "Poly"):
        if self.var != other.var:
            raise ValueError(f"variable mismatch: {self.var} vs {other.var}")

    def __eq__(self, other):
        return (
            isinstance(other, Poly)
            and self.var == other.var
            and self.coeffs == other.coeffs
        )

    def __hash__(self):
        return hash((self.var, self.coeffs))

    def __neg__(self):
        return Poly([-c for c in self.coeffs], self.var)

    def __add__(self, other: "Poly") -> "Poly":
        self._check_var(other)
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] = out[i] + c
        return Poly(out, self.var)

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __mul__(self, other: "Poly") -> "Poly":
        self._check_var(other)
        a, b = self.coeffs, other.coeffs
        if not a or not b:
            return Poly([], self.var)
        out = [None] * (len(a) + len(b) - 1)
        for i, ca in enumerate(a):
            if _is_zero_coeff(ca):
                continue
            for j, cb in enumerate(b):
                t = ca * cb
                out[i + j] = t if out[i + j] is None else out[i + j] + t
        return Poly([c if c is not None else a[0] * 0 for c in out], self.var)

    def scale(self, c) -> "Poly":
        return Poly([c * k for k in self.coeffs], self.var)

    def shift(self, n: int) -> "Poly":
        """Multiply by var**n (n >= 0)."""
        if self.is_zero():
            return self
        z = self.coeffs[0] * 0
        return Poly([z] * n + list(self.coeffs), self.var)

    def divmod(self, other: "Poly"):
        """Exact quotient and remainder over a coefficient field."""
        self._check_var(other)
        if other.is_zero():
            raise DivisionByZero("polynomial division by zero")
        r = list(self.coeffs)
        d = other.coeffs
        dd = len(d) - 1
        inv_lead = _inv(d[-1])
        q = [None] * max(0, len(r) - dd)
        for i in range(len(r) - 1, dd - 1, -1):
            c = r[i] * inv_lead
            q[i - dd] = c
            if not _is_zero_coeff(c):
                for j in range(dd + 1):
                    r[i - dd + j] = r[i - dd + j] - c * d[j]
        z = d[-1] * 0
        quo = Poly([c if c is not None else z for c in q], self.var)
        rem = Poly(r[:dd] if dd > 0 else [], self.var)
        return quo, rem

    def monic(self) -> "Poly":
        if self.is_zero():
            return self
        return self.scale(_inv(self.leading()))

    def gcd(self, other: "Poly") -> "Poly":
        """Monic gcd via Euclid over the coefficient field."""
        a, b = self, other
        while not b.is_zero():
            a, b = b, a.divmod(b)[1]
        return a.monic() if not a.is_zero() else a

    def eval(self, t):
        """Horner evaluation at t (complex, float, or exact rational)."""
        if not self.coeffs:
            return 0 * t if not isinstance(t, complex) else 0j
        acc = None
        for c in reversed(self.coeffs):
            cv = _coerce_coeff(c, t)
            acc = cv if acc is None else acc * t + cv
        return acc

    def __str__(self):
        return poly_to_str(self)

    def __repr__(self):
        return f"Poly({poly_to_str(self)!r}, var={self.var!r})"


def _is_zero_coeff(c) -> bool:
    if isinstance(c, RatFunc):
        return c.is_zero()
    return c == 0


def _coerce_coeff(c, t):
    if isinstance(t, (complex, float)):
        if isinstance(c, RatFunc):
            raise TypeError("cannot numerically evaluate nested RatFunc here")
        return float(c) if not isinstance(t, complex) else complex(c)
    return c


def poly_to_str(p: Poly) -> str:
    """Canonical ascending-degree string, e.g. '1 - 2*q + 1/3*q^2'."""
    if p.is_zero():
        return "0"
    parts = []
    for i, c in enumerate(p.coeffs):
        if _is_zero_coeff(c):
            continue
        s = str(c)
        neg = s.startswith("-")
        mag = s[1:] if neg else s
        if i == 0:
            term = mag
        elif i == 1:
            term = f"{mag}*{p.var}" if mag != "1" else p.var
        else:
            term = f"{mag}*{p.var}^{i}" if mag != "1" else f"{p.var}^{i}"
        if not parts:
            parts.append(("-" if neg else "") + term)
        else:
            parts.append(("- " if neg else "+ ") + term)
    return " ".join(parts)


def poly_from_str(s: str, var: str) -> Poly:
    """Inverse of poly_to_str for rational-coefficient polynomials."""
    s = s.strip()
    if s == "0":
        return Poly([], var)
    toks = s.replace("- ", "+ -").split("+")
    coeffs = {}
    for tok in toks:
        tok = tok.strip()
        if not tok:
            continue
        neg = tok.startswith("-")
        if neg:
            tok = tok[1:].strip()
        if "*" in tok:
            cs, xs = tok.split("*")
        elif tok.startswith(var):
            cs, xs = "1", tok
        else:
            cs, xs = tok, ""
        if xs == "":
            deg = 0
        elif "^" in xs:
            deg = int(xs.split("^")[1])
        else:
            deg = 1
        c = mpq(cs)
        coeffs[deg] = coeffs.get(deg, mpq(0)) + (-c if neg else c)
    n = max(coeffs) + 1
    return Poly([coeffs.get(i, mpq(0)) for i in range(n)], var)


class RatFunc:
    """Element of the rational-function field Q(t), t = q or t = kappa.

    Stored as a reduced fraction of rational-coefficient polynomials with
    monic denominator.  Genericity ('q not a root of unity', 'kappa
    irrational') is modeled by working in the field: any nonzero element
    is invertible.
    """

    __slots__ = ("num", "den")

    def __init__(self, num: Poly, den: Poly = None, _canonical=False):
        if den is None:
            den = Poly([mpq(1)], num.var)
        if den.is_zero():
            raise DivisionByZero("rational function with zero denominator")
        if not _canonical:
            num._check_var(den)
            if num.is_zero():
                den = Poly([mpq(1)], num.var)
            else:
                g = num.gcd(den)
                if g.degree > 0:
                    num = num.divmod(g)[0]
                    den = den.divmod(g)[0]
                lead = den.leading()
                if lead != 1:
                    inv = _inv(lead)
                    num = num.scale(inv)
                    den = den.scale(inv)
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    def __setattr__(self, *a):
        raise AttributeError("RatFunc is immutable")

    @property
    def var(self) -> str:
        return self.num.var

    @staticmethod
    def const(c, var: str) -> "RatFunc":
        return RatFunc(Poly([mpq(c)], var), Poly([mpq(1)], var), _canonical=True)

    @staticmethod
    def x(var: str) -> "RatFunc":
        return RatFunc(Poly.x(var), Poly([mpq(1)], var), _canonical=True)

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def __eq__(self, other):
        if isinstance(other, int):
            other = RatFunc.const(other, self.var)
        return (
            isinstance(other, RatFunc)
            and self.num == other.num
            and self.den == other.den
        )

    def __hash__(self):
        return hash((self.num, self.den))

    def _coerce(self, other) -> "RatFunc":
        if isinstance(other, RatFunc):
            return other
        if isinstance(other, (int, mpz, mpq)):
            return RatFunc.const(mpq(other), self.var)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if self.den == o.den:
            return RatFunc(self.num + o.num, self.den)
        return RatFunc(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self):
        return RatFunc(-self.num, self.den, _canonical=True)

    def __sub__(self, other):
        o = self._coerce(other)
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return RatFunc(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o.is_zero():
            raise DivisionByZero("division by zero rational function")
        return RatFunc(self.num * o.den, self.den * o.num)

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def inv(self) -> "RatFunc":
        if self.is_zero():
            raise DivisionByZero("inverting zero rational function")
        return RatFunc(self.den, self.num)

    def __pow__(self, n: int) -> "RatFunc":
        if n < 0:
            return self.inv() ** (-n)
        out = RatFunc.const(1, self.var)
        base = self
        while n:
            if n & 1:
                out = out * base
            n >>= 1
            if n:
                base = base * base
        return out

    def eval(self, t0: complex, pole_tol: float = None) -> complex:
        """Numeric value num(t0)/den(t0); raises near poles."""
        return eval_ratfunc(self, t0, pole_tol)

    def __str__(self):
        if self.den.degree == 0 and self.den.coeffs[0] == 1:
            return poly_to_str(self.num)
        return f"({poly_to_str(self.num)}) / ({poly_to_str(self.den)})"

    def __repr__(self):
        return f"RatFunc({self!s}, var={self.var!r})"


def ratfunc_arith(a: RatFunc, b: RatFunc, op: str) -> RatFunc:
    """Field operation on Q(t); result in canonical reduced form."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ValueError(f"unknown op {op!r}")


def eval_ratfunc(f: RatFunc, t0: complex, pole_tol: float = None) -> complex:
    """Horner-evaluated num/den at t0, with relative pole detection."""
    tol = TOL.pole if pole_tol is None else pole_tol
    t0 = complex(t0)
    den = f.den.eval(t0)
    scale = sum(abs(float(c)) * abs(t0) ** i for i, c in enumerate(f.den.coeffs))
    if abs(den) <= tol * max(scale, 1e-300):
        raise PoleAtEvaluationPoint(f"denominator vanishes at {t0}")
    val = f.num.eval(t0) / den
    if not (cmath.isfinite(val)):
        raise PoleAtEvaluationPoint(f"non-finite value at {t0}")
    return val


# ---------------------------------------------------------------------------
# q-integers


def q_integer(n: int) -> RatFunc:
    """[n] = (q^n - q^-n)/(q - q^-1) as an element of Q(q).

    Laurent content is absorbed into the fraction: for n > 0,
    [n] = (1 + q^2 + ... + q^(2(n-1))) / q^(n-1), and [-n] = -[n].
    """
    if n == 0:
        return RatFunc.const(0, "q")
    if n < 0:
        return -q_integer(-n)
    num = Poly([mpq(1 if i % 2 == 0 else 0) for i in range(2 * n - 1)], "q")
    den = Poly([mpq(0)] * (n - 1) + [mpq(1)], "q")
    return RatFunc(num, den)


def q_factorial(n: int) -> RatFunc:
    """[n]! = [1][2]...[n]; empty product for n = 0."""
    if n < 0:
        raise ValueError("q-factorial of negative integer")
    out = RatFunc.const(1, "q")
    for m in range(2, n + 1):
        out = out * q_integer(m)
    return out


# ---------------------------------------------------------------------------
# Gamma function (Lanczos approximation, g = 7, n = 9)

_LANCZOS_G = 7.0
_LANCZOS_C = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def gamma(z: complex) -> complex:
    """Complex Gamma via Lanczos, with reflection for Re z < 0.5.

    Raises GammaPole when z is within TOL.gamma_pole of a nonpositive
    integer.
    """
    z = complex(z)
    if z.real <= 0.5 + TOL.gamma_pole and abs(z.imag) < TOL.gamma_pole:
        nearest = round(z.real)
        if nearest <= 0 and abs(z.real - nearest) < TOL.gamma_pole:
            raise GammaPole(f"Gamma pole at {z}")
    if z.real < 0.5:
        # Gamma(z) Gamma(1-z) = pi / sin(pi z)
        return cmath.pi / (cmath.sin(cmath.pi * z) * gamma(1.0 - z))
    z = z - 1.0
    x = _LANCZOS_C[0]
    for i in range(1, len(_LANCZOS_C)):
        x += _LANCZOS_C[i] / (z + i)
    t = z + _LANCZOS_G + 0.5
    val = cmath.sqrt(2.0 * cmath.pi) * t ** (z + 0.5) * cmath.exp(-t) * x
    if not cmath.isfinite(val):
        raise GammaPole(f"Gamma overflow at {z + 1.0}")
    return val


Scalar = Union[int, Rational, RatFunc]
