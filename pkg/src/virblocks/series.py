"""Frobenius-series engine.

Truncated multi-variable series with exact Q(kappa) coefficients living in
the nested-ratio space

    C[[x_{N-1}/x_N]] ... [[x_1/x_2]] x_N^(D_N) ... x_1^(D_1),

the translation-reduced Witt and null-vector differential operators acting
on them, and the indicial recursion that computes the highest-weight
matrix elements of composed intertwiners.

Offsets and grading: a cone offset (k_1, ..., k_{N-1}) (nonnegative,
total at most the truncation K) denotes the monomial
prod_i (x_i/x_{i+1})^(k_i) times the base monomial.  Working series used
during operator application carry exponent offsets n = (n_1, ..., n_N)
relative to the base, graded by g(n) = sum_i (N-i) n_i, which equals the
total ratio order on the cone.  An operator's minimal g-degree governs
how much of the truncation survives an application.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

from gmpy2 import mpq

from .errors import (
    DomainViolation,
    IndicialDenominatorZero,
    NotAdmissible,
    PoleAtEvaluationPoint,
    TruncationUnderflow,
)
from .ops import Op, OpCompose, OpMulBinom, OpMulPow, OpPartial, OpScalar, OpSum, op_compose, op_sum
from .qgroup import is_admissible
from .scalars import Poly, RatFunc
from .virasoro import BetaProduct, beta_coef, bsa_coefficient, compositions_of, h_weight, kconst

Offsets = Tuple[int, ...]

_ZERO = kconst(0)
_ONE = kconst(1)


def _weights(nvars: int) -> Tuple[int, ...]:
    return tuple(nvars - 1 - i for i in range(nvars))


def _gdeg(n: Offsets, w: Tuple[int, ...]) -> int:
    return sum(wi * ni for wi, ni in zip(w, n))


def flat_to_exp(flat: Offsets, nvars: int) -> Offsets:
    """Cone offsets (k_1..k_{N-1}) -> exponent offsets (n_1..n_N)."""
    if nvars == 1:
        return (0,)
    n = [flat[0]]
    for i in range(1, nvars - 1):
        n.append(flat[i] - flat[i - 1])
    n.append(-flat[-1])
    return tuple(n)


def exp_to_flat(n: Offsets) -> Offsets:
    """Exponent offsets -> cone offsets; valid when sum(n) == 0."""
    out = []
    acc = 0
    for ni in n[:-1]:
        acc += ni
        out.append(acc)
    return tuple(out)


# ---------------------------------------------------------------------------
# Operator structure


def min_gdeg(op: Op, nvars: int) -> int:
    """Minimal g-degree over the operator's homogeneous pieces."""
    w = _weights(nvars)
    if isinstance(op, OpScalar):
        return 0
    if isinstance(op, OpPartial):
        return -w[op.var]
    if isinstance(op, OpMulPow):
        return op.power * w[op.var]
    if isinstance(op, OpMulBinom):
        if w[op.small] <= w[op.big]:
            raise ValueError("binomial must be expanded in the earlier variable")
        return op.power * w[op.big]
    if isinstance(op, OpSum):
        return min(min_gdeg(p, nvars) for p in op.parts)
    if isinstance(op, OpCompose):
        return sum(min_gdeg(p, nvars) for p in op.parts)
    raise TypeError(f"unknown operator node {op!r}")


class ExpSeries:
    """Working series: sparse exponent offsets relative to a fixed base.

    ``known`` is the grading order through which the stored coefficients
    are exact; None means the series is exact everywhere (finite data).
    Only coefficients within ``known`` are stored.
    """

    __slots__ = ("base", "coeffs", "known")

    def __init__(self, base: Sequence[RatFunc], coeffs: Dict[Offsets, RatFunc], known: Optional[int]):
        self.base = tuple(base)
        self.known = known
        w = _weights(len(self.base))
        self.coeffs = {}
        for n, c in coeffs.items():
            if c.is_zero():
                continue
            if known is not None and _gdeg(n, w) > known:
                continue
            self.coeffs[tuple(n)] = c

    @property
    def nvars(self) -> int:
        return len(self.base)

    def is_zero(self) -> bool:
        return not self.coeffs

    def max_abs_coeff(self, kappa0: float) -> float:
        vals = [abs(c.eval(kappa0)) for c in self.coeffs.values()]
        return max(vals) if vals else 0.0


def apply_operator_exp(op: Op, s: ExpSeries, out_gmax: Optional[int] = None) -> ExpSeries:
    """Exact truncated application of an operator tree.

    The result is exact through ``known + min_gdeg(op)`` (or through
    ``out_gmax`` for fully-known finite input).  Raises
    TruncationUnderflow when neither bound is available but the operator
    has infinite binomial tails.
    """
    w = _weights(s.nvars)
    if s.known is not None:
        cap = s.known + min_gdeg(op, s.nvars)
        if out_gmax is not None:
            cap = min(cap, out_gmax)
    else:
        cap = out_gmax  # None = unbounded, only safe without infinite tails
    out = _apply(op, s, cap, w)
    return out


def _has_infinite_tail(op: Op) -> bool:
    if isinstance(op, OpMulBinom):
        return op.power < 0
    if isinstance(op, (OpSum, OpCompose)):
        return any(_has_infinite_tail(p) for p in op.parts)
    return False


def _apply(op: Op, s: ExpSeries, cap: Optional[int], w) -> ExpSeries:
    if isinstance(op, OpScalar):
        if op.value.is_zero():
            return ExpSeries(s.base, {}, cap)
        return ExpSeries(s.base, {n: op.value * c for n, c in s.coeffs.items()}, cap)
    if isinstance(op, OpPartial):
        v = op.var
        out: Dict[Offsets, RatFunc] = {}
        for n, c in s.coeffs.items():
            f = s.base[v] + kconst(n[v])
            if f.is_zero():
                continue
            m = n[:v] + (n[v] - 1,) + n[v + 1 :]
            out[m] = out.get(m, _ZERO) + f * c
        return ExpSeries(s.base, out, cap)
    if isinstance(op, OpMulPow):
        v = op.var
        out = {}
        for n, c in s.coeffs.items():
            m = n[:v] + (n[v] + op.power,) + n[v + 1 :]
            out[m] = out.get(m, _ZERO) + c
        return ExpSeries(s.base, out, cap)
    if isinstance(op, OpMulBinom):
        if op.power < 0 and cap is None:
            raise TruncationUnderflow("infinite binomial tail needs a truncation")
        out = {}
        step = w[op.small] - w[op.big]
        for n, c in s.coeffs.items():
            g0 = _gdeg(n, w) + op.power * w[op.big]
            t = 0
            coef = mpq(1)
            while True:
                if op.power >= 0 and t > op.power:
                    break
                if cap is not None and g0 + t * step > cap:
                    break
                sb = 1 if (op.sign_big == 1 or (op.power - t) % 2 == 0) else -1
                ss = 1 if (op.sign_small == 1 or t % 2 == 0) else -1
                m = list(n)
                m[op.big] += op.power - t
                m[op.small] += t
                m = tuple(m)
                val = kconst(coef * sb * ss) * c
                if not val.is_zero():
                    out[m] = out.get(m, _ZERO) + val
                coef = coef * mpq(op.power - t, t + 1)
                t += 1
        return ExpSeries(s.base, out, cap)
    if isinstance(op, OpSum):
        acc: Dict[Offsets, RatFunc] = {}
        for p in op.parts:
            sub = _apply(p, s, cap, w)
            for n, c in sub.coeffs.items():
                acc[n] = acc.get(n, _ZERO) + c
        return ExpSeries(s.base, acc, cap)
    if isinstance(op, OpCompose):
        cur = s
        rem = list(op.parts)
        while rem:
            p = rem.pop()
            # the intermediate must be complete through cap minus the
            # minimal degree of the not-yet-applied left factors
            later = sum(min_gdeg(q, len(w)) for q in rem)
            icap = None if cap is None else cap - later
            if icap is None and _has_infinite_tail(p):
                raise TruncationUnderflow("infinite binomial tail needs a truncation")
            cur = _apply(p, cur, icap, w)
        return ExpSeries(s.base, cur.coeffs, cap)
    raise TypeError(f"unknown operator node {op!r}")


# ---------------------------------------------------------------------------
# Public series type


class FrobeniusSeries:
    """Normalized truncated series: unit zero-offset coefficient, cone
    offsets through total order ``trunc``, and a symbolic numeric
    prefactor (product of Gamma normalization constants)."""

    __slots__ = ("nvars", "exponent_base", "trunc", "coeffs", "prefactor")

    def __init__(
        self,
        exponent_base: Sequence[RatFunc],
        trunc: int,
        coeffs: Dict[Offsets, RatFunc],
        prefactor: BetaProduct,
    ):
        self.exponent_base = tuple(exponent_base)
        self.nvars = len(self.exponent_base)
        self.trunc = trunc
        self.coeffs = {
            tuple(k): c
            for k, c in coeffs.items()
            if not c.is_zero() and sum(k) <= trunc
        }
        self.prefactor = prefactor

    def coeff(self, flat: Offsets) -> RatFunc:
        return self.coeffs.get(tuple(flat), _ZERO)

    def truncate(self, K: int) -> "FrobeniusSeries":
        if K > self.trunc:
            raise TruncationUnderflow(f"cannot extend truncation {self.trunc} to {K}")
        return FrobeniusSeries(self.exponent_base, K, self.coeffs, self.prefactor)

    def to_exp(self) -> ExpSeries:
        return ExpSeries(
            self.exponent_base,
            {flat_to_exp(k, self.nvars): c for k, c in self.coeffs.items()},
            self.trunc,
        )

    def __repr__(self):
        return (
            f"FrobeniusSeries(nvars={self.nvars}, trunc={self.trunc}, "
            f"{len(self.coeffs)} coefficients)"
        )


def apply_operator(op: Op, s, out_gmax: Optional[int] = None) -> ExpSeries:
    """Apply a SeriesOperator to a Frobenius or working series, exactly,
    with conservative truncation bookkeeping."""
    if isinstance(s, FrobeniusSeries):
        s = s.to_exp()
    return apply_operator_exp(op, s, out_gmax)


# ---------------------------------------------------------------------------
# Translation-reduced differential operators


def witt_reduced(j: int, n: int, weights: Sequence[RatFunc]) -> Op:
    """Reduced Witt generator at slot j (1-based) for mode n.

    ``weights`` = (h_0, h_1, ..., h_N): the ket weight and the slot
    weights, as exact Q(kappa) values.
    """
    h0 = weights[0]
    nv = len(weights) - 1
    sgn = _ONE if (n + 1) % 2 == 0 else -_ONE
    parts = [
        op_compose(
            [
                OpScalar(sgn),
                OpMulPow(j - 1, n + 1),
                op_sum([OpPartial(i) for i in range(nv)]),
            ]
        ),
        op_compose([OpScalar(sgn * kconst(1 + n) * h0), OpMulPow(j - 1, n)]),
    ]
    for i in range(1, nv + 1):
        if i == j:
            continue
        if i > j:
            b1 = OpMulBinom(i - 1, j - 1, n + 1, 1, -1)
            b0 = OpMulBinom(i - 1, j - 1, n, 1, -1)
        else:
            b1 = OpMulBinom(j - 1, i - 1, n + 1, -1, 1)
            b0 = OpMulBinom(j - 1, i - 1, n, -1, 1)
        parts.append(op_compose([OpScalar(-_ONE), b1, OpPartial(i - 1)]))
        parts.append(op_compose([OpScalar(-kconst(1 + n) * weights[i]), b0]))
    return op_sum(parts)


def bsa_reduced(j: int, lambdas: Sequence[int]) -> Op:
    """Reduced null-vector operator of order lambda_j + 1 at slot j."""
    weights = tuple(h_weight(l) for l in lambdas)
    lam = lambdas[j]
    parts = []
    for comp in compositions_of(lam + 1):
        coeff = bsa_coefficient(lam, comp)
        word = [witt_reduced(j, -p, weights) for p in comp]
        parts.append(op_compose([OpScalar(coeff)] + word))
    return op_sum(parts)


def witt_infinity(n: int, weights: Sequence[RatFunc]) -> Op:
    """Witt generator at infinity (x_0 specialized to 0): positive modes
    raise the total degree."""
    nv = len(weights) - 1
    parts = []
    for i in range(1, nv + 1):
        parts.append(op_compose([OpMulPow(i - 1, n + 1), OpPartial(i - 1)]))
        parts.append(
            op_compose([OpScalar(kconst(n + 1) * weights[i]), OpMulPow(i - 1, n)])
        )
    return op_sum(parts)


def bsa_infinity_operator(lambdas: Sequence[int], lam_inf: int) -> Op:
    """Null-vector operator for the label at infinity."""
    weights = tuple(h_weight(l) for l in lambdas)
    parts = []
    for comp in compositions_of(lam_inf + 1):
        coeff = bsa_coefficient(lam_inf, comp)
        word = [witt_infinity(p, weights) for p in comp]
        parts.append(op_compose([OpScalar(coeff)] + word))
    return op_sum(parts)


def annihilates(op: Op, s: FrobeniusSeries) -> bool:
    """True when op kills the series exactly through all supported orders."""
    return apply_operator(op, s).is_zero()


# ---------------------------------------------------------------------------
# Factored fractions: performance representation for the indicial recursion
#
# Coefficient denominators produced by the recursion are products of a few
# known monic factors (powers of kappa and the indicial polynomials), so
# cancellation by trial division is cheap, unlike generic polynomial gcd.

_KX = Poly([mpq(0), mpq(1)], "k")


class FFrac:
    """num / prod(factor^exp) with monic polynomial factors."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=None):
        self.num = num
        self.den = dict(den or {})

    @staticmethod
    def from_ratfunc(r: RatFunc) -> "FFrac":
        den = {}
        d = r.den
        if d.degree > 0:
            cs = d.coeffs
            if all(c == 0 for c in cs[:-1]) and cs[-1] == 1:
                den[_KX] = d.degree  # pure power of kappa
            else:
                den[d] = 1
        return FFrac(r.num, den)

    def to_ratfunc(self) -> RatFunc:
        red = self.reduced()
        den = None
        for f, e in red.den.items():
            for _ in range(e):
                den = f if den is None else den * f
        if den is None:
            return RatFunc(red.num)
        return RatFunc(red.num, den)

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def _coerce(self, other) -> "FFrac":
        if isinstance(other, FFrac):
            return other
        if isinstance(other, RatFunc):
            return FFrac.from_ratfunc(other)
        return NotImplemented

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        den = dict(self.den)
        for f, e in o.den.items():
            den[f] = den.get(f, 0) + e
        return FFrac(self.num * o.num, den)

    __rmul__ = __mul__

    def __neg__(self):
        return FFrac(-self.num, self.den)

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        den = {}
        for f in set(self.den) | set(o.den):
            den[f] = max(self.den.get(f, 0), o.den.get(f, 0))
        a = self.num
        for f, e in den.items():
            for _ in range(e - self.den.get(f, 0)):
                a = a * f
        b = o.num
        for f, e in den.items():
            for _ in range(e - o.den.get(f, 0)):
                b = b * f
        return FFrac(a + b, den)

    __radd__ = __add__

    def div_frac(self, other: "FFrac") -> "FFrac":
        num = self.num
        den = dict(self.den)
        for f, e in other.den.items():
            for _ in range(e):
                num = num * f
        g = other.num
        lead = g.leading()
        if lead != 1:
            g = g.monic()
            num = num.scale(1 / lead)
        if g.degree > 0:
            den[g] = den.get(g, 0) + 1
        return FFrac(num, den).reduced()

    def reduced(self) -> "FFrac":
        """Cancel the numerator against the denominator factors.

        Each factor is small, so gcd(num, factor) costs one long division
        plus a tiny Euclid; factors split when only partially shared.
        """
        num = self.num
        if num.is_zero():
            return FFrac(num, {})
        stack = []
        for f, e in self.den.items():
            if f.degree > 0:
                stack.extend([f] * e)
        den = {}
        while stack:
            f = stack.pop()
            g = num.gcd(f)
            if g.degree <= 0:
                den[f] = den.get(f, 0) + 1
                continue
            num = num.divmod(g)[0]
            f2 = f.divmod(g)[0]
            if f2.degree > 0:
                stack.append(f2)
        return FFrac(num, den)


# ---------------------------------------------------------------------------
# Indicial recursion driver


def indicial_solve(
    op: Op,
    base: Sequence[RatFunc],
    drop: int,
    K: int,
    level0: Dict[Offsets, RatFunc],
) -> Dict[Offsets, RatFunc]:
    """Solve op(C) = 0 order by order in the first-variable offset.

    The cone coefficients with first offset 0 are prescribed by
    ``level0`` (keyed by the remaining cone offsets); the operator must
    drop the first exponent by exactly ``drop`` in its leading part.
    Returns all cone coefficients with total order at most K, exactly.
    """
    base = tuple(base)
    nv = len(base)
    w = _weights(nv)
    assert min_gdeg(op, nv) == -(nv - 1) * drop if nv > 1 else True
    cap = K - (nv - 1) * drop

    flats = sorted(
        (f for f in _cone_offsets(nv, K)),
        key=lambda f: (f[0] if f else 0, f),
    )
    coeffs: Dict[Offsets, FFrac] = {}
    images: Dict[Offsets, Dict[Offsets, FFrac]] = {}

    def image(flat: Offsets) -> Dict[Offsets, FFrac]:
        if flat not in images:
            n = flat_to_exp(flat, nv)
            mono = ExpSeries(base, {n: _ONE}, None)
            img = apply_operator_exp(op, mono, out_gmax=cap)
            images[flat] = {m: FFrac.from_ratfunc(c) for m, c in img.coeffs.items()}
        return images[flat]

    for flat in flats:
        k1 = flat[0] if flat else 0
        if k1 == 0:
            rest = flat[1:] if nv > 1 else ()
            c = level0.get(rest, _ZERO)
            if not c.is_zero():
                coeffs[flat] = FFrac.from_ratfunc(c)
            continue
        n = flat_to_exp(flat, nv)
        s = (n[0] - drop,) + n[1:]
        # bucket contributions by exact denominator signature: adds within
        # a bucket are numerator adds, and only the few buckets need the
        # cancellation machinery
        buckets: Dict[tuple, FFrac] = {}
        for kf in sorted(coeffs, key=lambda f: (f[0], f)):
            t = image(kf).get(s)
            if t is None:
                continue
            term = coeffs[kf] * t
            key = tuple(sorted(term.den.items(), key=lambda it: (it[0].coeffs, it[1])))
            cur = buckets.get(key)
            if cur is None:
                buckets[key] = term
            else:
                buckets[key] = FFrac(cur.num + term.num, cur.den)
        diag = image(flat).get(s)
        if diag is None or diag.is_zero():
            raise IndicialDenominatorZero(
                f"indicial factor vanished at offset {flat}"
            )
        if not buckets:
            continue
        total = None
        for key in sorted(buckets, key=lambda k: sum(f.degree * e for f, e in k)):
            part = buckets[key]
            total = part if total is None else (total + part).reduced()
        c = (-total).div_frac(diag)
        if not c.is_zero():
            coeffs[flat] = c
    return {f: c.to_ratfunc() for f, c in coeffs.items()}


def _cone_offsets(nvars: int, K: int):
    if nvars <= 1:
        yield ()
        return

    def rec(prefix, remaining, slots):
        if slots == 0:
            yield tuple(prefix)
            return
        for v in range(remaining + 1):
            yield from rec(prefix + [v], remaining - v, slots - 1)

    yield from rec([], K, nvars - 1)


# ---------------------------------------------------------------------------
# Composition of intertwiners as a Frobenius series


@lru_cache(maxsize=None)
def compose_blocks(lambdas: Tuple[int, ...], sigmas: Tuple[int, ...], K: int) -> FrobeniusSeries:
    """Highest-weight matrix element of the composed intertwiners.

    lambdas = (l_0, l_1, ..., l_N, l_inf), sigmas admissible.  Output is
    normalized (unit zero-offset coefficient) with exponent base
    D_i = h(s_i) - h(l_i) - h(s_{i-1}) and prefactor prod_j beta_j; the
    x_1 coefficients are peeled first and the construction recurses on
    the remaining labels.
    """
    lambdas = tuple(lambdas)
    sigmas = tuple(sigmas)
    if K < 0:
        raise ValueError("negative truncation")
    if not is_admissible(lambdas, sigmas):
        raise NotAdmissible(f"{sigmas} is not {lambdas}-admissible")
    n = len(lambdas) - 2
    delta = tuple(
        h_weight(sigmas[i]) - h_weight(lambdas[i]) - h_weight(sigmas[i - 1])
        for i in range(1, n + 1)
    )
    prefactor = BetaProduct.one()
    for i in range(1, n + 1):
        prefactor = prefactor * beta_coef(lambdas[i], sigmas[i - 1], sigmas[i])
    if n == 1:
        return FrobeniusSeries(delta, K, {(): _ONE}, prefactor)

    sub = compose_blocks((sigmas[1],) + lambdas[2:], sigmas[1:], K)
    level0 = {k: c for k, c in sub.coeffs.items()}
    op = bsa_reduced(1, lambdas[:-1])
    coeffs = indicial_solve(op, delta, lambdas[1] + 1, K, level0)
    return FrobeniusSeries(delta, K, coeffs, prefactor)


# ---------------------------------------------------------------------------
# Numeric evaluation


def eval_series(
    s: FrobeniusSeries,
    kappa0: float,
    points: Sequence[float],
    with_tail: bool = False,
):
    """Numeric value prefactor * sum coeffs * monomials at positive,
    strictly increasing points; real powers on the principal branch.

    With ``with_tail`` the heuristic magnitude of the last included
    total order is returned alongside the value.
    """
    if len(points) != s.nvars:
        raise DomainViolation("point dimension mismatch")
    if any(p <= 0 for p in points) or any(
        points[i] >= points[i + 1] for i in range(len(points) - 1)
    ):
        raise DomainViolation("points must satisfy 0 < x_1 < ... < x_N")
    expo = [d.eval(kappa0).real for d in s.exponent_base]
    basev = 1.0
    for p, e in zip(points, expo):
        basev *= p**e
    total = 0.0
    tail = 0.0
    for flat, c in sorted(s.coeffs.items()):
        term = float(c.eval(kappa0).real)
        for i, k in enumerate(flat):
            term *= (points[i] / points[i + 1]) ** k
        total += term
        if sum(flat) == s.trunc:
            tail = max(tail, abs(term))
    pref = s.prefactor.eval(kappa0)
    value = pref * basev * total
    tail_est = abs(pref * basev) * tail
    if not _finite(value):
        raise PoleAtEvaluationPoint("series evaluation overflowed")
    if with_tail:
        return value, tail_est
    return value


def _finite(x: float) -> bool:
    return x == x and abs(x) != float("inf")
