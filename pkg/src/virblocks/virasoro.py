"""Virasoro algebra layer at parametrized central charge.

Verma modules and first-row quotients with exact Q(kappa) coefficients,
PBW straightening, the explicit degree-(lambda+1) singular vectors, the
selection polynomial and its factorization, fusion rules, the Gamma
normalization constants of intertwiners, and the matrix-element
reduction engine that rewrites descendant matrix elements as operator
expressions acting on the highest-weight matrix element.

Partitions are weakly decreasing tuples (a_1 >= ... >= a_k > 0); the
partition (a_1, ..., a_k) labels the PBW vector L_{-a_1} ... L_{-a_k} v.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, Iterable, List, Sequence, Tuple

from gmpy2 import mpq

from .errors import GammaPole, SelectionRuleViolation
from .ops import Op, OpCompose, OpMulBinom, OpMulPow, OpPartial, OpScalar, OpSum, op_compose, op_sum
from .scalars import Poly, RatFunc, gamma, rat

Partition = Tuple[int, ...]

KVAR = "k"
_K = RatFunc.x(KVAR)
_ZERO = RatFunc.const(0, KVAR)
_ONE = RatFunc.const(1, KVAR)


def kconst(c) -> RatFunc:
    return RatFunc.const(mpq(c), KVAR)


def central_charge() -> RatFunc:
    """c(kappa) = 13 - 6(kappa/4 + 4/kappa)."""
    return kconst(13) - kconst(6) * (_K / 4 + 4 / _K)


@lru_cache(maxsize=None)
def h_weight(lam: int) -> RatFunc:
    """First-row conformal weight h_lambda = lambda(2(lambda+2)-kappa)/(2 kappa)."""
    return kconst(lam) * (kconst(2 * (lam + 2)) - _K) / (2 * _K)


def h_weight_poly(shift: int) -> Poly:
    """h(mu + shift) as a polynomial in mu over Q(kappa).

    h(mu) = mu^2/kappa + (2/kappa - 1/2) mu; used for the factorization
    identity in Q(kappa)[mu].
    """
    a = _ONE / _K
    b = kconst(2) / _K - kconst(mpq(1, 2))
    s = kconst(shift)
    # a (mu+s)^2 + b (mu+s)
    return Poly([a * s * s + b * s, 2 * a * s + b, a], "mu")


# ---------------------------------------------------------------------------
# PBW straightening

_CC = None


def _central() -> RatFunc:
    global _CC
    if _CC is None:
        _CC = central_charge()
    return _CC


@lru_cache(maxsize=None)
def _prepend(b: int, part: Partition) -> Tuple[Tuple[Partition, int], ...]:
    """L_{-b} applied to a PBW word; integer coefficients."""
    if not part or b >= part[0]:
        return (((b,) + part, 1),)
    a, rest = part[0], part[1:]
    acc: Dict[Partition, int] = {}
    for p, c in _prepend(b, rest):
        for p2, c2 in _prepend(a, p):
            acc[p2] = acc.get(p2, 0) + c * c2
    for p, c in _prepend(a + b, rest):
        acc[p] = acc.get(p, 0) + (a - b) * c
    return tuple((p, c) for p, c in sorted(acc.items()) if c != 0)


@lru_cache(maxsize=None)
def _act_pos(n: int, part: Partition, h: RatFunc) -> Tuple[Tuple[Partition, RatFunc], ...]:
    """L_n (n >= 1) applied to the PBW vector of `part` in Verma(h)."""
    if not part:
        return ()
    a, rest = part[0], part[1:]
    acc: Dict[Partition, RatFunc] = {}

    def add(p, c):
        if c.is_zero():
            return
        acc[p] = acc.get(p, _ZERO) + c

    for p, c in _act_pos(n, rest, h):
        for p2, c2 in _prepend(a, p):
            add(p2, c * c2)
    m = n - a
    coeff = kconst(n + a)
    if m > 0:
        for p, c in _act_pos(m, rest, h):
            add(p, coeff * c)
    elif m == 0:
        add(rest, coeff * (h + kconst(sum(rest))))
    else:
        for p, c in _prepend(-m, rest):
            add(p, coeff * kconst(c))
    if n == a:
        add(rest, kconst(mpq(n**3 - n, 12)) * _central())
    return tuple((p, c) for p, c in sorted(acc.items()) if not c.is_zero())


def act_word(n: int, part: Partition, h: RatFunc) -> Dict[Partition, RatFunc]:
    """L_n applied to a PBW word in Verma(h), any n, straightened."""
    if n > 0:
        return dict(_act_pos(n, part, h))
    if n == 0:
        return {part: h + kconst(sum(part))}
    return {p: kconst(c) for p, c in _prepend(-n, part)}


# ---------------------------------------------------------------------------
# Module vectors


@dataclass(frozen=True)
class ModuleLabel:
    kind: str  # 'verma' or 'firstrow'
    h: RatFunc = None
    lam: int = None

    @staticmethod
    def verma(h: RatFunc) -> "ModuleLabel":
        return ModuleLabel("verma", h=h)

    @staticmethod
    def firstrow(lam: int) -> "ModuleLabel":
        return ModuleLabel("firstrow", h=h_weight(lam), lam=lam)


class VermaVector:
    """Sparse vector in a Verma or first-row module; entries in Q(kappa)."""

    __slots__ = ("module", "entries")

    def __init__(self, module: ModuleLabel, entries: Dict[Partition, RatFunc] = None):
        self.module = module
        self.entries = {}
        if entries:
            for p, c in entries.items():
                if not c.is_zero():
                    self.entries[tuple(p)] = c

    @property
    def h(self) -> RatFunc:
        return self.module.h

    @staticmethod
    def highest_weight(module: ModuleLabel) -> "VermaVector":
        return VermaVector(module, {(): _ONE})

    def is_zero(self) -> bool:
        return not self.entries

    def items(self):
        return sorted(self.entries.items())

    def coeff(self, part: Partition) -> RatFunc:
        return self.entries.get(tuple(part), _ZERO)

    def __add__(self, other: "VermaVector") -> "VermaVector":
        if self.module != other.module:
            raise ValueError("module mismatch")
        out = dict(self.entries)
        for p, c in other.entries.items():
            s = out.get(p, _ZERO) + c
            if s.is_zero():
                out.pop(p, None)
            else:
                out[p] = s
        v = VermaVector(self.module)
        v.entries = out
        return v

    def __sub__(self, other):
        return self + other.scale(-_ONE)

    def scale(self, c: RatFunc) -> "VermaVector":
        v = VermaVector(self.module)
        if not c.is_zero():
            v.entries = {p: c * k for p, k in self.entries.items()}
        return v

    def __eq__(self, other):
        return (
            isinstance(other, VermaVector)
            and self.module == other.module
            and self.entries == other.entries
        )

    def __repr__(self):
        terms = ", ".join(f"{p}: {c}" for p, c in self.items())
        return f"VermaVector({self.module.kind}, {{{terms}}})"


def act_L(n: int, v: VermaVector) -> VermaVector:
    """Virasoro generator L_n, PBW-straightened; first-row vectors are
    reduced to their canonical quotient representatives."""
    acc: Dict[Partition, RatFunc] = {}
    for part, c in v.entries.items():
        for p, c2 in act_word(n, part, v.h).items():
            s = acc.get(p, _ZERO) + c * c2
            acc[p] = s
    out = VermaVector(v.module, acc)
    if v.module.kind == "firstrow":
        out = quotient_reduce(out)
    return out


# ---------------------------------------------------------------------------
# Singular vectors and the first-row quotient


def compositions_of(n: int) -> List[Tuple[int, ...]]:
    """Ordered compositions of n into positive parts, lexicographic."""
    if n == 0:
        return [()]
    out = []
    for first in range(1, n + 1):
        for rest in compositions_of(n - first):
            out.append((first,) + rest)
    return sorted(out)


def bsa_coefficient(lam: int, comp: Tuple[int, ...]) -> RatFunc:
    """Composition coefficient (-4/kappa)^(lam+1-k) (lam!)^2 / prod(...)."""
    k = len(comp)
    denom = 1
    for u in range(1, k):
        denom *= sum(comp[:u]) * sum(comp[u:])
    import math

    num = mpq(math.factorial(lam) ** 2, denom)
    return kconst(num) * (kconst(-4) / _K) ** (lam + 1 - k)


@lru_cache(maxsize=None)
def singular_vector(lam: int) -> VermaVector:
    """S_lam v in Verma(h_lam): the explicit degree-(lam+1) null vector."""
    module = ModuleLabel.verma(h_weight(lam))
    acc: Dict[Partition, RatFunc] = {}
    for comp in compositions_of(lam + 1):
        coeff = bsa_coefficient(lam, comp)
        terms: Dict[Partition, RatFunc] = {(): _ONE}
        for p in reversed(comp):
            nxt: Dict[Partition, RatFunc] = {}
            for part, c in terms.items():
                for p2, c2 in _prepend(p, part):
                    s = nxt.get(p2, _ZERO) + c * kconst(c2)
                    nxt[p2] = s
            terms = nxt
        for part, c in terms.items():
            s = acc.get(part, _ZERO) + coeff * c
            acc[part] = s
    return VermaVector(module, acc)


def partitions_of(d: int, maxpart: int = None) -> List[Partition]:
    """Partitions of d, parts weakly decreasing, lexicographically descending."""
    if maxpart is None:
        maxpart = d
    if d == 0:
        return [()]
    out = []
    for first in range(min(d, maxpart), 0, -1):
        for rest in partitions_of(d - first, first):
            out.append((first,) + rest)
    return out


@lru_cache(maxsize=None)
def _firstrow_echelon(lam: int, d: int) -> Tuple[Tuple[Partition, Tuple[Tuple[Partition, RatFunc], ...]], ...]:
    """Reduced row-echelon basis of the degree-d slice of the submodule
    generated by the singular vector, in Verma(h_lam) coordinates."""
    if d < lam + 1:
        return ()
    sv = singular_vector(lam)
    rows: List[Dict[Partition, RatFunc]] = []
    for part in partitions_of(d - lam - 1):
        vec = dict(sv.entries)
        for p in reversed(part):
            nxt: Dict[Partition, RatFunc] = {}
            for q, c in vec.items():
                for q2, c2 in _prepend(p, q):
                    s = nxt.get(q2, _ZERO) + c * kconst(c2)
                    nxt[q2] = s
            vec = nxt
        rows.append({p: c for p, c in vec.items() if not c.is_zero()})
    order = partitions_of(d)
    echelon: List[Tuple[Partition, Dict[Partition, RatFunc]]] = []
    for row in rows:
        for piv, prow in echelon:
            c = row.get(piv)
            if c is not None and not c.is_zero():
                for q, c2 in prow.items():
                    s = row.get(q, _ZERO) - c * c2
                    if s.is_zero():
                        row.pop(q, None)
                    else:
                        row[q] = s
        piv = next((p for p in order if p in row and not row[p].is_zero()), None)
        if piv is None:
            continue
        inv = row[piv].inv()
        row = {q: inv * c for q, c in row.items() if not c.is_zero()}
        for j, (piv2, prow2) in enumerate(echelon):
            c = prow2.get(piv)
            if c is not None and not c.is_zero():
                nrow = dict(prow2)
                for q, c2 in row.items():
                    s = nrow.get(q, _ZERO) - c * c2
                    if s.is_zero():
                        nrow.pop(q, None)
                    else:
                        nrow[q] = s
                echelon[j] = (piv2, nrow)
        echelon.append((piv, row))
    return tuple((piv, tuple(sorted(r.items()))) for piv, r in echelon)


def quotient_reduce(v: VermaVector) -> VermaVector:
    """Canonical representative in the first-row quotient; idempotent."""
    if v.module.kind != "firstrow":
        raise ValueError("quotient_reduce applies to first-row vectors")
    lam = v.module.lam
    out: Dict[Partition, RatFunc] = dict(v.entries)
    degrees = sorted({sum(p) for p in out})
    for d in degrees:
        for piv, row in _firstrow_echelon(lam, d):
            c = out.get(piv)
            if c is None or c.is_zero():
                continue
            for q, c2 in row:
                s = out.get(q, _ZERO) - c * c2
                if s.is_zero():
                    out.pop(q, None)
                else:
                    out[q] = s
    return VermaVector(v.module, out)


def hw_pairing(wprime: Partition, x: VermaVector) -> RatFunc:
    """<L_{-a_1}...L_{-a_k} v', X> with <v', v> = 1.

    Realized through the contragredient action: apply the transposed
    word (ascending modes, smallest part first) and read the coefficient
    of the empty partition.
    """
    cur = x
    for a in reversed(tuple(wprime)):
        cur = act_L(a, cur)
    return cur.coeff(())


# ---------------------------------------------------------------------------
# Selection polynomial

BivarPoly = Dict[Tuple[int, int], RatFunc]  # (deg h_in, deg h_out) -> Q(kappa)


@dataclass(frozen=True)
class SelectionPoly:
    """P_lam(h_in, h_out): monic of degree lam+1 in h_out over Q(kappa)[h_in]."""

    lam: int
    coeffs: Tuple[Tuple[Tuple[int, int], RatFunc], ...]

    def as_dict(self) -> BivarPoly:
        return dict(self.coeffs)

    def eval(self, h_in, h_out):
        """Substitute values for h_in and h_out (any common ring)."""
        total = None
        for (i, j), c in self.coeffs:
            term = c
            for _ in range(i):
                term = term * h_in
            for _ in range(j):
                term = term * h_out
            total = term if total is None else total + term
        return total

    def eval_hout_series(self, h_in: RatFunc) -> List[RatFunc]:
        """Coefficient list in h_out after substituting h_in."""
        out = [_ZERO] * (self.lam + 2)
        for (i, j), c in self.coeffs:
            out[j] = out[j] + c * h_in**i
        return out


def _bivar_mul(a: BivarPoly, b: BivarPoly) -> BivarPoly:
    out: BivarPoly = {}
    for (i1, j1), c1 in a.items():
        for (i2, j2), c2 in b.items():
            key = (i1 + i2, j1 + j2)
            s = out.get(key, _ZERO) + c1 * c2
            out[key] = s
    return {k: c for k, c in out.items() if not c.is_zero()}


@lru_cache(maxsize=None)
def selection_polynomial(lam: int) -> SelectionPoly:
    """Composition-sum construction of P_lam; checked monic in h_out."""
    h_lam = h_weight(lam)
    acc: BivarPoly = {}
    for comp in compositions_of(lam + 1):
        coeff = bsa_coefficient(lam, comp)
        prod: BivarPoly = {(0, 0): coeff}
        k = len(comp)
        for j in range(k):
            tail = sum(comp[j + 1 :])
            sign = -_ONE if comp[j] % 2 == 1 else _ONE
            factor: BivarPoly = {
                (0, 0): sign * (kconst(tail) + h_lam),
                (0, 1): -sign,
                (1, 0): sign * kconst(comp[j]),
            }
            prod = _bivar_mul(prod, factor)
        for key, c in prod.items():
            s = acc.get(key, _ZERO) + c
            acc[key] = s
    acc = {k: c for k, c in acc.items() if not c.is_zero()}
    lead = acc.get((0, lam + 1), _ZERO)
    if lead != _ONE:
        raise AssertionError("selection polynomial failed the monic check")
    return SelectionPoly(lam, tuple(sorted(acc.items())))


def fusion_allowed(lam: int, mu: int, nu: int) -> bool:
    """Nonzero intertwiner of first-row type exists iff nu in E(lam, mu)."""
    return (lam + mu + nu) % 2 == 0 and abs(lam - mu) <= nu <= lam + mu


# ---------------------------------------------------------------------------
# Gamma normalization constants


@dataclass(frozen=True)
class BetaProduct:
    """Product of Gamma factors Gamma(a + b * 4/kappa)^(+-1) times a rational.

    Kept symbolic; evaluated numerically on demand at a concrete kappa.
    """

    rational: mpq
    num: Tuple[Tuple[mpq, mpq], ...]
    den: Tuple[Tuple[mpq, mpq], ...]

    @staticmethod
    def one() -> "BetaProduct":
        return BetaProduct(mpq(1), (), ())

    @staticmethod
    def build(rational, num, den) -> "BetaProduct":
        cn = list(num)
        cd = []
        for f in den:
            if f in cn:
                cn.remove(f)
            else:
                cd.append(f)
        return BetaProduct(mpq(rational), tuple(sorted(cn)), tuple(sorted(cd)))

    def __mul__(self, other: "BetaProduct") -> "BetaProduct":
        return BetaProduct.build(
            self.rational * other.rational,
            self.num + other.num,
            self.den + other.den,
        )

    def eval(self, kappa0: float) -> float:
        t = 4.0 / kappa0
        val = float(self.rational)
        for a, b in self.num:
            val *= gamma(complex(float(a) + float(b) * t)).real
        for a, b in self.den:
            g = gamma(complex(float(a) + float(b) * t)).real
            if g == 0.0:
                raise GammaPole("denominator Gamma vanished")
            val /= g
        return val


def beta_coef(l_mid: int, l_in: int, l_out: int) -> BetaProduct:
    """Normalization constant of the intertwiner of type (mid, in, out).

    Symmetric in (l_mid, l_in).  Raises SelectionRuleViolation when
    l_out is not in E(l_mid, l_in).
    """
    if not fusion_allowed(l_mid, l_in, l_out):
        raise SelectionRuleViolation(f"{l_out} not in E({l_mid},{l_in})")
    ell = (l_mid + l_in - l_out) // 2
    import math

    num = []
    den = []
    for p in range(1, ell + 1):
        num.append((mpq(1), mpq(p)))
        num.append((mpq(1), -mpq(1 + l_in - p)))
        num.append((mpq(1), -mpq(1 + l_mid - p)))
        den.append((mpq(1), mpq(1)))
        den.append((mpq(2), -mpq(4 - 2 * p + l_in + l_mid + l_out, 2)))
    return BetaProduct.build(mpq(1, math.factorial(ell)), num, den)


# ---------------------------------------------------------------------------
# Matrix-element reduction engine

WordCombo = Dict[Partition, RatFunc]


def _binom_int(m: int, t: int) -> mpq:
    out = mpq(1)
    for s in range(t):
        out *= mpq(m - s, s + 1)
    return out


class ReduceEngine:
    """Rewrites descendant matrix elements of a composition of
    intertwiners into operator expressions applied to the
    highest-weight matrix element.

    Slots are numbered 1..N (slot i at abstract position i, variable
    index i-1 in the emitted operator nodes); weight data is
    (h_0, h_1, ..., h_N, h_inf) for ket, slots, and bra.  Each rewrite
    strictly reduces (ket length, bra length, total slot length), so
    the recursion terminates.
    """

    def __init__(self, weights: Sequence[RatFunc]):
        self.h_in = weights[0]
        self.h_out = weights[-1]
        self.slot_h = tuple(weights[1:-1])
        self.n = len(self.slot_h)
        self._memo: Dict = {}

    # -- linear-combination plumbing

    def _combo(self, bra: Partition, slots, ket: Partition, combos: Dict[int, WordCombo]) -> Op:
        """Sum over straightened replacements of the given slots."""
        parts = []
        items = sorted(combos.items())

        def rec(i, cur_slots, coeff):
            if i == len(items):
                v = self.value(bra, tuple(cur_slots), ket)
                parts.append(op_compose([OpScalar(coeff), v]) if coeff != _ONE else v)
                return
            slot_i, combo = items[i]
            for word, c in sorted(combo.items()):
                ns = list(cur_slots)
                ns[slot_i - 1] = word
                rec(i + 1, ns, coeff * c)

        rec(0, list(slots), _ONE)
        return op_sum(parts) if parts else OpScalar(_ZERO)

    def value(self, bra: Partition, slots: Tuple[Partition, ...], ket: Partition) -> Op:
        key = (bra, slots, ket)
        if key in self._memo:
            return self._memo[key]
        if ket:
            out = self._peel_ket(bra, slots, ket)
        elif bra:
            out = self._peel_bra(bra, slots)
        else:
            i = next((j for j in range(1, self.n + 1) if slots[j - 1]), None)
            if i is None:
                out = OpScalar(_ONE)
            else:
                out = self._peel_slot(slots, i)
        self._memo[key] = out
        return out

    def _slot_mod_terms(self, bra, slots, ket, j, k):
        """Terms for u_j -> L_{k-1} u_j (k >= 0): derivative wrap for
        k = 0, grading scalar for k = 1, straightened words beyond."""
        u = slots[j - 1]
        if k == 0:
            return op_compose([OpPartial(j - 1), self.value(bra, slots, ket)])
        if k == 1:
            c = self.slot_h[j - 1] + kconst(sum(u))
            return op_compose([OpScalar(c), self.value(bra, slots, ket)])
        combo = act_word(k - 1, u, self.slot_h[j - 1])
        if not combo:
            return None
        return self._combo(bra, slots, ket, {j: combo})

    def _peel_ket(self, bra, slots, ket) -> Op:
        n, ket2 = ket[0], ket[1:]
        parts = []
        # move L_{-n} to the bra side
        for p, c in act_word(n, bra, self.h_out).items():
            parts.append(op_compose([OpScalar(c), self.value(p, slots, ket2)]))
        # commutator with each slot
        for j in range(1, self.n + 1):
            kmax = sum(slots[j - 1]) + 1
            for k in range(0, kmax + 1):
                b = _binom_int(1 - n, k)
                if b == 0:
                    continue
                term = self._slot_mod_terms(bra, slots, ket2, j, k)
                if term is None:
                    continue
                parts.append(
                    op_compose(
                        [OpScalar(kconst(-b)), OpMulPow(j - 1, 1 - n - k), term]
                    )
                )
        return op_sum(parts) if parts else OpScalar(_ZERO)

    def _peel_bra(self, bra, slots) -> Op:
        n, bra2 = bra[0], bra[1:]
        parts = []
        for j in range(1, self.n + 1):
            kmax = sum(slots[j - 1]) + 1
            for k in range(0, kmax + 1):
                b = _binom_int(n + 1, k)
                if b == 0:
                    continue
                term = self._slot_mod_terms(bra2, slots, (), j, k)
                if term is None:
                    continue
                parts.append(
                    op_compose([OpScalar(kconst(b)), OpMulPow(j - 1, n + 1 - k), term])
                )
        return op_sum(parts) if parts else OpScalar(_ZERO)

    def _peel_slot(self, slots, i) -> Op:
        u = slots[i - 1]
        n, u2 = u[0], u[1:]
        slots2 = slots[:i - 1] + (u2,) + slots[i:]
        if n == 1:
            return op_compose([OpPartial(i - 1), self.value((), slots2, ())])
        parts = []
        sign_1n = _ONE if (1 - n) % 2 == 0 else -_ONE
        # derivative of every slot, from the L_{-1}-on-ket rewrite
        for j in range(1, self.n + 1):
            parts.append(
                op_compose(
                    [
                        OpScalar(sign_1n),
                        OpMulPow(i - 1, 1 - n),
                        OpPartial(j - 1),
                        self.value((), slots2, ()),
                    ]
                )
            )
        # ket-weight term
        c = kconst(n - 1) * (-_ONE if n % 2 == 1 else _ONE) * self.h_in
        parts.append(
            op_compose([OpScalar(c), OpMulPow(i - 1, -n), self.value((), slots2, ())])
        )
        # binomial-resummed commutators with the other slots
        for j in range(1, self.n + 1):
            if j == i:
                continue
            tmax = sum(slots2[j - 1]) + 1
            for t in range(0, tmax + 1):
                b = _binom_int(1 - n, t)
                if b == 0:
                    continue
                term = self._slot_mod_terms((), slots2, (), j, t)
                if term is None:
                    continue
                if j > i:
                    binom = OpMulBinom(j - 1, i - 1, 1 - n - t, 1, -1)
                else:
                    binom = OpMulBinom(i - 1, j - 1, 1 - n - t, -1, 1)
                parts.append(op_compose([OpScalar(kconst(-b)), binom, term]))
        return op_sum(parts)


def matrix_element_reduce(
    bra: Partition,
    insertions: Sequence,
    ket: Partition,
    weights: Sequence[RatFunc],
) -> Op:
    """Operator expression for the matrix element with descendants.

    `insertions` has one entry per intertwiner slot (innermost first),
    each either a partition or a {partition: coefficient} combination.
    `weights` = (h_0, h_1, ..., h_N, h_inf).  The result acts on the
    highest-weight matrix element of the same composition.
    """
    engine = ReduceEngine(weights)
    combos: Dict[int, WordCombo] = {}
    slots: List[Partition] = []
    for idx, ins in enumerate(insertions, start=1):
        if isinstance(ins, dict):
            combos[idx] = {tuple(p): c for p, c in ins.items()}
            slots.append(())
        else:
            slots.append(tuple(ins))
    if combos:
        return engine._combo(tuple(bra), tuple(slots), tuple(ket), combos)
    return engine.value(tuple(bra), tuple(slots), tuple(ket))


# ---------------------------------------------------------------------------
# One-variable interpretation (single intertwiner): Laurent multiples of x^Delta


class LaurentX:
    """Finite sum  sum_m c_m x^(delta + m)  with c_m in Q(kappa)."""

    __slots__ = ("delta", "coeffs")

    def __init__(self, delta: RatFunc, coeffs: Dict[int, RatFunc] = None):
        self.delta = delta
        self.coeffs = {m: c for m, c in (coeffs or {}).items() if not c.is_zero()}

    def __eq__(self, other):
        return (
            isinstance(other, LaurentX)
            and self.delta == other.delta
            and self.coeffs == other.coeffs
        )

    def __repr__(self):
        return f"LaurentX(delta={self.delta}, {self.coeffs})"


def apply_op_laurent(op: Op, lx: LaurentX) -> LaurentX:
    """Interpret an operator tree on one-variable Laurent data."""
    if isinstance(op, OpScalar):
        return LaurentX(lx.delta, {m: op.value * c for m, c in lx.coeffs.items()})
    if isinstance(op, OpMulPow):
        if op.var != 0:
            raise ValueError("one-variable data has a single slot")
        return LaurentX(lx.delta, {m + op.power: c for m, c in lx.coeffs.items()})
    if isinstance(op, OpPartial):
        if op.var != 0:
            raise ValueError("one-variable data has a single slot")
        return LaurentX(
            lx.delta,
            {m - 1: (lx.delta + kconst(m)) * c for m, c in lx.coeffs.items()},
        )
    if isinstance(op, OpSum):
        acc: Dict[int, RatFunc] = {}
        for part in op.parts:
            sub = apply_op_laurent(part, lx)
            for m, c in sub.coeffs.items():
                s = acc.get(m, _ZERO) + c
                acc[m] = s
        return LaurentX(lx.delta, acc)
    if isinstance(op, OpCompose):
        cur = lx
        for part in reversed(op.parts):
            cur = apply_op_laurent(part, cur)
        return cur
    raise ValueError(f"unsupported node for one-variable data: {op!r}")


def matrix_element_n1(
    bra: Partition,
    mid,
    ket: Partition,
    h_in: RatFunc,
    h_mid: RatFunc,
    h_out: RatFunc,
) -> LaurentX:
    """Single-intertwiner matrix element, reduced onto A x^Delta with A = 1."""
    tree = matrix_element_reduce(bra, [mid], ket, (h_in, h_mid, h_out))
    base = LaurentX(h_out - h_mid - h_in, {0: _ONE})
    return apply_op_laurent(tree, base)
