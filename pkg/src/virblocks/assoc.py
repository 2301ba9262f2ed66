"""Machine verification of intertwiner associativity.

The four-point matrix element is expanded in two regimes: regime A
composes two intertwiners (series in x_1/x_2), regime B nests them
(series in y/x with y = x_2 - x_1, x = x_1).  Regime B branches are
recombined with exact 6j symbols evaluated at q = exp(4 pi i / kappa),
and the two numeric values are compared at a point in the overlap of
the convergence domains.  Descendant insertions are handled by the
matrix-element reduction engine on both sides.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, Optional, Sequence, Tuple

from .errors import DomainViolation, SelectionRuleViolation
from .ops import (
    Op,
    OpCompose,
    OpMulBinom,
    OpMulPow,
    OpPartial,
    OpScalar,
    OpSum,
    op_compose,
    op_sum,
)
from .qgroup import selection_set, sixj_table
from .scalars import DEFAULT_KAPPA, RatFunc
from .series import (
    ExpSeries,
    FrobeniusSeries,
    apply_operator,
    compose_blocks,
    eval_series,
    indicial_solve,
)
from .virasoro import (
    BetaProduct,
    beta_coef,
    bsa_coefficient,
    compositions_of,
    h_weight,
    kconst,
    matrix_element_reduce,
)

_ONE = kconst(1)
_ZERO = kconst(0)

Labels = Tuple[int, int, int, int]  # (l_0, l_1, l_2, l_inf)


def regime_b_weights(labels: Labels) -> Tuple[int, ...]:
    """Intermediate labels mu admissible for the nested expansion."""
    l0, l1, l2, linf = labels
    return tuple(m for m in selection_set(l1, l2) if m in selection_set(l0, linf))


def expand_regime_A(labels: Labels, sigma: int, K: int) -> FrobeniusSeries:
    """Composition series in (x_1, x_2); delegates to the block engine."""
    l0, l1, l2, linf = labels
    return compose_blocks((l0, l1, l2, linf), (l0, sigma, linf), K)


# ---------------------------------------------------------------------------
# Regime B: hatted operators in (y, x), variables ordered (y, x) = (0, 1)


def witt_hat(n: int, h0: RatFunc, h1: RatFunc) -> Op:
    """Reduced Witt generator in the nested coordinates (x, y):

    -(-x-y)^n ((-x-y) d/dx + (1+n) h0) - (-y)^n ((-y)(d/dx - d/dy) + (1+n) h1)
    """
    sgn = _ONE if n % 2 == 0 else -_ONE
    dx = OpPartial(1)
    dy = OpPartial(0)
    dx_minus_dy = op_sum([dx, op_compose([OpScalar(-_ONE), dy])])
    parts = [
        op_compose([OpScalar(sgn), OpMulBinom(1, 0, n + 1, 1, 1), dx]),
        op_compose([OpScalar(-sgn * kconst(1 + n) * h0), OpMulBinom(1, 0, n, 1, 1)]),
        op_compose([OpScalar(sgn), OpMulPow(0, n + 1), dx_minus_dy]),
        op_compose([OpScalar(-sgn * kconst(1 + n) * h1), OpMulPow(0, n)]),
    ]
    return op_sum(parts)


def bsa_hat(labels: Labels) -> Op:
    """Null-vector operator for the nested expansion (order lambda_2 + 1)."""
    l0, l1, l2, _ = labels
    h0 = h_weight(l0)
    h1 = h_weight(l1)
    parts = []
    for comp in compositions_of(l2 + 1):
        coeff = bsa_coefficient(l2, comp)
        word = [witt_hat(-p, h0, h1) for p in comp]
        parts.append(op_compose([OpScalar(coeff)] + word))
    return op_sum(parts)


@lru_cache(maxsize=None)
def expand_regime_B(labels: Labels, mu: int, K: int) -> FrobeniusSeries:
    """Nested series in C[[y/x]] y^(Dhat) x^(Dhat'), normalized, with
    prefactor beta(l2; l1, mu) beta(mu; l0, l_inf)."""
    l0, l1, l2, linf = labels
    if mu not in regime_b_weights(labels):
        raise SelectionRuleViolation(f"mu={mu} invalid for labels {labels}")
    dhat = h_weight(mu) - h_weight(l2) - h_weight(l1)
    dhat_p = h_weight(linf) - h_weight(mu) - h_weight(l0)
    op = bsa_hat(labels)
    coeffs = indicial_solve(op, (dhat, dhat_p), l2 + 1, K, {(): _ONE})
    prefactor = beta_coef(l2, l1, mu) * beta_coef(mu, l0, linf)
    return FrobeniusSeries((dhat, dhat_p), K, coeffs, prefactor)


# ---------------------------------------------------------------------------
# Reports


@dataclass
class AssocReport:
    labels: Labels
    sigma: int
    point: Tuple[float, float]
    kappa0: float
    trunc_a: int
    trunc_b: int
    tol: float
    value_a: complex
    value_b: complex
    abs_diff: float
    rel_diff: float
    sixj_values: Dict[int, complex]
    verdict: bool
    insertions: Dict[str, Tuple[int, ...]] = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "labels": list(self.labels),
            "sigma": self.sigma,
            "point": list(self.point),
            "kappa": self.kappa0,
            "trunc_a": self.trunc_a,
            "trunc_b": self.trunc_b,
            "tol": self.tol,
            "value_a": {"re": self.value_a.real, "im": self.value_a.imag},
            "value_b": {"re": self.value_b.real, "im": self.value_b.imag},
            "abs_diff": self.abs_diff,
            "rel_diff": self.rel_diff,
            "sixj": {
                str(m): {"re": v.real, "im": v.imag}
                for m, v in sorted(self.sixj_values.items())
            },
            "insertions": {k: list(v) for k, v in sorted(self.insertions.items())},
            "verdict": self.verdict,
        }


def _check_point(point) -> Tuple[float, float]:
    x1, x2 = float(point[0]), float(point[1])
    if not (0.0 < x2 - x1 < x1 < x2):
        raise DomainViolation(
            "point must satisfy 0 < x2 - x1 < x1 < x2 (overlap of both regimes)"
        )
    return x1, x2


def _sixj_at_q(labels: Labels, sigma: int, kappa0: float) -> Dict[int, complex]:
    l0, l1, l2, linf = labels
    q0 = cmath.exp(4j * cmath.pi / kappa0)
    table = sixj_table(linf, l2, l1, l0)
    out = {}
    for mu in regime_b_weights(labels):
        out[mu] = table[(sigma, mu)].eval(q0)
    return out


def _stable_sum(terms) -> complex:
    total = 0j
    for t in sorted(terms, key=abs):
        total += t
    return total


def assoc_check(
    labels: Labels,
    sigma: int,
    point: Sequence[float] = (0.8, 1.0),
    kappa0: float = DEFAULT_KAPPA,
    K: int = 24,
    tol: float = 1e-8,
    sixj_override: Optional[Dict[int, complex]] = None,
) -> AssocReport:
    """Compare the two regime expansions at a point in the overlap.

    ``sixj_override`` substitutes specific 6j values (negative controls).
    """
    labels = tuple(labels)
    l0, l1, l2, linf = labels
    if sigma not in selection_set(l0, l1) or sigma not in selection_set(l2, linf):
        raise SelectionRuleViolation(f"sigma={sigma} invalid for labels {labels}")
    x1, x2 = _check_point(point)
    value_a = eval_series(expand_regime_A(labels, sigma, K), kappa0, (x1, x2))
    weights = _sixj_at_q(labels, sigma, kappa0)
    if sixj_override:
        weights = {**weights, **sixj_override}
    terms = []
    for mu in regime_b_weights(labels):
        vb = eval_series(expand_regime_B(labels, mu, K), kappa0, (x2 - x1, x1))
        terms.append(weights[mu] * vb)
    value_b = _stable_sum(terms)
    return _report(labels, sigma, (x1, x2), kappa0, K, K, tol, value_a, value_b, weights)


def _report(labels, sigma, point, kappa0, ka, kb, tol, va, vb, weights, insertions=None):
    va = complex(va)
    vb = complex(vb)
    abs_diff = abs(va - vb)
    rel_diff = abs_diff / max(abs(va), abs(vb), 1e-300)
    return AssocReport(
        labels=tuple(labels),
        sigma=sigma,
        point=tuple(point),
        kappa0=kappa0,
        trunc_a=ka,
        trunc_b=kb,
        tol=tol,
        value_a=va,
        value_b=vb,
        abs_diff=abs_diff,
        rel_diff=rel_diff,
        sixj_values=dict(weights),
        verdict=bool(rel_diff <= tol),
        insertions=dict(insertions or {}),
    )


# ---------------------------------------------------------------------------
# Descendant insertions

_SLOTS = ("w0", "w1", "w2", "winf")


def _to_regime_b_op(op: Op) -> Op:
    """Reinterpret slot-position operator nodes in nested coordinates.

    Slot positions (x_1, x_2) become (x, x+y); slot derivatives become
    (d/dx - d/dy, d/dy); position differences become powers of y.
    Variables in the output are ordered (y, x) = (0, 1).
    """
    if isinstance(op, OpScalar):
        return op
    if isinstance(op, OpPartial):
        if op.var == 0:
            return op_sum([OpPartial(1), op_compose([OpScalar(-_ONE), OpPartial(0)])])
        return OpPartial(0)
    if isinstance(op, OpMulPow):
        if op.var == 0:
            return OpMulPow(1, op.power)
        return OpMulBinom(1, 0, op.power, 1, 1)
    if isinstance(op, OpMulBinom):
        # (p_2 - p_1)^m = y^m; (-p_2 + p_1)^m = (-y)^m
        if {op.big, op.small} != {0, 1}:
            raise ValueError("unexpected binomial in a two-slot reduction")
        neg = op.sign_big == -1 if op.big == 1 else op.sign_small == -1
        sgn = -_ONE if (neg and op.power % 2 == 1) else _ONE
        return op_compose([OpScalar(sgn), OpMulPow(0, op.power)])
    if isinstance(op, OpSum):
        return op_sum([_to_regime_b_op(p) for p in op.parts])
    if isinstance(op, OpCompose):
        return op_compose([_to_regime_b_op(p) for p in op.parts])
    raise TypeError(f"unknown operator node {op!r}")


def _eval_exp(es: ExpSeries, prefactor: BetaProduct, kappa0: float, points) -> float:
    expo = [d.eval(kappa0).real for d in es.base]
    total = 0.0
    for n, c in sorted(es.coeffs.items()):
        term = float(c.eval(kappa0).real)
        for p, e, ni in zip(points, expo, n):
            term *= p ** (e + ni)
        total += term
    return prefactor.eval(kappa0) * total


def descendant_assoc_check(
    labels: Labels,
    sigma: int,
    insertions: Dict[str, Sequence[int]],
    point: Sequence[float] = (0.8, 1.0),
    kappa0: float = DEFAULT_KAPPA,
    K: int = 24,
    tol: float = 1e-7,
) -> AssocReport:
    """Associativity with descendant vectors in the four slots.

    ``insertions`` maps slot names 'w0', 'w1', 'w2', 'winf' to
    partitions (PBW words applied to the highest-weight vectors).  Both
    regimes are reduced to operator expressions acting on their
    highest-weight series and compared numerically.
    """
    labels = tuple(labels)
    l0, l1, l2, linf = labels
    if sigma not in selection_set(l0, l1) or sigma not in selection_set(l2, linf):
        raise SelectionRuleViolation(f"sigma={sigma} invalid for labels {labels}")
    ins = {k: tuple(insertions.get(k, ())) for k in _SLOTS}
    unknown = set(insertions) - set(_SLOTS)
    if unknown:
        raise ValueError(f"unknown slots {sorted(unknown)}")
    x1, x2 = _check_point(point)
    weights_h = (h_weight(l0), h_weight(l1), h_weight(l2), h_weight(linf))
    tree = matrix_element_reduce(ins["winf"], [ins["w1"], ins["w2"]], ins["w0"], weights_h)

    fs_a = expand_regime_A(labels, sigma, K)
    value_a = _eval_exp(apply_operator(tree, fs_a), fs_a.prefactor, kappa0, (x1, x2))

    tree_b = _to_regime_b_op(tree)
    weights = _sixj_at_q(labels, sigma, kappa0)
    terms = []
    for mu in regime_b_weights(labels):
        fs_b = expand_regime_B(labels, mu, K)
        vb = _eval_exp(apply_operator(tree_b, fs_b), fs_b.prefactor, kappa0, (x2 - x1, x1))
        terms.append(weights[mu] * vb)
    value_b = _stable_sum(terms)
    return _report(
        labels, sigma, (x1, x2), kappa0, K, K, tol, value_a, value_b, weights,
        insertions={k: v for k, v in ins.items() if v},
    )
