"""Structured differential/multiplication operator expressions.

These nodes describe operators acting on formal series in variables
indexed 0..M-1: partial derivatives, multiplication by powers of a
single variable, and multiplication by integer powers of binomials
(x_big - x_small) or (x_big + x_small), always expanded in nonnegative
powers of x_small.  Trees are built from sums, compositions, and scalar
multiples.  The nodes are pure data; the series layer interprets them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

from .scalars import RatFunc


@dataclass(frozen=True)
class OpScalar:
    value: RatFunc


@dataclass(frozen=True)
class OpPartial:
    var: int


@dataclass(frozen=True)
class OpMulPow:
    """Multiply by x_var ** power (power may be negative)."""

    var: int
    power: int


@dataclass(frozen=True)
class OpMulBinom:
    """Multiply by a binomial power, expanded in powers of x_small.

    sign_big, sign_small in {+1, -1}: the binomial is
    (sign_big * x_big + sign_small * x_small) ** power, expanded as
    sum_t C(power, t) (sign_big x_big)^(power-t) (sign_small x_small)^t.
    """

    big: int
    small: int
    power: int
    sign_big: int = 1
    sign_small: int = -1


@dataclass(frozen=True)
class OpSum:
    parts: Tuple


@dataclass(frozen=True)
class OpCompose:
    """Composition; parts are applied right to left."""

    parts: Tuple


Op = object


def op_sum(parts) -> Op:
    parts = tuple(p for p in parts if p is not None)
    if len(parts) == 1:
        return parts[0]
    return OpSum(parts)


def op_compose(parts) -> Op:
    parts = tuple(parts)
    if len(parts) == 1:
        return parts[0]
    return OpCompose(parts)
