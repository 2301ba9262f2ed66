"""U_q(sl2) representation layer.

Irreducible representations M_lambda (dimension lambda+1) with basis
e_0, ..., e_lambda, tensor products via the coproduct, selection rules,
Clebsch-Gordan embeddings and projections, highest-weight spaces,
conformal-block vectors, and the quantum 6j symbols.

Tensor factors are displayed left-to-right in decreasing index order:
a shape (l_N, ..., l_1) means M_{l_N} (x) ... (x) M_{l_1}, and
multi-indices (j_N, ..., j_1) follow the same serialization.  All
coefficients are exact elements of Q(q).
"""

from __future__ import annotations

from functools import lru_cache
from typing import Dict, List, Sequence, Tuple

from . import linalg
from .errors import NotAdmissible, SelectionRuleViolation, SingularBasis
from .scalars import Poly, RatFunc, q_factorial, q_integer, rat

MultiIndex = Tuple[int, ...]

_ZERO = RatFunc.const(0, "q")
_ONE = RatFunc.const(1, "q")


def q_power(m: int) -> RatFunc:
    """q^m as an element of Q(q) (negative powers via the denominator)."""
    if m >= 0:
        return RatFunc(Poly([rat(0)] * m + [rat(1)], "q"))
    return RatFunc(Poly([rat(1)], "q"), Poly([rat(0)] * (-m) + [rat(1)], "q"))


# q - q^-1, the Clebsch-Gordan denominator building block
_QMQINV = q_power(1) - q_power(-1)


class QGVector:
    """Sparse vector in a tensor product of irreps; entries in Q(q)."""

    __slots__ = ("shape", "entries")

    def __init__(self, shape: Sequence[int], entries: Dict[MultiIndex, RatFunc] = None):
        self.shape = tuple(shape)
        self.entries = {}
        if entries:
            for idx, c in entries.items():
                self._check_index(idx)
                if not c.is_zero():
                    self.entries[tuple(idx)] = c

    def _check_index(self, idx):
        if len(idx) != len(self.shape):
            raise ValueError("multi-index length mismatch")
        for j, lam in zip(idx, self.shape):
            if not 0 <= j <= lam:
                raise ValueError(f"index {idx} out of bounds for shape {self.shape}")

    @staticmethod
    def basis(shape: Sequence[int], idx: MultiIndex) -> "QGVector":
        return QGVector(shape, {tuple(idx): _ONE})

    def is_zero(self) -> bool:
        return not self.entries

    def items(self):
        return sorted(self.entries.items())

    def coeff(self, idx: MultiIndex) -> RatFunc:
        return self.entries.get(tuple(idx), _ZERO)

    def __add__(self, other: "QGVector") -> "QGVector":
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        out = dict(self.entries)
        for idx, c in other.entries.items():
            s = out.get(idx, _ZERO) + c
            if s.is_zero():
                out.pop(idx, None)
            else:
                out[idx] = s
        v = QGVector(self.shape)
        v.entries = out
        return v

    def __sub__(self, other: "QGVector") -> "QGVector":
        return self + other.scale(-_ONE)

    def scale(self, c: RatFunc) -> "QGVector":
        v = QGVector(self.shape)
        if not c.is_zero():
            v.entries = {idx: c * val for idx, val in self.entries.items()}
        return v

    def __eq__(self, other):
        return (
            isinstance(other, QGVector)
            and self.shape == other.shape
            and self.entries == other.entries
        )

    def __repr__(self):
        terms = ", ".join(f"{idx}: {c}" for idx, c in self.items())
        return f"QGVector(shape={self.shape}, {{{terms}}})"


def tensor_weight(shape: Sequence[int], idx: MultiIndex) -> int:
    """K-eigenvalue exponent: K acts by q^w with w = sum(l_p - 2 j_p)."""
    return sum(l - 2 * j for l, j in zip(shape, idx))


def act_generator(g: str, v: QGVector) -> QGVector:
    """Action of E, F, K, or Kinv through the iterated coproduct.

    On a single factor: E.e_j = [j][l+1-j] e_{j-1}, F.e_j = e_{j+1},
    K.e_j = q^(l-2j) e_j.  On tensors, E carries K on the factors to its
    right and F carries K^-1 on the factors to its left.
    """
    shape = v.shape
    out = QGVector(shape)
    if g in ("K", "Kinv"):
        s = 1 if g == "K" else -1
        for idx, c in v.entries.items():
            out = out + QGVector(shape, {idx: c * q_power(s * tensor_weight(shape, idx))})
        return out
    if g not in ("E", "F"):
        raise ValueError(f"unknown generator {g!r}")
    for idx, c in v.entries.items():
        for p in range(len(shape)):
            lam, j = shape[p], idx[p]
            if g == "E":
                if j == 0:
                    continue
                coeff = c * q_integer(j) * q_integer(lam + 1 - j)
                # K on all factors to the right (display positions > p)
                w = sum(shape[r] - 2 * idx[r] for r in range(p + 1, len(shape)))
                coeff = coeff * q_power(w)
                nidx = idx[:p] + (j - 1,) + idx[p + 1 :]
            else:
                if j == lam:
                    continue
                # K^-1 on all factors to the left (display positions < p)
                w = sum(shape[r] - 2 * idx[r] for r in range(p))
                coeff = c * q_power(-w)
                nidx = idx[:p] + (j + 1,) + idx[p + 1 :]
            out = out + QGVector(shape, {nidx: coeff})
    return out


def selection_set(mu: int, lam: int) -> List[int]:
    """E(mu, lam): sigma with sigma+mu+lam even and |mu-lam| <= sigma <= mu+lam."""
    return [s for s in range(abs(mu - lam), mu + lam + 1, 2)]


@lru_cache(maxsize=None)
def cg_embed(sigma: int, lam: int, mu: int) -> Tuple[QGVector, ...]:
    """Columns of the embedding M_sigma -> M_lam (x) M_mu.

    Column m is the image of e^(sigma)_m; column 0 comes from the explicit
    double-sum formula, and the rest follow by applying F (module-map
    property).
    """
    if sigma not in selection_set(mu, lam):
        raise SelectionRuleViolation(f"{sigma} not in E({mu},{lam})")
    ell = (mu + lam - sigma) // 2
    fl = q_factorial(lam)
    fm = q_factorial(mu)
    denom_pow = _QMQINV**ell
    entries: Dict[MultiIndex, RatFunc] = {}
    for i in range(0, min(lam, ell) + 1):
        j = ell - i
        if j > mu:
            continue
        c = (
            q_factorial(mu - j)
            * q_factorial(lam - i)
            / (fm * fl * q_factorial(i) * q_factorial(j))
        )
        c = c * q_power(j * (mu + 1 - j)) / denom_pow
        if j % 2 == 1:
            c = -c
        entries[(i, j)] = c
    cols = [QGVector((lam, mu), entries)]
    for _ in range(sigma):
        cols.append(act_generator("F", cols[-1]))
    return tuple(cols)


def apply_embed_at(v: QGVector, pos: int, sigma: int, lam: int, mu: int) -> QGVector:
    """Expand factor `pos` (which must carry label sigma) into M_lam (x) M_mu."""
    if v.shape[pos] != sigma:
        raise ValueError("factor label mismatch")
    cols = cg_embed(sigma, lam, mu)
    new_shape = v.shape[:pos] + (lam, mu) + v.shape[pos + 1 :]
    out = QGVector(new_shape)
    acc: Dict[MultiIndex, RatFunc] = {}
    for idx, c in v.entries.items():
        for (i, j), cc in cols[idx[pos]].entries.items():
            nidx = idx[:pos] + (i, j) + idx[pos + 1 :]
            s = acc.get(nidx, _ZERO) + c * cc
            acc[nidx] = s
    out.entries = {k: c for k, c in acc.items() if not c.is_zero()}
    return out


@lru_cache(maxsize=None)
def _cg_project_rows(lam: int, mu: int, sigma: int):
    """Dual functionals of cg_embed: maps (i, j) -> {m: coefficient}.

    Computed weight space by weight space: on each K-eigenspace of
    M_lam (x) M_mu the images of all embeddings form a basis, and the
    projection row is the corresponding row of the inverse matrix.
    """
    if sigma not in selection_set(mu, lam):
        raise SelectionRuleViolation(f"{sigma} not in E({mu},{lam})")
    rows: Dict[MultiIndex, Dict[int, RatFunc]] = {}
    ell = (mu + lam - sigma) // 2
    for s in range(0, lam + mu + 1):
        basis = [(i, s - i) for i in range(max(0, s - mu), min(lam, s) + 1)]
        cols = []
        col_ids = []
        for sig2 in selection_set(mu, lam):
            m2 = s - (mu + lam - sig2) // 2
            if 0 <= m2 <= sig2:
                vec = cg_embed(sig2, lam, mu)[m2]
                cols.append([vec.coeff(b) for b in basis])
                col_ids.append((sig2, m2))
        if not cols:
            continue
        if len(cols) != len(basis):
            raise SingularBasis("Clebsch-Gordan completeness failure")
        mat = [[cols[j][i] for j in range(len(cols))] for i in range(len(basis))]
        inv = linalg.invert(mat, _ZERO, _ONE)
        m = s - ell
        if not 0 <= m <= sigma:
            continue
        r = col_ids.index((sigma, m))
        for bi, b in enumerate(basis):
            c = inv[r][bi]
            if not c.is_zero():
                rows.setdefault(b, {})[m] = c
    return rows


def apply_project_at(v: QGVector, pos: int, lam: int, mu: int, sigma: int) -> QGVector:
    """Contract factors (pos, pos+1) = (lam, mu) down to M_sigma."""
    if v.shape[pos] != lam or v.shape[pos + 1] != mu:
        raise ValueError("factor label mismatch")
    rows = _cg_project_rows(lam, mu, sigma)
    new_shape = v.shape[:pos] + (sigma,) + v.shape[pos + 2 :]
    acc: Dict[MultiIndex, RatFunc] = {}
    for idx, c in v.entries.items():
        row = rows.get((idx[pos], idx[pos + 1]))
        if not row:
            continue
        for m, cc in row.items():
            nidx = idx[:pos] + (m,) + idx[pos + 2 :]
            acc[nidx] = acc.get(nidx, _ZERO) + c * cc
    out = QGVector(new_shape)
    out.entries = {k: c for k, c in acc.items() if not c.is_zero()}
    return out


def cg_project(lam: int, mu: int, sigma: int):
    """The unique module map pi with pi o iota = id, as basis rows.

    Returns a dict (i, j) -> {m: coefficient in Q(q)} describing the
    image of e_i (x) e_j in M_sigma.
    """
    return {k: dict(v) for k, v in _cg_project_rows(lam, mu, sigma).items()}


def canonical_projector_at(v: QGVector, pos: int, sigma: int) -> QGVector:
    """iota o pi applied to the two factors at (pos, pos+1)."""
    lam, mu = v.shape[pos], v.shape[pos + 1]
    w = apply_project_at(v, pos, lam, mu, sigma)
    return apply_embed_at(w, pos, sigma, lam, mu)


def highest_weight_space(shape: Sequence[int], sigma: int) -> List[QGVector]:
    """Exact basis of Ker(E) within the K = q^sigma eigenspace."""
    shape = tuple(shape)
    basis = [
        idx
        for idx in _all_indices(shape)
        if tensor_weight(shape, idx) == sigma
    ]
    if not basis:
        return []
    target = [
        idx for idx in _all_indices(shape) if tensor_weight(shape, idx) == sigma + 2
    ]
    tpos = {idx: i for i, idx in enumerate(target)}
    mat = []
    for _ in target:
        mat.append([_ZERO] * len(basis))
    for bi, idx in enumerate(basis):
        img = act_generator("E", QGVector.basis(shape, idx))
        for tidx, c in img.entries.items():
            mat[tpos[tidx]][bi] = c
    if target:
        vecs = linalg.nullspace(mat, len(basis), _ZERO, _ONE)
    else:
        vecs = linalg.nullspace([], len(basis), _ZERO, _ONE)
    out = []
    for vec in vecs:
        qv = QGVector(shape, {basis[i]: c for i, c in enumerate(vec) if not c.is_zero()})
        out.append(qv)
    return out


def _all_indices(shape):
    if not shape:
        yield ()
        return
    for j in range(shape[0] + 1):
        for rest in _all_indices(shape[1:]):
            yield (j,) + rest


def is_admissible(lambdas: Sequence[int], sigmas: Sequence[int]) -> bool:
    """lambdas = (l_0, ..., l_N, l_inf), sigmas = (s_0, ..., s_N)."""
    lambdas = tuple(lambdas)
    sigmas = tuple(sigmas)
    n = len(lambdas) - 2
    if len(sigmas) != n + 1 or n < 0:
        raise ValueError("inconsistent sequence lengths")
    if sigmas[0] != lambdas[0] or sigmas[n] != lambdas[n + 1]:
        return False
    return all(
        lambdas[j] in selection_set(sigmas[j], sigmas[j - 1]) for j in range(1, n + 1)
    )


def admissible_sequences(lambdas: Sequence[int]) -> List[Tuple[int, ...]]:
    """All admissible intermediate-weight sequences for the given labels."""
    lambdas = tuple(lambdas)
    n = len(lambdas) - 2
    seqs = [(lambdas[0],)]
    for j in range(1, n + 1):
        seqs = [
            s + (nxt,)
            for s in seqs
            for nxt in selection_set(lambdas[j], s[-1])
        ]
    return [s for s in seqs if s[-1] == lambdas[n + 1]]


def conformal_block_vector(lambdas: Sequence[int], sigmas: Sequence[int]) -> QGVector:
    """Image of the highest-weight vector under the nested embeddings.

    Output lives in M_{l_N} (x) ... (x) M_{l_1} (x) M_{l_0}; it is a
    highest-weight vector with K-eigenvalue q^(l_inf).
    """
    if not is_admissible(lambdas, sigmas):
        raise NotAdmissible(f"{sigmas} is not {lambdas}-admissible")
    lambdas = tuple(lambdas)
    sigmas = tuple(sigmas)
    n = len(lambdas) - 2
    v = QGVector.basis((lambdas[n + 1],), (0,))
    for j in range(n, 0, -1):
        # rightmost factor currently carries sigma_j; expand it
        v = apply_embed_at(v, len(v.shape) - 1, sigmas[j], lambdas[j], sigmas[j - 1])
    return v


def sixj(sigma: int, l3: int, l2: int, l1: int, kidx: int, nu: int) -> RatFunc:
    """Quantum 6j symbol from the change of Clebsch-Gordan bases."""
    table = sixj_table(sigma, l3, l2, l1)
    try:
        return table[(kidx, nu)]
    except KeyError:
        raise SelectionRuleViolation(
            f"(kidx={kidx}, nu={nu}) invalid for (sigma,l3,l2,l1)=({sigma},{l3},{l2},{l1})"
        )


@lru_cache(maxsize=None)
def sixj_table(sigma: int, l3: int, l2: int, l1: int) -> Dict[Tuple[int, int], RatFunc]:
    """All 6j symbols for fixed (sigma, l3, l2, l1), exact in Q(q).

    For each kidx in E(sigma,l3) & E(l2,l1) the composite embedding
    through kidx is expanded in the basis of composites through
    nu in E(sigma,l1) & E(l3,l2), by an exact linear solve on the
    weight-sigma subspace of the triple tensor product.
    """
    kappas = [k for k in selection_set(sigma, l3) if k in selection_set(l2, l1)]
    nus = [n for n in selection_set(sigma, l1) if n in selection_set(l3, l2)]
    if not kappas or not nus:
        return {}
    shape = (l3, l2, l1)
    basis = [
        idx for idx in _all_indices(shape) if tensor_weight(shape, idx) == sigma
    ]
    bpos = {idx: i for i, idx in enumerate(basis)}

    def to_coords(v: QGVector):
        col = [_ZERO] * len(basis)
        for idx, c in v.entries.items():
            col[bpos[idx]] = c
        return col

    cols = []
    for nu in nus:
        w = QGVector.basis((sigma,), (0,))
        w = apply_embed_at(w, 0, sigma, nu, l1)
        w = apply_embed_at(w, 0, nu, l3, l2)
        cols.append(to_coords(w))
    table: Dict[Tuple[int, int], RatFunc] = {}
    for kidx in kappas:
        u = QGVector.basis((sigma,), (0,))
        u = apply_embed_at(u, 0, sigma, l3, kidx)
        u = apply_embed_at(u, 1, kidx, l2, l1)
        coeffs = linalg.solve_columns(cols, to_coords(u), _ZERO, _ONE)
        for nu, c in zip(nus, coeffs):
            table[(kidx, nu)] = c
    return table
