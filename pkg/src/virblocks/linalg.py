"""Dense exact linear algebra over a field (Q(q) or Q(kappa) elements).

Desk-scale dimensions only; plain Gaussian elimination with exact
arithmetic.  Rows and vectors are Python lists of field elements.
"""

from __future__ import annotations

from .errors import SingularBasis


def _is_zero(x) -> bool:
    z = x.is_zero() if hasattr(x, "is_zero") else (x == 0)
    return z


def rref(mat, zero, one):
    """Reduced row echelon form; returns (rows, pivot_columns)."""
    rows = [list(r) for r in mat]
    nrows = len(rows)
    ncols = len(rows[0]) if rows else 0
    pivots = []
    r = 0
    for c in range(ncols):
        pr = next((i for i in range(r, nrows) if not _is_zero(rows[i][c])), None)
        if pr is None:
            continue
        rows[r], rows[pr] = rows[pr], rows[r]
        inv = one / rows[r][c]
        rows[r] = [inv * x for x in rows[r]]
        for i in range(nrows):
            if i != r and not _is_zero(rows[i][c]):
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    return rows[:r], pivots


def nullspace(mat, ncols, zero, one):
    """Canonical basis of the right null space of mat (rows of length ncols)."""
    if not mat:
        basis = []
        for j in range(ncols):
            v = [zero] * ncols
            v[j] = one
            basis.append(v)
        return basis
    rows, pivots = rref(mat, zero, one)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        v = [zero] * ncols
        v[fc] = one
        for r, pc in enumerate(pivots):
            v[pc] = -rows[r][fc]
        basis.append(v)
    return basis


def solve_columns(cols, rhs, zero, one):
    """Coefficients x with sum_j x_j cols[j] = rhs, exact.

    The columns must be linearly independent and the system consistent;
    otherwise SingularBasis is raised.
    """
    n = len(rhs)
    k = len(cols)
    aug = [[cols[j][i] for j in range(k)] + [rhs[i]] for i in range(n)]
    rows, pivots = rref(aug, zero, one)
    if k in pivots:
        raise SingularBasis("inconsistent linear system")
    if pivots != list(range(k)):
        raise SingularBasis("columns are not linearly independent")
    x = [zero] * k
    for r, pc in enumerate(pivots):
        x[pc] = rows[r][k]
    return x


def invert(mat, zero, one):
    """Exact inverse of a square matrix; raises SingularBasis if singular."""
    n = len(mat)
    aug = [list(mat[i]) + [one if j == i else zero for j in range(n)] for i in range(n)]
    rows, pivots = rref(aug, zero, one)
    if pivots != list(range(n)):
        raise SingularBasis("singular matrix")
    return [r[n:] for r in rows]
