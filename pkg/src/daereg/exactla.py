"""Exact rational dense linear algebra.

Matrices are plain ``list[list[Fraction]]`` (row-major).  Nothing here
uses floating point; pivoting always takes the first admissible pivot.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

RatMatrix = list  # list[list[Fraction]]

__all__ = [
    "RatMatrix", "PriorityElimResult", "mat", "identity", "zeros", "shape",
    "transpose", "matmul", "matvec", "rank", "rref", "det", "inverse",
    "submatrix", "is_triangular_along", "eliminate_rows_with_priority",
    "eliminate_cols_with_priority", "poly_det_degree", "rank_factorization",
    "format_rational", "parse_rational", "to_strings", "from_strings",
]


def mat(rows) -> RatMatrix:
    return [[Fraction(x) for x in row] for row in rows]


def identity(n: int) -> RatMatrix:
    return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]


def zeros(r: int, c: int) -> RatMatrix:
    return [[Fraction(0)] * c for _ in range(r)]


def shape(M: RatMatrix, ncols: int | None = None) -> tuple[int, int]:
    if not M:
        return 0, (ncols or 0)
    return len(M), len(M[0])


def transpose(M: RatMatrix, ncols: int | None = None) -> RatMatrix:
    r, c = shape(M, ncols)
    return [[M[i][j] for i in range(r)] for j in range(c)]


def matmul(A: RatMatrix, B: RatMatrix) -> RatMatrix:
    if not A:
        return []
    Bt = list(zip(*B)) if B else []
    out = []
    for row in A:
        nz = [(k, a) for k, a in enumerate(row) if a]
        out.append([sum((a * col[k] for k, a in nz), Fraction(0)) for col in Bt])
    if not Bt:
        return [[] for _ in A]
    return out


def matvec(A: RatMatrix, x: Sequence) -> list:
    return [sum((a * b for a, b in zip(row, x) if a), Fraction(0)) for row in A]


def submatrix(M: RatMatrix, rows: Sequence[int], cols: Sequence[int]) -> RatMatrix:
    return [[M[i][j] for j in cols] for i in rows]


def rref(M: RatMatrix) -> tuple[RatMatrix, list[int]]:
    """Reduced row echelon form and pivot columns."""
    A = [list(row) for row in M]
    r, c = shape(A)
    pivots: list[int] = []
    row = 0
    for col in range(c):
        if row >= r:
            break
        piv = next((i for i in range(row, r) if A[i][col] != 0), None)
        if piv is None:
            continue
        A[row], A[piv] = A[piv], A[row]
        inv = 1 / A[row][col]
        A[row] = [x * inv for x in A[row]]
        prow = A[row]
        for i in range(r):
            if i != row and A[i][col] != 0:
                f = A[i][col]
                A[i] = [x - f * y for x, y in zip(A[i], prow)]
        pivots.append(col)
        row += 1
    return A, pivots


def rank(M: RatMatrix) -> int:
    """Exact rank by fraction-free (Bareiss-style) elimination on integers."""
    if not M or not M[0]:
        return 0
    rows = []
    for row in M:
        if not any(row):
            continue
        den = 1
        for x in row:
            if x:
                den = den * x.denominator // _gcd(den, x.denominator)
        rows.append([int(x * den) for x in row])
    if not rows:
        return 0
    ncols = len(rows[0])
    rk = 0
    for col in range(ncols):
        piv = next((i for i in range(rk, len(rows)) if rows[i][col] != 0), None)
        if piv is None:
            continue
        rows[rk], rows[piv] = rows[piv], rows[rk]
        p = rows[rk]
        pv = p[col]
        for i in range(rk + 1, len(rows)):
            f = rows[i][col]
            if f:
                ri = rows[i]
                new = [pv * a - f * b for a, b in zip(ri, p)]
                g = 0
                for a in new:
                    if a:
                        g = _gcd(g, a)
                        if g == 1:
                            break
                if g > 1:
                    new = [a // g for a in new]
                rows[i] = new
        rk += 1
        if rk == len(rows):
            break
    return rk


def _gcd(a: int, b: int) -> int:
    import math
    return math.gcd(a, b)


def det(M: RatMatrix) -> Fraction:
    n = len(M)
    A = [list(row) for row in M]
    d = Fraction(1)
    for col in range(n):
        piv = next((i for i in range(col, n) if A[i][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            A[col], A[piv] = A[piv], A[col]
            d = -d
        pv = A[col][col]
        d *= pv
        for i in range(col + 1, n):
            f = A[i][col]
            if f:
                f = f / pv
                A[i] = [x - f * y for x, y in zip(A[i], A[col])]
    return d


def inverse(M: RatMatrix) -> RatMatrix:
    n = len(M)
    aug = [list(row) + identity(n)[i] for i, row in enumerate(M)]
    R, piv = rref(aug)
    if piv[:n] != list(range(n)):
        raise ZeroDivisionError("matrix is singular")
    return [row[n:] for row in R]


def rank_factorization(M: RatMatrix) -> tuple[RatMatrix, RatMatrix]:
    """``M = B @ C`` with ``B`` = pivot columns of ``M`` and ``C`` = nonzero RREF rows."""
    R, piv = rref(M)
    C = R[:len(piv)]
    B = [[row[j] for j in piv] for row in M]
    return B, C


def is_triangular_along(E: RatMatrix, r: Sequence[int]) -> bool:
    """True when ``E[i][j] == 0`` whenever ``r[i] > r[j]``."""
    n = len(E)
    return all(E[i][j] == 0 for i in range(n) for j in range(n) if r[i] > r[j])


@dataclass
class PriorityElimResult:
    E: RatMatrix
    zero: tuple
    rank: int


def eliminate_rows_with_priority(M: RatMatrix, r: Sequence[int],
                                 ncols: int | None = None) -> PriorityElimResult:
    """Nonsingular ``E``, upper-triangular along ``r``, zeroing ``n - rank`` rows of ``E M``.

    Rows are scanned by decreasing priority (ties by increasing index)
    and reduced against the rows already kept, so a row only receives
    multiples of rows whose priority is at least its own.  Rows that
    reduce to zero are the zero rows.
    """
    n = len(M)
    if len(r) != n:
        raise ValueError("priority vector length must equal the row count")
    _, c = shape(M, ncols)
    order = sorted(range(n), key=lambda i: (-r[i], i))
    basis: list[tuple[int, list, dict]] = []  # (pivot col, reduced row, combo)
    E = identity(n)
    zero: list[int] = []
    for i in order:
        row = list(M[i]) if c else []
        combo = {i: Fraction(1)}
        for pc, brow, bcombo in basis:
            f = row[pc]
            if f:
                row = [x - f * y for x, y in zip(row, brow)]
                for k, v in bcombo.items():
                    combo[k] = combo.get(k, Fraction(0)) - f * v
        pc = next((j for j, x in enumerate(row) if x != 0), None)
        if pc is None:
            zero.append(i)
            E[i] = [combo.get(k, Fraction(0)) for k in range(n)]
        else:
            inv = 1 / row[pc]
            basis.append((pc, [x * inv for x in row], {k: v * inv for k, v in combo.items()}))
    zero.sort()
    return PriorityElimResult(E, tuple(zero), n - len(zero))


def eliminate_cols_with_priority(M: RatMatrix, r: Sequence[int],
                                 nrows: int | None = None) -> PriorityElimResult:
    """Column mirror: ``M E`` has ``n - rank`` zero columns, ``E`` triangular along ``r``."""
    c = len(r)
    Mt = transpose(M, c) if M else [[] for _ in range(c)]
    res = eliminate_rows_with_priority(Mt, [-x for x in r], ncols=nrows if nrows is not None else len(M))
    return PriorityElimResult(transpose(res.E), res.zero, res.rank)


def poly_det_degree(coeffs: Sequence[RatMatrix]):
    """Degree in ``s`` of ``det(sum_l A_l s^l)``; ``NEG_INF`` if identically zero.

    The determinant is sampled at ``k n + 1`` integer points and
    interpolated exactly (Newton divided differences).
    """
    from .symexpr import NEG_INF

    k = len(coeffs) - 1
    n = len(coeffs[0])
    if n == 0:
        return 0
    npts = k * n + 1
    xs = list(range(npts))
    ys = []
    for s in xs:
        A = [[sum((coeffs[l][i][j] * s ** l for l in range(k + 1)), Fraction(0))
              for j in range(n)] for i in range(n)]
        ys.append(det(A))
    # Newton coefficients
    dd = list(ys)
    newton = [dd[0]]
    for level in range(1, npts):
        dd = [(dd[i + 1] - dd[i]) / (xs[i + level] - xs[i]) for i in range(len(dd) - 1)]
        newton.append(dd[0])
    # expand Newton form into monomial coefficients
    poly = [Fraction(0)]
    for level in range(npts - 1, -1, -1):
        # poly = poly * (s - xs[level]) + newton[level]
        shifted = [Fraction(0)] + poly
        for i, a in enumerate(poly):
            shifted[i] -= xs[level] * a
        shifted[0] += newton[level]
        poly = shifted
    deg = max((i for i, a in enumerate(poly) if a != 0), default=None)
    return NEG_INF if deg is None else deg


def format_rational(x: Fraction) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def parse_rational(s) -> Fraction:
    if isinstance(s, str):
        return Fraction(s.replace("−", "-"))
    if isinstance(s, float):
        raise TypeError("floats are not accepted as exact rationals")
    return Fraction(s)


def to_strings(M: RatMatrix) -> list:
    return [[format_rational(x) for x in row] for row in M]


def from_strings(rows) -> RatMatrix:
    return [[parse_rational(x) for x in row] for row in rows]
