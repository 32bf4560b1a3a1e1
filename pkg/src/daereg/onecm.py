"""Rank of 1CM matrices and the vanishing-pair algorithm.

A 1CM matrix ``A0 + sum_k alpha_k b_k c_k^T`` is lifted to a layered
mixed matrix of size ``n + 2m`` (columns ``u | w | x``)::

    [ I_m   0    C^T ]      u + C^T x = 0
    [ 0     B    A0  ]      B w + A0 x = 0
    [ s_k at (k, u_k) and t_k at (k, w_k) ]

whose rank is ``rank A + 2m``.  A minimiser ``X`` of the layered rank
formula yields ``I = {k : u_k, w_k in X}``, which minimises the bordered
matrix rank ``[[A0, B[I]], [C[~I]^T, 0]]``.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from . import exactla as la
from .jacobian import OneCMMatrix
from .matroid import LayeredMixedMatrix, lm_rank, trank

log = logging.getLogger(__name__)

__all__ = [
    "OneCMRank", "VanishingPair", "layered_sparse_rep", "sparse_rep",
    "bordered_matrix", "rank_1cm", "vanishing_pair", "validate_vanishing_pair",
    "ValidationResult", "symbolic_support",
]


@dataclass(frozen=True)
class OneCMRank:
    rank: int
    I: tuple
    lm_rank: int
    fallback: bool = False


@dataclass(frozen=True)
class VanishingPair:
    U: list
    V: list
    rows: tuple
    cols: tuple
    p: tuple
    q: tuple

    @property
    def block_size(self) -> int:
        return len(self.rows) + len(self.cols)

    def to_json(self) -> dict:
        return {"U": la.to_strings(self.U), "V": la.to_strings(self.V),
                "zero_block": {"rows": list(self.rows), "cols": list(self.cols)},
                "p": list(self.p), "q": list(self.q)}


def layered_sparse_rep(A: OneCMMatrix) -> LayeredMixedMatrix:
    n, m = A.n, A.m
    Q = []
    for k, f in enumerate(A.factors):
        Q.append([Fraction(int(j == k)) for j in range(m)] + [Fraction(0)] * m + list(f.c))
    for i in range(n):
        Q.append([Fraction(0)] * m + [f.b[i] for f in A.factors] + list(A.A0[i]))
    T = [(k, k) for k in range(m)] + [(k, m + k) for k in range(m)]
    return LayeredMixedMatrix(Q, T, n + 2 * m, m)


def sparse_rep(A: OneCMMatrix, diag: Sequence[Fraction]) -> list:
    """``[[A0, B], [C^T, D]]`` with ``D = diag(diag)``; equals ``A`` at ``alpha = -1/d``."""
    n, m = A.n, A.m
    rows = [list(A.A0[i]) + [f.b[i] for f in A.factors] for i in range(n)]
    for k, f in enumerate(A.factors):
        rows.append(list(f.c) + [Fraction(diag[k]) if j == k else Fraction(0) for j in range(m)])
    return rows


def bordered_matrix(A: OneCMMatrix, I: Sequence[int]) -> list:
    Iset = set(I)
    rest = [k for k in range(A.m) if k not in Iset]
    I = sorted(Iset)
    rows = [list(A.A0[i]) + [A.factors[k].b[i] for k in I] for i in range(A.n)]
    rows += [list(A.factors[k].c) + [Fraction(0)] * len(I) for k in rest]
    return rows


def _bordered_rank(A: OneCMMatrix, I: Sequence[int]) -> int:
    return la.rank(bordered_matrix(A, I))


def rank_1cm(A: OneCMMatrix, brute_force_limit: int = 20) -> OneCMRank:
    n, m = A.n, A.m
    if m == 0:
        return OneCMRank(la.rank(A.A0), (), la.rank(A.A0))
    cert = lm_rank(layered_sparse_rep(A))
    r = cert.rank - 2 * m
    X = set(cert.I)
    I = tuple(k for k in range(m) if k in X and m + k in X)
    if _bordered_rank(A, I) == r:
        return OneCMRank(r, I, cert.rank)
    log.warning("index extraction self-check failed; minimising over subsets")
    if m > brute_force_limit:
        raise AssertionError("1CM rank self-check failed and m is too large for brute force")
    best = None
    for size in range(m + 1):
        for sub in itertools.combinations(range(m), size):
            v = _bordered_rank(A, sub)
            if best is None or v < best[0]:
                best = (v, sub)
    if best[0] != r:
        raise AssertionError(f"1CM rank mismatch: layered {r}, bordered {best[0]}")
    return OneCMRank(r, best[1], cert.rank, fallback=True)


def vanishing_pair(A: OneCMMatrix, p: Sequence[int], q: Sequence[int],
                   rank_info: OneCMRank | None = None) -> VanishingPair | None:
    """A vanishing pair triangular along ``(p, q)``; ``None`` if ``A`` is nonsingular."""
    n, m = A.n, A.m
    info = rank_info or rank_1cm(A)
    if info.rank == n:
        return None
    I = list(info.I)
    rest = [k for k in range(m) if k not in set(I)]
    BI = A.B(I)
    Ures = la.eliminate_rows_with_priority(BI, p, ncols=len(I))
    S = list(Ures.zero)
    CtR = A.Ct(rest)
    Vres = la.eliminate_cols_with_priority(CtR, q, nrows=len(rest)) if rest else \
        la.PriorityElimResult(la.identity(n), tuple(range(n)), 0)
    T = list(Vres.zero)
    U, V = Ures.E, Vres.E
    UA0V = la.matmul(la.matmul(U, A.A0), V)
    sub = la.submatrix(UA0V, S, T)
    Wres = la.eliminate_rows_with_priority(sub, [p[i] for i in S], ncols=len(T))
    W = la.identity(n)
    for a, i in enumerate(S):
        for b, k in enumerate(S):
            W[i][k] = Wres.E[a][b]
    rows = tuple(sorted(S[a] for a in Wres.zero))
    return VanishingPair(la.matmul(W, U), V, rows, tuple(T), tuple(p), tuple(q))


def symbolic_support(A: OneCMMatrix, U: list, V: list) -> set:
    M = la.matmul(la.matmul(U, A.A0), V)
    n = A.n
    supp = {(i, j) for i in range(n) for j in range(n) if M[i][j] != 0}
    for f in A.factors:
        Ub = la.matvec(U, f.b)
        cV = la.matvec(la.transpose(V), f.c)
        ri = [i for i in range(n) if Ub[i]]
        cj = [j for j in range(n) if cV[j]]
        supp.update((i, j) for i in ri for j in cj)
    return supp


@dataclass(frozen=True)
class ValidationResult:
    ok: bool
    reason: str
    term_rank: int | None = None

    def __bool__(self) -> bool:
        return self.ok


def validate_vanishing_pair(A: OneCMMatrix, U: list, V: list, p: Sequence[int],
                            q: Sequence[int], block: tuple | None = None) -> ValidationResult:
    n = A.n
    if len(U) != n or len(V) != n:
        return ValidationResult(False, "dimension mismatch")
    if la.det(U) == 0:
        return ValidationResult(False, "U is singular")
    if la.det(V) == 0:
        return ValidationResult(False, "V is singular")
    if not la.is_triangular_along(U, p):
        return ValidationResult(False, "U is not upper-triangular along p")
    if not la.is_triangular_along(V, q):
        return ValidationResult(False, "V is not upper-triangular along q")
    supp = symbolic_support(A, U, V)
    tr = trank(supp, n, n).rank
    if tr >= n:
        return ValidationResult(False, f"term-rank of U A V is {tr} = n", tr)
    if block is not None:
        rows, cols = block
        bad = [(i, j) for i in rows for j in cols if (i, j) in supp]
        if bad:
            return ValidationResult(False, f"recorded zero block has nonzero entry {bad[0]}", tr)
    return ValidationResult(True, f"term-rank {tr} < {n}", tr)
