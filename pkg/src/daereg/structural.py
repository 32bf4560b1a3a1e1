"""σ-matrix, assignment duals and structural singularity."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .dae import DaeSystem
from .symexpr import NEG_INF, sigma_order

__all__ = [
    "SigmaMatrix", "DualPair", "StructurallySingular", "sigma_matrix",
    "solve_dual", "max_matching_weight", "hungarian", "format_sigma",
    "is_feasible_dual",
]


class StructurallySingular(Exception):
    """No perfect matching on the finite entries of the σ-matrix."""


SigmaMatrix = list  # list[list[int | NEG_INF]]


@dataclass(frozen=True)
class DualPair:
    p: tuple
    q: tuple
    matching: tuple  # matching[i] = column matched to row i

    @property
    def delta_hat(self) -> int:
        return sum(self.q) - sum(self.p)


def sigma_matrix(dae: DaeSystem) -> SigmaMatrix:
    n = dae.n
    return [[sigma_order(f, j + 1) for j in range(n)] for f in dae.equations]


def _finite(x) -> bool:
    return x is not NEG_INF


def hungarian(S: SigmaMatrix) -> tuple | None:
    """Maximum-weight perfect matching on finite entries.

    Shortest augmenting paths with potentials; the first minimum found
    in a left-to-right scan wins, so ties resolve to the lowest index.
    Returns ``row -> column`` or ``None`` when no perfect matching exists.
    """
    n = len(S)
    if n == 0:
        return ()
    # 1-based arrays; cost = -σ, forbidden where σ = -inf
    u = [0] * (n + 1)
    v = [0] * (n + 1)
    match_col = [0] * (n + 1)  # match_col[j] = row matched to column j
    way = [0] * (n + 1)
    for i in range(1, n + 1):
        match_col[0] = i
        j0 = 0
        minv: list = [None] * (n + 1)
        used = [False] * (n + 1)
        while True:
            used[j0] = True
            i0 = match_col[j0]
            row = S[i0 - 1]
            delta = None
            j1 = 0
            for j in range(1, n + 1):
                if used[j]:
                    continue
                s = row[j - 1]
                if _finite(s):
                    cur = -s - u[i0] - v[j]
                    if minv[j] is None or cur < minv[j]:
                        minv[j] = cur
                        way[j] = j0
                if minv[j] is not None and (delta is None or minv[j] < delta):
                    delta = minv[j]
                    j1 = j
            if delta is None:
                return None
            for j in range(n + 1):
                if used[j]:
                    u[match_col[j]] += delta
                    v[j] -= delta
                elif minv[j] is not None:
                    minv[j] -= delta
            j0 = j1
            if match_col[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            match_col[j0] = match_col[j1]
            j0 = j1
    out = [0] * n
    for j in range(1, n + 1):
        out[match_col[j] - 1] = j - 1
    return tuple(out)


def solve_dual(S: SigmaMatrix) -> DualPair:
    """Smallest nonnegative optimal dual ``(p, q)``; raises ``StructurallySingular``.

    Starting from ``p = 0`` the iteration ``q_j = max_i(σ_ij + p_i)``,
    ``p_i = q_{m(i)} - σ_{i,m(i)}`` over a maximum matching ``m`` climbs
    monotonically to the least optimal dual.
    """
    n = len(S)
    m = hungarian(S)
    if m is None:
        raise StructurallySingular("no perfect matching between equations and variables")
    p = [0] * n
    while True:
        q = [max((S[i][j] + p[i] for i in range(n) if _finite(S[i][j])), default=0)
             for j in range(n)]
        newp = [q[m[i]] - S[i][m[i]] for i in range(n)]
        if newp == p:
            break
        p = newp
    return DualPair(tuple(p), tuple(q), m)


def is_feasible_dual(S: SigmaMatrix, p: Sequence[int], q: Sequence[int]) -> bool:
    n = len(S)
    return all(not _finite(S[i][j]) or q[j] - p[i] >= S[i][j]
               for i in range(n) for j in range(n))


def max_matching_weight(S: SigmaMatrix):
    """Independent route through SciPy's assignment solver."""
    import numpy as np
    from scipy.optimize import linear_sum_assignment

    n = len(S)
    if n == 0:
        return 0
    finite = [[_finite(x) for x in row] for row in S]
    big = 1 + sum(abs(x) for row in S for x in row if _finite(x))
    W = np.array([[S[i][j] if finite[i][j] else -big * (n + 1) for j in range(n)]
                  for i in range(n)], dtype=np.int64)
    rows, cols = linear_sum_assignment(W, maximize=True)
    if not all(finite[i][j] for i, j in zip(rows, cols)):
        return NEG_INF
    return int(sum(S[i][j] for i, j in zip(rows, cols)))


def format_sigma(S: SigmaMatrix) -> str:
    cells = [["*" if not _finite(x) else str(x) for x in row] for row in S]
    w = max((len(c) for row in cells for c in row), default=1)
    return "\n".join(" ".join(c.rjust(w) for c in row) for row in cells)
