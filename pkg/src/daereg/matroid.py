"""Term-rank, Kőnig covers and the rank of layered mixed matrices.

The rank of a layered mixed matrix ``(Q; T)`` equals the rank of the
union of the linear matroid of ``Q``'s columns and the transversal
matroid of ``T``'s support.  ``lm_rank`` runs the matroid partition
algorithm (shortest exchange paths) and reads the minimising column set
off the final reachability cut.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from . import exactla as la

__all__ = [
    "LayeredMixedMatrix", "LMRankCert", "TermRankResult", "trank",
    "max_bipartite_matching", "lm_rank", "lm_formula_value",
]


def max_bipartite_matching(adj: Sequence[Sequence[int]], nright: int,
                           left: Iterable[int] | None = None) -> dict:
    """Kuhn's augmenting paths; left vertices and neighbours tried in the given order."""
    match_r: dict[int, int] = {}
    match_l: dict[int, int] = {}
    for u in (range(len(adj)) if left is None else left):
        seen: set[int] = set()
        stack = [(u, iter(adj[u]))]
        parent: dict[int, tuple[int, int]] = {}
        found = None
        while stack and found is None:
            x, it = stack[-1]
            for r in it:
                if r in seen:
                    continue
                seen.add(r)
                parent[r] = x
                if r not in match_r:
                    found = r
                    break
                stack.append((match_r[r], iter(adj[match_r[r]])))
                break
            else:
                stack.pop()
        if found is None:
            continue
        r = found
        while True:
            x = parent[r]
            prev = match_l.get(x)
            match_l[x] = r
            match_r[r] = x
            if x == u:
                break
            r = prev
    return match_l


@dataclass(frozen=True)
class TermRankResult:
    rank: int
    matching: dict
    zero_rows: tuple
    zero_cols: tuple


def trank(support: Iterable[tuple[int, int]], nrows: int, ncols: int) -> TermRankResult:
    """Term-rank with a maximal all-zero block ``R × K``, ``|R|+|K| = nrows+ncols-rank``."""
    adj: list[list[int]] = [[] for _ in range(nrows)]
    for i, j in sorted(set(support)):
        adj[i].append(j)
    match = max_bipartite_matching(adj, ncols)
    col_to_row = {c: r for r, c in match.items()}
    # alternating reachability from unmatched rows
    reach_r = {i for i in range(nrows) if i not in match}
    reach_c: set[int] = set()
    queue = deque(sorted(reach_r))
    while queue:
        i = queue.popleft()
        for j in adj[i]:
            if j not in reach_c:
                reach_c.add(j)
                r = col_to_row.get(j)
                if r is not None and r not in reach_r:
                    reach_r.add(r)
                    queue.append(r)
    zero_rows = tuple(sorted(reach_r))
    zero_cols = tuple(j for j in range(ncols) if j not in reach_c)
    return TermRankResult(len(match), match, zero_rows, zero_cols)


@dataclass(frozen=True)
class LayeredMixedMatrix:
    """``Q`` is a dense rational block; ``T`` lists ``(row, col)`` positions of distinct symbols."""

    Q: list
    T: tuple
    ncols: int
    t_rows: int

    def __post_init__(self):
        object.__setattr__(self, "T", tuple(sorted(set(map(tuple, self.T)))))
        for row in self.Q:
            if len(row) != self.ncols:
                raise ValueError("Q column count mismatch")
        for i, j in self.T:
            if not (0 <= i < self.t_rows and 0 <= j < self.ncols):
                raise ValueError(f"T entry {(i, j)} out of range")

    @property
    def q_rows(self) -> int:
        return len(self.Q)


@dataclass(frozen=True)
class LMRankCert:
    rank: int
    I: tuple
    rank_Q: int = field(default=0)
    trank_T: int = field(default=0)


def lm_formula_value(A: LayeredMixedMatrix, I: Iterable[int]) -> tuple[int, int, int]:
    """``rank Q[I] + trank T[I] + |C∖I|`` and its first two summands."""
    I = sorted(set(I))
    rq = la.rank(la.submatrix(A.Q, range(A.q_rows), I)) if I and A.Q else 0
    Iset = set(I)
    tr = trank([(i, j) for i, j in A.T if j in Iset], A.t_rows, A.ncols).rank
    return rq + tr + (A.ncols - len(I)), rq, tr


class _LinearSide:
    """Independence and exchange queries for columns of a rational matrix."""

    def __init__(self, Q: list, ncols: int):
        self.Q = Q
        self.ncols = ncols

    def analyse(self, J: list[int]) -> tuple[set, dict]:
        """Columns that extend ``J`` freely, and exchange targets for the rest."""
        rows = len(self.Q)
        others = [c for c in range(self.ncols) if c not in set(J)]
        if rows == 0:
            return set(), {c: [] for c in others}
        order = list(J) + others
        M = [[row[c] for c in order] for row in self.Q]
        R, piv = la.rref(M)
        k = len(J)
        assert piv[:k] == list(range(k)), "J must be independent"
        free: set[int] = set()
        exch: dict[int, list[int]] = {}
        for pos, c in enumerate(others, start=k):
            if any(R[r][pos] != 0 for r in range(k, rows)):
                free.add(c)
            else:
                exch[c] = sorted(J[r] for r in range(k) if R[r][pos] != 0)
        return free, exch


class _TransversalSide:
    def __init__(self, T: Sequence[tuple[int, int]], nrows: int, ncols: int):
        self.col_adj: list[list[int]] = [[] for _ in range(ncols)]
        for i, j in T:
            self.col_adj[j].append(i)
        for a in self.col_adj:
            a.sort()
        self.nrows = nrows
        self.ncols = ncols

    def matching(self, J: list[int]) -> dict:
        m = max_bipartite_matching(self.col_adj, self.nrows, left=sorted(J))
        return m

    def analyse(self, J: list[int]) -> tuple[set, dict]:
        m = self.matching(J)
        assert len(m) == len(J), "J must be matchable"
        row_to_col = {r: c for c, r in m.items()}
        Jset = set(J)
        free: set[int] = set()
        exch: dict[int, list[int]] = {}
        for x in range(self.ncols):
            if x in Jset:
                continue
            seen_rows: set[int] = set()
            seen_cols: list[int] = []
            queue = deque([x])
            is_free = False
            while queue and not is_free:
                c = queue.popleft()
                for r in self.col_adj[c]:
                    if r in seen_rows:
                        continue
                    seen_rows.add(r)
                    y = row_to_col.get(r)
                    if y is None:
                        is_free = True
                        break
                    seen_cols.append(y)
                    queue.append(y)
            if is_free:
                free.add(x)
            else:
                exch[x] = sorted(set(seen_cols))
        return free, exch

    def greedy(self, cols: Iterable[int]) -> list[int]:
        return sorted(self.matching(sorted(cols)))


def lm_rank(A: LayeredMixedMatrix) -> LMRankCert:
    """Rank of ``(Q; T)`` with a minimiser ``I`` of ``rank Q[I] + trank T[I] + |C∖I|``."""
    C = A.ncols
    lin = _LinearSide(A.Q, C)
    tra = _TransversalSide(A.T, A.t_rows, C)

    J1 = list(la.rref(A.Q)[1]) if A.Q else []
    J2 = tra.greedy(c for c in range(C) if c not in set(J1))

    while True:
        free1, exch1 = lin.analyse(J1)
        free2, exch2 = tra.analyse(J2)
        in1, in2 = set(J1), set(J2)
        sources = [c for c in range(C) if c not in in1 and c not in in2]
        # edge x -> y labelled k: J_k - y + x independent, x not in J_k
        prev: dict[int, tuple[int, int] | None] = {s: None for s in sources}
        queue = deque(sources)
        hit = None
        while queue:
            x = queue.popleft()
            if x not in in1 and x in free1:
                hit = (x, 1)
                break
            if x not in in2 and x in free2:
                hit = (x, 2)
                break
            nbrs = []
            if x not in in1:
                nbrs += [(y, 1) for y in exch1.get(x, ())]
            if x not in in2:
                nbrs += [(y, 2) for y in exch2.get(x, ())]
            for y, k in sorted(nbrs):
                if y not in prev:
                    prev[y] = (x, k)
                    queue.append(y)
        if hit is None:
            X = set(prev)
            break
        x, k = hit
        s1, s2 = set(J1), set(J2)
        (s1 if k == 1 else s2).add(x)
        y = x
        while prev[y] is not None:
            px, pk = prev[y]
            tgt = s1 if pk == 1 else s2
            tgt.discard(y)
            tgt.add(px)
            y = px
        J1, J2 = sorted(s1), sorted(s2)

    rank = len(J1) + len(J2)
    I = tuple(sorted(X))
    value, rq, tr = lm_formula_value(A, I)
    if value != rank:
        raise AssertionError(f"rank certificate mismatch: {value} != {rank}")
    return LMRankCert(rank, I, rq, tr)
