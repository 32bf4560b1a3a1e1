"""System Jacobian, its linear symbolic approximation and the 1CM split."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from . import exactla as la
from .dae import DaeSystem
from .matroid import LayeredMixedMatrix
from .structural import NEG_INF, sigma_matrix, solve_dual
from .symexpr import (ONE, Const, Expr, add, canonical_hash, canonicalize,
                      diff_partial, expand_arithmetic, mul, neg, split_coefficient,
                      var)

__all__ = [
    "InfeasibleDuals", "LinSymMatrix", "SymbolTerm", "OneCMMatrix", "Factor",
    "system_jacobian", "to_linear_symbolic", "compress_symbols",
    "rank_one_split", "layer_form", "LayerForm", "iot_matrix",
    "coefficient_ranks",
]


class InfeasibleDuals(ValueError):
    pass


def system_jacobian(dae: DaeSystem, p: Sequence[int], q: Sequence[int]) -> list:
    n = dae.n
    S = sigma_matrix(dae)
    J = []
    for i in range(n):
        row = []
        for j in range(n):
            d = q[j] - p[i]
            if S[i][j] is not NEG_INF and S[i][j] > d:
                raise InfeasibleDuals(f"sigma({i + 1},{j + 1}) = {S[i][j]} > q_j - p_i = {d}")
            row.append(diff_partial(dae.equations[i], j + 1, d) if d >= 0 else Const(Fraction(0)))
        J.append(row)
    return J


@dataclass(frozen=True)
class SymbolTerm:
    symbol: int
    atom: Expr
    A: list


@dataclass(frozen=True)
class LinSymMatrix:
    """``A0 + sum_k atom_k * A_k`` over exact rationals."""

    A0: list
    terms: tuple = ()

    @property
    def n(self) -> int:
        return len(self.A0)

    @property
    def m(self) -> int:
        return len(self.terms)

    def to_expr(self) -> list:
        n = self.n
        return [[add(self.A0[i][j], *(mul(t.A[i][j], t.atom) for t in self.terms if t.A[i][j]))
                 for j in range(n)] for i in range(n)]

    def evaluate(self, values: Sequence[Fraction]) -> list:
        n = self.n
        M = [list(row) for row in self.A0]
        for t, v in zip(self.terms, values):
            for i in range(n):
                for j in range(n):
                    if t.A[i][j]:
                        M[i][j] += v * t.A[i][j]
        return M


def to_linear_symbolic(J: Sequence[Sequence[Expr]]) -> LinSymMatrix:
    """Expand entries, split each term into coefficient and monic atom, and
    merge identical atoms across the matrix."""
    n = len(J)
    A0 = la.zeros(n, n)
    atoms: dict = {}
    for i in range(n):
        for j in range(n):
            e = expand_arithmetic(J[i][j])
            for t in (e.args if e.__class__.__name__ == "Sum" else (e,)):
                c, monic = split_coefficient(t)
                if c == 0:
                    continue
                if monic is ONE:
                    A0[i][j] += c
                    continue
                h = canonical_hash(monic)
                slot = atoms.get(h)
                if slot is None:
                    slot = atoms[h] = (monic, la.zeros(n, n))
                slot[1][i][j] += c
    terms = tuple(SymbolTerm(k + 1, atom, A)
                  for k, (atom, A) in enumerate(atoms.values()) if any(x for r in A for x in r))
    return LinSymMatrix(A0, terms)


def compress_symbols(L: LinSymMatrix) -> LinSymMatrix:
    """Keep a greedy basis of the coefficient matrices.

    A dropped ``A_d = sum c_dk A_k`` folds its atom into the kept ones, so
    each kept atom becomes ``atom_k + sum_d c_dk atom_d`` and the matrix is
    reproduced exactly.
    """
    if not L.terms:
        return L
    n = L.n
    flat = [[x for row in t.A for x in row] for t in L.terms]
    kept: list[int] = []
    basis: list[tuple[int, list, dict]] = []  # pivot, reduced row, combo over kept idx
    fold: dict[int, dict[int, Fraction]] = {}
    for idx, v in enumerate(flat):
        row = list(v)
        combo: dict[int, Fraction] = {}
        for pc, brow, bcombo in basis:
            f = row[pc]
            if f:
                row = [x - f * y for x, y in zip(row, brow)]
                for k, c in bcombo.items():
                    combo[k] = combo.get(k, Fraction(0)) + f * c
        pc = next((j for j, x in enumerate(row) if x), None)
        if pc is None:
            fold[idx] = combo  # A_idx = sum combo[k] A_k
        else:
            inv = 1 / row[pc]
            # reduced row r = v - sum combo A_k; normalised r/row[pc] as a combo of kept + idx
            nc = {k: -c * inv for k, c in combo.items()}
            nc[idx] = inv
            basis.append((pc, [x * inv for x in row], nc))
            kept.append(idx)
    if not fold:
        return L
    extra: dict[int, list] = {k: [] for k in kept}
    for d, combo in fold.items():
        for k, c in combo.items():
            if c:
                extra[k].append(mul(c, L.terms[d].atom))
    terms = tuple(SymbolTerm(pos + 1, add(L.terms[k].atom, *extra[k]), L.terms[k].A)
                  for pos, k in enumerate(kept))
    out = LinSymMatrix(L.A0, terms)
    return out


@dataclass(frozen=True)
class Factor:
    symbol: int
    b: tuple
    c: tuple
    source: int  # index of the LSM term this came from
    split: int


@dataclass(frozen=True)
class OneCMMatrix:
    """``A0 + sum_k alpha_k b_k c_k^T``."""

    A0: list
    factors: tuple = ()
    atoms: dict = field(default_factory=dict, compare=False)

    @property
    def n(self) -> int:
        return len(self.A0)

    @property
    def m(self) -> int:
        return len(self.factors)

    def B(self, idx: Sequence[int] | None = None) -> list:
        idx = range(self.m) if idx is None else idx
        return [[self.factors[k].b[i] for k in idx] for i in range(self.n)]

    def Ct(self, idx: Sequence[int] | None = None) -> list:
        idx = range(self.m) if idx is None else idx
        return [list(self.factors[k].c) for k in idx]

    def evaluate(self, values: Sequence[Fraction]) -> list:
        M = [list(row) for row in self.A0]
        for f, v in zip(self.factors, values):
            for i, bi in enumerate(f.b):
                if bi:
                    vb = v * bi
                    row = M[i]
                    for j, cj in enumerate(f.c):
                        if cj:
                            row[j] += vb * cj
        return M


def rank_one_split(L: LinSymMatrix) -> OneCMMatrix:
    factors = []
    atoms = {}
    for t in L.terms:
        Bk, Ck = la.rank_factorization(t.A)
        for s in range(len(Ck)):
            sym = len(factors) + 1
            factors.append(Factor(sym, tuple(row[s] for row in Bk), tuple(Ck[s]), t.symbol, s))
            atoms[sym] = t.atom
    return OneCMMatrix([list(r) for r in L.A0], tuple(factors), atoms)


def coefficient_ranks(L: LinSymMatrix) -> list[int]:
    return [la.rank(t.A) for t in L.terms]


@dataclass(frozen=True)
class LayerForm:
    dae: DaeSystem
    p: tuple
    q: tuple
    jacobian: list
    J_M: list  # entries: Fraction, or a string symbol name
    lm: LayeredMixedMatrix
    extra_rank: int


def layer_form(dae: DaeSystem, A: Sequence[list], g: Sequence[Expr],
               duals: tuple | None = None) -> LayerForm:
    """Layer system ``y + sum A_l x^(l) = 0, -y + g = 0`` and its mixed-matrix Jacobian.

    ``J_M`` keeps the constant top block and the ``-1`` diagonal, and
    replaces every other nonzero bottom entry by its own symbol.  ``lm``
    is an equivalent layered mixed matrix whose rank exceeds that of
    ``J_M`` by ``extra_rank``.
    """
    n = dae.n
    names = tuple(dae.variables) + tuple(f"y{i + 1}" for i in range(n))
    top = []
    for i in range(n):
        terms = [var(n + i + 1)]
        for l, Al in enumerate(A):
            terms += [mul(Al[i][j], var(j + 1, l)) for j in range(n) if Al[i][j]]
        top.append(add(*terms))
    bottom = [add(neg(var(n + i + 1)), canonicalize(g[i])) for i in range(n)]
    layer = DaeSystem(top + bottom, names, dae.functions, name=(dae.name or "dae") + "-layer")
    if duals is None:
        d = solve_dual(sigma_matrix(layer))
        p, q = d.p, d.q
    else:
        p, q = duals
    J = system_jacobian(layer, p, q)
    N = 2 * n
    J_M: list = [[Fraction(0)] * N for _ in range(N)]
    Q0 = la.zeros(n, N)
    Qb = la.zeros(n, N)
    Tb: list[tuple[int, int]] = []
    count = 0
    for i in range(N):
        for j in range(N):
            e = J[i][j]
            if isinstance(e, Const):
                J_M[i][j] = e.value
                if e.value and i < n:
                    Q0[i][j] = e.value
                elif e.value:
                    Qb[i - n][j] = e.value
            elif i < n:
                raise ValueError("top rows of a layer form must be constant")
            else:
                count += 1
                J_M[i][j] = f"a{count}"
                Tb.append((i - n, j))
    # rows [Q0 0; Qb I; Tb Z] with Z a fresh symbolic diagonal
    Q = [row + [Fraction(0)] * n for row in Q0] + \
        [row + [Fraction(int(k == i)) for k in range(n)] for i, row in enumerate(Qb)]
    T = Tb + [(i, N + i) for i in range(n)]
    lm = LayeredMixedMatrix(Q, T, N + n, n)
    return LayerForm(layer, tuple(p), tuple(q), J, J_M, lm, n)


def iot_matrix(form: LayerForm) -> tuple[list[tuple[int, int]], int]:
    """Support of ``J_M`` and its size."""
    N = len(form.J_M)
    return [(i, j) for i in range(N) for j in range(N) if form.J_M[i][j] != 0], N
