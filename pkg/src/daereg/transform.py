"""Row/column operator transforms, the regularization loop and retrieval."""

from __future__ import annotations

import enum
import logging
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from . import exactla as la
from .dae import DaeSystem, generic_function
from .jacobian import (OneCMMatrix, coefficient_ranks, compress_symbols,
                       rank_one_split, system_jacobian, to_linear_symbolic)
from .onecm import OneCMRank, VanishingPair, rank_1cm, vanishing_pair
from .structural import (DualPair, StructurallySingular, sigma_matrix,
                         solve_dual)
from .symexpr import (NEG_INF, TIME, EvaluationError, Param, Var, add,
                      diff_time, eval_float, mul, substitute, var)

log = logging.getLogger(__name__)

__all__ = [
    "Status", "TriangularityViolation", "InternalInvariantViolation",
    "IterationRecord", "RegularizationResult", "Analysis", "analyze",
    "apply_row_transform", "apply_col_transform", "regularize",
    "retrieval_system", "lti_regularize", "float_probe",
]


class Status(str, enum.Enum):
    REGULARIZED = "Regularized"
    STRUCTURALLY_SINGULAR = "StructurallySingular"
    INCONCLUSIVE = "Inconclusive"


class TriangularityViolation(ValueError):
    pass


class InternalInvariantViolation(AssertionError):
    pass


def _nth_time_derivative(e, k: int):
    for _ in range(k):
        e = diff_time(e)
    return e


def apply_row_transform(dae: DaeSystem, U: Sequence[Sequence[Fraction]],
                        p: Sequence[int]) -> DaeSystem:
    n = dae.n
    cache: dict[tuple[int, int], object] = {}
    eqs = []
    for i in range(n):
        terms = []
        for k in range(n):
            u = U[i][k]
            if not u:
                continue
            d = p[k] - p[i]
            if d < 0:
                raise TriangularityViolation(f"U[{i + 1},{k + 1}] needs derivative order {d}")
            if (k, d) not in cache:
                cache[(k, d)] = _nth_time_derivative(dae.equations[k], d)
            terms.append(mul(u, cache[(k, d)]))
        eqs.append(add(*terms))
    return dae.replace(equations=eqs)


def apply_col_transform(dae: DaeSystem, V: Sequence[Sequence[Fraction]], q: Sequence[int],
                        names: Sequence[str] | None = None) -> DaeSystem:
    """Substitute ``x_m^(l) -> sum_j V_mj y_j^(q_j - q_m + l)``."""
    n = dae.n
    for m in range(n):
        for j in range(n):
            if V[m][j] and q[j] < q[m]:
                raise TriangularityViolation(f"V[{m + 1},{j + 1}] couples q={q[m]} to q={q[j]}")

    def image(m: int, l: int):
        return add(*(mul(V[m - 1][j], var(j + 1, q[j] - q[m - 1] + l))
                     for j in range(n) if V[m - 1][j]))

    eqs = [substitute(f, image) for f in dae.equations]
    return dae.replace(equations=eqs, variables=names or dae.variables)


@dataclass
class Analysis:
    """Phase 1 and 2 data for one DAE."""

    sigma: list
    duals: DualPair | None
    jacobian: list | None = None
    lsm_symbols: int = 0
    compressed_symbols: int = 0
    coefficient_ranks: list = field(default_factory=list)
    onecm: OneCMMatrix | None = None
    rank: OneCMRank | None = None

    @property
    def structurally_singular(self) -> bool:
        return self.duals is None

    @property
    def regular(self) -> bool:
        return self.rank is not None and self.onecm is not None and self.rank.rank == self.onecm.n


def analyze(dae: DaeSystem) -> Analysis:
    S = sigma_matrix(dae)
    try:
        d = solve_dual(S)
    except StructurallySingular:
        return Analysis(S, None)
    J = system_jacobian(dae, d.p, d.q)
    L = to_linear_symbolic(J)
    Lc = compress_symbols(L)
    A = rank_one_split(Lc)
    return Analysis(S, d, J, L.m, Lc.m, coefficient_ranks(Lc), A, rank_1cm(A))


@dataclass
class IterationRecord:
    p: tuple
    q: tuple
    delta_hat: int
    lsm_symbols: int
    onecm_symbols: int
    rank: int
    pair: VanishingPair | None = None

    def to_json(self) -> dict:
        return {"p": list(self.p), "q": list(self.q), "delta_hat": self.delta_hat,
                "lsm_symbols": self.lsm_symbols, "onecm_symbols": self.onecm_symbols,
                "rank_1cm": self.rank,
                "vanishing_pair": None if self.pair is None else self.pair.to_json()}


@dataclass
class RegularizationResult:
    status: Status
    dae: DaeSystem | None
    original: DaeSystem | None
    trace: list = field(default_factory=list)
    v_chain: list = field(default_factory=list)  # (V, q) per transform
    probe: dict | None = None
    coefficients: list | None = None  # LTI only
    forcing: list | None = None  # LTI only

    @property
    def iterations(self) -> int:
        return sum(1 for t in self.trace if t.pair is not None)

    @property
    def delta_hats(self) -> list:
        return [t.delta_hat for t in self.trace]

    def to_json(self) -> dict:
        return {"schema": 1, "status": self.status.value, "iterations": self.iterations,
                "delta_hat": self.delta_hats,
                "trace": [t.to_json() for t in self.trace],
                "v_chain": [{"V": la.to_strings(V), "q": list(q)} for V, q in self.v_chain],
                "probe": self.probe}


def float_probe(dae: DaeSystem, J: list, points: int = 5, seed: int = 0,
                rtol: float = 1e-8) -> dict:
    """Numeric rank of ``J`` at random points; advisory only."""
    import numpy as np

    rng = random.Random(seed)
    n = dae.n
    leaves: set = set()
    for row in J:
        for e in row:
            stack = [e]
            while stack:
                x = stack.pop()
                if isinstance(x, (Var, Param)) or x is TIME:
                    leaves.add(x)
                stack.extend(x.children)
    ranks = []
    for _ in range(points):
        pt = {leaf: rng.uniform(0.5, 1.5) for leaf in leaves}
        try:
            M = np.array([[eval_float(e, pt, dae.functions, generic_function) for e in row]
                          for row in J], dtype=float)
        except (EvaluationError, ZeroDivisionError, OverflowError):
            continue
        if not np.all(np.isfinite(M)):
            continue
        norm = np.linalg.norm(M)
        ranks.append(int(np.linalg.matrix_rank(M, tol=rtol * norm)) if norm > 0 else 0)
    return {"points": len(ranks), "max_rank": max(ranks) if ranks else None, "n": n}


def _fresh_names(dae: DaeSystem, it: int) -> tuple:
    return tuple(f"y{it}_{j + 1}" for j in range(dae.n))


def regularize(dae: DaeSystem, max_iters: int | None = None, probe: bool = False,
               seed: int = 0) -> RegularizationResult:
    """Iterate duals, 1CM test and transforms until the 1CM Jacobian is nonsingular."""
    original = dae
    result = RegularizationResult(Status.INCONCLUSIVE, dae, original)
    it = 0
    cap = None
    while True:
        a = analyze(dae)
        if a.duals is None:
            result.status = Status.STRUCTURALLY_SINGULAR
            result.dae = dae
            return result
        dh = a.duals.delta_hat
        if cap is None:
            cap = dh + 1 if max_iters is None else max_iters
        if result.trace and dh >= result.trace[-1].delta_hat:
            raise InternalInvariantViolation(
                f"delta_hat did not decrease: {result.trace[-1].delta_hat} -> {dh}")
        rec = IterationRecord(a.duals.p, a.duals.q, dh, a.lsm_symbols, a.onecm.m, a.rank.rank)
        result.trace.append(rec)
        if a.regular:
            result.status = Status.REGULARIZED
            result.dae = dae
            if probe:
                result.probe = float_probe(dae, a.jacobian, seed=seed)
                mr = result.probe["max_rank"]
                if mr is not None and mr < dae.n:
                    result.status = Status.INCONCLUSIVE
            return result
        if it >= cap:
            result.dae = dae
            return result
        vp = vanishing_pair(a.onecm, a.duals.p, a.duals.q, a.rank)
        rec.pair = vp
        it += 1
        dae = apply_row_transform(dae, vp.U, a.duals.p)
        dae = apply_col_transform(dae, vp.V, a.duals.q, _fresh_names(dae, it))
        result.v_chain.append((vp.V, a.duals.q))
        log.debug("iteration %d: delta_hat %d", it, dh)


def retrieval_system(result: RegularizationResult, original: DaeSystem | None = None) -> DaeSystem:
    """``f*(x, z) = (f^r(z), x - V^1(D)...V^r(D) z)`` over ``2n`` variables."""
    f0 = original or result.original
    fr = result.dae
    n = f0.n
    shifted = [substitute(f, lambda j, l: var(n + j, l)) for f in fr.equations]
    w = [var(n + j + 1) for j in range(n)]
    for V, q in reversed(result.v_chain):
        w = [add(*(mul(V[m][j], _nth_time_derivative(w[j], q[j] - q[m]))
                   for j in range(n) if V[m][j])) for m in range(n)]
    tail = [add(var(i + 1), mul(-1, w[i])) for i in range(n)]
    names = tuple(f0.variables) + tuple(f"z{j + 1}" for j in range(n))
    return DaeSystem(shifted + tail, names, {**dict(f0.functions), **dict(fr.functions)},
                     name=(f0.name or "dae") + "-retrieval")


def _lti_sigma(coeffs: Sequence[list], n: int) -> list:
    S = [[NEG_INF] * n for _ in range(n)]
    for l, A in enumerate(coeffs):
        for i in range(n):
            for j in range(n):
                if A[i][j] != 0:
                    S[i][j] = l
    return S


def lti_regularize(coeffs: Sequence[list], g: Sequence | None = None,
                   max_iters: int | None = None) -> RegularizationResult:
    """Constant-coefficient specialisation: ``A(s) <- U(s) A(s)`` with ``V = I``."""
    coeffs = [la.mat(A) for A in coeffs]
    n = len(coeffs[0])
    g = list(g) if g is not None else None
    result = RegularizationResult(Status.INCONCLUSIVE, None, None)
    cap = None
    while True:
        S = _lti_sigma(coeffs, n)
        try:
            d = solve_dual(S)
        except StructurallySingular:
            result.status = Status.STRUCTURALLY_SINGULAR
            break
        dh = d.delta_hat
        if cap is None:
            cap = dh + 1 if max_iters is None else max_iters
        if result.trace and dh >= result.trace[-1].delta_hat:
            raise InternalInvariantViolation("delta_hat did not decrease")
        J = [[coeffs[d.q[j] - d.p[i]][i][j] if 0 <= d.q[j] - d.p[i] < len(coeffs) else Fraction(0)
              for j in range(n)] for i in range(n)]
        r = la.rank(J)
        rec = IterationRecord(d.p, d.q, dh, 0, 0, r)
        result.trace.append(rec)
        if r == n:
            result.status = Status.REGULARIZED
            break
        if len(result.trace) > cap:
            break
        E = la.eliminate_rows_with_priority(J, d.p)
        U = E.E
        rec.pair = VanishingPair(U, la.identity(n), E.zero, tuple(range(n)), d.p, d.q)
        shift = max(d.p) - min(d.p)
        new = [la.zeros(n, n) for _ in range(len(coeffs) + shift)]
        for i in range(n):
            for k in range(n):
                u = U[i][k]
                if not u:
                    continue
                s = d.p[k] - d.p[i]
                for l, A in enumerate(coeffs):
                    row = A[k]
                    tgt = new[l + s][i]
                    for j in range(n):
                        if row[j]:
                            tgt[j] += u * row[j]
        while len(new) > 1 and not any(x for r_ in new[-1] for x in r_):
            new.pop()
        coeffs = new
        if g is not None:
            g = [add(*(mul(U[i][k], _nth_time_derivative(g[k], d.p[k] - d.p[i]))
                       for k in range(n) if U[i][k])) for i in range(n)]
    result.coefficients = coeffs
    result.forcing = g
    return result
