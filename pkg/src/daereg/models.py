"""Benchmark DAEs and the structured rank-one form."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from . import exactla as la
from .dae import DaeSystem
from .jacobian import LinSymMatrix, SymbolTerm
from .symexpr import (TIME, Apply, Expr, add, cos, div, exp, fn, mul, neg,
                      param, pow_, sin, sub, var)

__all__ = [
    "robotic_arm", "transistor_amplifier", "ring_modulator", "toy_example",
    "toy_decomposition", "toy_layer_form", "mna_example", "mna_rank1form",
    "multibody", "multibody_rank1form", "Rank1FormDae", "Rank1Term",
    "rank1_jacobian", "linear_transform", "SingularTransform", "PRESETS",
    "preset",
]

HALF = Fraction(1, 2)


def _sum(items) -> Expr:
    return add(*items)


def robotic_arm(N: int = 1) -> DaeSystem:
    """Path-controlled planar arm with ``N`` elastic joints; size ``3N + 2``.

    Unknowns: ``theta0..thetaN, phi1..phiN, tau0..tauN``.  Physical
    constants are parameters.
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    th = [var(j + 1) for j in range(N + 1)]
    ph = [var(N + 2 + j) for j in range(N)]
    ta = [var(2 * N + 2 + j) for j in range(N + 1)]
    names = ([f"theta{j}" for j in range(N + 1)] + [f"phi{j + 1}" for j in range(N)]
             + [f"tau{j}" for j in range(N + 1)])
    alpha = param("alpha")
    beta = [param(f"beta{j + 1}") for j in range(N)]
    gamma = [param(f"gamma{j + 1}") for j in range(N)]
    Jm = [param(f"J{j + 1}") for j in range(N)]
    K = [param(f"K{j + 1}") for j in range(N)]
    R = [param(f"R{j + 1}") for j in range(N)]
    l = [param(f"l{j}") for j in range(N + 1)]
    c = [cos(th[j + 1]) for j in range(N)]

    Q = add(alpha,
            *(mul(2, gamma[j], c[j]) for j in range(N)),
            *(neg(Jm[j]) for j in range(N)),
            *(neg(div(pow_(add(beta[j], mul(gamma[j], c[j])), 2), beta[j])) for j in range(N)))
    iQ = pow_(Q, -1)
    a = [sub(-1, mul(div(gamma[j], beta[j]), c[j])) for j in range(N)]

    d1 = lambda e: var(e.j, 1)  # noqa: E731
    d2 = lambda e: var(e.j, 2)  # noqa: E731
    z1 = sub(neg(_sum(mul(sub(mul(2, d1(th[0]), d1(th[j + 1])), pow_(d1(th[j + 1]), 2)),
                          gamma[j], sin(th[j + 1])) for j in range(N))), ta[0])
    z2 = [add(mul(gamma[j], pow_(d1(th[0]), 2), sin(th[j + 1])),
              mul(K[j], sub(th[j + 1], div(ph[j], R[j])))) for j in range(N)]
    z3 = [sub(mul(div(K[j], R[j]), sub(div(ph[j], R[j]), th[j + 1])), ta[j + 1]) for j in range(N)]
    z = [z1] + z2 + z3

    # (1/Q) M with the 1/Q distributed; blocks (2,3) and (3,2) carry -a
    size = 2 * N + 1
    W: list[list[Expr]] = [[None] * size for _ in range(size)]
    W[0][0] = iQ
    for j in range(N):
        W[0][1 + j] = mul(a[j], iQ)
        W[1 + j][0] = mul(a[j], iQ)
        W[0][1 + N + j] = neg(iQ)
        W[1 + N + j][0] = neg(iQ)
        for k in range(N):
            W[1 + j][1 + k] = add(mul(a[j], a[k], iQ), pow_(beta[j], -1) if j == k else 0)
            W[1 + j][1 + N + k] = neg(mul(a[j], iQ))
            W[1 + N + k][1 + j] = neg(mul(a[j], iQ))
            W[1 + N + j][1 + N + k] = add(iQ, pow_(Jm[j], -1) if j == k else 0)
    acc = [th[0]] + th[1:] + ph
    eqs = [add(d2(acc[r]), *(mul(W[r][s], z[s]) for s in range(size))) for r in range(size)]

    p0 = mul(l[0], cos(sub(1, exp(TIME))))
    eqs.append(sub(mul(l[0], cos(th[0])), p0))
    for j in range(N):
        pj = add(p0, mul(l[j + 1], cos(sub(1, mul(j + 1, TIME)))))
        eqs.append(sub(add(mul(l[0], cos(th[0])), mul(l[j + 1], cos(add(th[0], th[j + 1])))), pj))
    return DaeSystem(eqs, names, name=f"robot-N{N}")


def _sine_source(amp: float, freq: float):
    w = 2 * math.pi * freq
    return {"": lambda t: amp * math.sin(w * t),
            "'": lambda t: amp * w * math.cos(w * t),
            "''": lambda t: -amp * w * w * math.sin(w * t),
            "'''": lambda t: -amp * w ** 3 * math.cos(w * t)}


def _register(functions: dict, name: str, table: dict) -> None:
    for suffix, f in table.items():
        functions[name + suffix] = f


def transistor_amplifier() -> DaeSystem:
    """Eight-node transistor amplifier; ``e(x) = beta (exp(x/U_F) - 1)``."""
    x = [None] + [var(j) for j in range(1, 9)]
    d = [None] + [var(j, 1) for j in range(1, 9)]
    P = {k: param(k) for k in ("C1", "C2", "C3", "C4", "C5", "R0", "R1", "R2", "R3", "R4",
                               "R5", "R6", "R7", "R8", "R9", "Ub", "alpha", "beta", "UF")}

    def e(arg):
        return mul(P["beta"], sub(exp(div(arg, P["UF"])), 1))

    Ue = fn("Ue", TIME)
    am1 = sub(P["alpha"], 1)
    e23, e56 = e(sub(x[2], x[3])), e(sub(x[5], x[6]))
    eqs = [
        add(mul(P["C1"], sub(d[1], d[2])), div(sub(x[1], Ue), P["R0"])),
        add(neg(mul(P["C1"], sub(d[1], d[2]))), neg(div(P["Ub"], P["R2"])),
            mul(x[2], add(pow_(P["R1"], -1), pow_(P["R2"], -1))), neg(mul(am1, e23))),
        add(mul(P["C2"], d[3]), div(x[3], P["R3"]), neg(e23)),
        add(mul(P["C3"], sub(d[4], d[5])), div(sub(x[4], P["Ub"]), P["R4"]), mul(P["alpha"], e23)),
        add(neg(mul(P["C3"], sub(d[4], d[5]))), neg(div(P["Ub"], P["R6"])),
            mul(x[5], add(pow_(P["R5"], -1), pow_(P["R6"], -1))), neg(mul(am1, e56))),
        add(mul(P["C4"], d[6]), div(x[6], P["R7"]), neg(e56)),
        add(mul(P["C5"], sub(d[7], d[8])), div(sub(x[7], P["Ub"]), P["R8"]), mul(P["alpha"], e56)),
        add(neg(mul(P["C5"], sub(d[7], d[8]))), div(x[8], P["R9"])),
    ]
    funcs: dict = {}
    _register(funcs, "Ue", _sine_source(0.1, 100.0))
    return DaeSystem(eqs, [f"x{j}" for j in range(1, 9)], funcs, name="transamp")


def ring_modulator() -> DaeSystem:
    """Ring modulator with ``C_s = 0`` (15 unknowns)."""
    x = [None] + [var(j) for j in range(1, 16)]
    d = [None] + [var(j, 1) for j in range(1, 16)]
    P = {k: param(k) for k in ("R", "Rc", "Rp", "Ri", "Rg1", "Rg2", "Rg3", "C", "Cp", "Lh",
                               "Ls1", "Ls2", "Ls3", "gamma", "delta")}
    Uin1, Uin2 = fn("Uin1", TIME), fn("Uin2", TIME)

    def q(u):
        return mul(P["gamma"], sub(exp(mul(P["delta"], u)), 1))

    UD1 = _sum([x[3], neg(x[5]), neg(x[7]), neg(Uin2)])
    UD2 = _sum([neg(x[4]), x[6], neg(x[7]), neg(Uin2)])
    UD3 = _sum([x[4], x[5], x[7], Uin2])
    UD4 = _sum([neg(x[3]), neg(x[6]), x[7], Uin2])
    q1, q2, q3, q4 = q(UD1), q(UD2), q(UD3), q(UD4)
    h = HALF
    eqs = [
        add(d[1], div(_sum([div(x[1], P["R"]), neg(x[8]), mul(h, x[10]), mul(-h, x[11]), neg(x[14])]), P["C"])),
        add(d[2], div(_sum([div(x[2], P["R"]), neg(x[9]), mul(h, x[12]), mul(-h, x[13]), neg(x[15])]), P["C"])),
        _sum([x[10], neg(q1), q4]),
        _sum([x[11], neg(q2), q3]),
        _sum([x[12], q1, neg(q3)]),
        _sum([x[13], q2, neg(q4)]),
        add(d[7], div(_sum([div(x[7], P["Rp"]), neg(q1), neg(q2), q3, q4]), P["Cp"])),
        add(d[8], div(x[1], P["Lh"])),
        add(d[9], div(x[2], P["Lh"])),
        add(d[10], div(_sum([mul(-h, x[1]), x[3], mul(P["Rg2"], x[10])]), P["Ls2"])),
        add(d[11], div(_sum([mul(h, x[1]), neg(x[4]), mul(P["Rg3"], x[11])]), P["Ls3"])),
        add(d[12], div(_sum([mul(-h, x[2]), x[5], mul(P["Rg2"], x[12])]), P["Ls2"])),
        add(d[13], div(_sum([mul(h, x[2]), neg(x[6]), mul(P["Rg3"], x[13])]), P["Ls3"])),
        add(d[14], div(_sum([x[1], mul(add(P["Rg1"], P["Ri"]), x[14]), neg(Uin1)]), P["Ls1"])),
        add(d[15], div(_sum([x[2], mul(add(P["Rc"], P["Rg1"]), x[15])]), P["Ls1"])),
    ]
    funcs: dict = {}
    _register(funcs, "Uin1", _sine_source(0.5, 1000.0))
    _register(funcs, "Uin2", _sine_source(2.0, 10000.0))
    return DaeSystem(eqs, [f"x{j}" for j in range(1, 16)], funcs, name="ringmod")


def toy_decomposition() -> tuple[list, list]:
    """Linear part ``A_0, A_1`` and nonlinear residual ``g`` of the toy DAE."""
    A0 = la.zeros(3, 3)
    A0[1][1] = Fraction(1)
    A1 = la.zeros(3, 3)
    A1[2][1] = A1[2][2] = Fraction(1)
    d1, d2, d3 = var(1, 1), var(2, 1), var(3, 1)
    g = [add(mul(d1, d2), mul(d2, d3), mul(d3, d1), pow_(d3, 2)),
         cos(sub(d1, d2)), cos(sub(d1, d2))]
    return [A0, A1], g


def toy_example() -> DaeSystem:
    (A0, A1), g = toy_decomposition()
    eqs = []
    for i in range(3):
        lin = [mul(A0[i][j], var(j + 1)) for j in range(3) if A0[i][j]]
        lin += [mul(A1[i][j], var(j + 1, 1)) for j in range(3) if A1[i][j]]
        eqs.append(add(*lin, g[i]))
    return DaeSystem(eqs, ["x1", "x2", "x3"], name="toy")


def toy_layer_form():
    from .jacobian import layer_form

    A, g = toy_decomposition()
    return layer_form(toy_example(), A, g)


# ---------------------------------------------------------------------------
# rank-one structured form


class SingularTransform(ValueError):
    pass


@dataclass(frozen=True)
class Rank1Term:
    order: int
    a: tuple
    b: tuple
    h: str


@dataclass(frozen=True)
class Rank1FormDae:
    """``g(t) + sum_l B_l x^(l) + sum h(a^T x^(l)) b``."""

    g: tuple
    B: tuple
    terms: tuple
    variables: tuple = ()

    def __post_init__(self):
        n = len(self.g)
        for Bl in self.B:
            if len(Bl) != n or any(len(r) != n for r in Bl):
                raise ValueError("B_l must be n x n")
        for t in self.terms:
            if len(t.a) != n or len(t.b) != n:
                raise ValueError("a and b must have length n")
            if not any(t.a) or not any(t.b):
                raise ValueError("a and b must be nonzero")
            if t.order < 0:
                raise ValueError("negative order")

    @property
    def n(self) -> int:
        return len(self.g)

    def to_dae(self, functions=None) -> DaeSystem:
        n = self.n
        eqs = []
        for i in range(n):
            parts = [self.g[i]]
            for l, Bl in enumerate(self.B):
                parts += [mul(Bl[i][j], var(j + 1, l)) for j in range(n) if Bl[i][j]]
            for t in self.terms:
                if t.b[i]:
                    arg = add(*(mul(t.a[j], var(j + 1, t.order)) for j in range(n) if t.a[j]))
                    parts.append(mul(t.b[i], fn(t.h, arg)))
            eqs.append(add(*parts))
        names = self.variables or tuple(f"x{j + 1}" for j in range(n))
        return DaeSystem(eqs, names, functions or {}, name="rank1form")


def rank1_jacobian(d: Rank1FormDae, p: Sequence[int], q: Sequence[int]) -> LinSymMatrix:
    """Direct linear symbolic Jacobian: one symbol per nonzero ``h'`` term."""
    n = d.n
    A0 = la.zeros(n, n)
    for i in range(n):
        for j in range(n):
            l = q[j] - p[i]
            if 0 <= l < len(d.B):
                A0[i][j] = Fraction(d.B[l][i][j])
    terms = []
    for t in d.terms:
        A = la.zeros(n, n)
        for i in range(n):
            for j in range(n):
                if t.b[i] and t.a[j] and q[j] - p[i] == t.order:
                    A[i][j] = Fraction(t.b[i]) * Fraction(t.a[j])
        if any(x for r in A for x in r):
            arg = add(*(mul(t.a[j], var(j + 1, t.order)) for j in range(n) if t.a[j]))
            terms.append(SymbolTerm(len(terms) + 1, Apply(t.h + "'", arg), A))
    return LinSymMatrix(A0, tuple(terms))


def linear_transform(d: Rank1FormDae, Cmat, Dmat) -> Rank1FormDae:
    """Equations mixed by ``C``, unknowns changed to ``y = D x``."""
    Cm, Dm = la.mat(Cmat), la.mat(Dmat)
    try:
        Dinv = la.inverse(Dm)
    except ZeroDivisionError:
        raise SingularTransform("D is singular") from None
    if la.det(Cm) == 0:
        raise SingularTransform("C is singular")
    n = d.n
    g = tuple(add(*(mul(Cm[i][k], d.g[k]) for k in range(n) if Cm[i][k])) for i in range(n))
    B = tuple(la.matmul(la.matmul(Cm, la.mat(Bl)), Dinv) for Bl in d.B)
    terms = []
    for t in d.terms:
        a = tuple(la.matvec(la.transpose(Dinv), t.a))
        b = tuple(la.matvec(Cm, t.b))
        terms.append(Rank1Term(t.order, a, b, t.h))
    return Rank1FormDae(g, B, tuple(terms), tuple(f"y{j + 1}" for j in range(n)))


def mna_rank1form() -> Rank1FormDae:
    F = Fraction
    g = (F(0), F(0), neg(param("I")), neg(param("E")), F(0))
    g = tuple(add(x) for x in g)
    B0 = la.mat([[0, 0, 0, 1, -1], [0, 0, 0, 0, 0], [0, 0, 0, 0, 1], [1, 0, 0, 0, 0], [1, 0, -1, 0, 0]])
    B1 = la.zeros(5, 5)
    terms = (Rank1Term(0, tuple(map(F, (1, -1, 0, 0, 0))), tuple(map(F, (-1, 1, 0, 0, 0))), "r"),
             Rank1Term(1, tuple(map(F, (0, 1, -1, 0, 0))), tuple(map(F, (0, -1, 1, 0, 0))), "c"),
             Rank1Term(1, tuple(map(F, (0, 0, 0, 0, 1))), tuple(map(F, (0, 0, 0, 0, 1))), "l"))
    return Rank1FormDae(g, (B0, B1), terms, ("E1", "E2", "E3", "IE", "IL"))


def mna_example() -> DaeSystem:
    """Five-unknown MNA circuit (nonlinear resistor, capacitor, inductor)."""
    E1, E2, E3, IE, IL = (var(j) for j in range(1, 6))
    r = fn("r", sub(E1, E2))
    c = fn("c", sub(var(2, 1), var(3, 1)))
    lL = fn("l", var(5, 1))
    eqs = [sub(sub(IE, IL), r), sub(r, c), add(c, IL, neg(param("I"))),
           sub(E1, param("E")), add(lL, neg(E3), E1)]
    return DaeSystem(eqs, ["E1", "E2", "E3", "IE", "IL"], name="mna")


def multibody_rank1form(n: int, edges: Sequence[tuple], A, B, p: Sequence[Expr]) -> Rank1FormDae:
    """``x'' = forces + A u`` and ``B x = p`` as a rank-one form over ``(x, u)``.

    ``edges`` holds ``(i, j, kind)`` with 1-based ``i != j`` and ``kind`` in
    ``{"position", "velocity"}``; the force named ``k{i}_{j}`` (``i < j``)
    acts on ``X_i`` and its negative on ``X_j``.
    """
    A, B = la.mat(A), la.mat(B)
    dd = len(B)
    N = n + dd
    B2 = la.zeros(N, N)
    B0 = la.zeros(N, N)
    for i in range(n):
        B2[i][i] = Fraction(1)
        for r in range(dd):
            B0[i][n + r] = -A[i][r]
    for r in range(dd):
        for j in range(n):
            B0[n + r][j] = B[r][j]
    g = tuple([add(0)] * n + [neg(pe) for pe in p])
    terms = []
    for i, j, kind in edges:
        i, j = min(i, j), max(i, j)
        if kind not in ("position", "velocity"):
            raise ValueError(f"unknown interaction kind {kind!r}")
        a = [Fraction(0)] * N
        b = [Fraction(0)] * N
        a[i - 1], a[j - 1] = Fraction(1), Fraction(-1)
        b[i - 1], b[j - 1] = Fraction(-1), Fraction(1)
        terms.append(Rank1Term(0 if kind == "position" else 1, tuple(a), tuple(b), f"k{i}_{j}"))
    names = tuple(f"x{i + 1}" for i in range(n)) + tuple(f"u{r + 1}" for r in range(dd))
    return Rank1FormDae(g, (B0, la.zeros(N, N), B2), tuple(terms), names)


def multibody(n: int, edges: Sequence[tuple], A, B, p: Sequence[Expr]) -> DaeSystem:
    d = multibody_rank1form(n, edges, A, B, p).to_dae()
    return d.replace(name="multibody")


def _robot_preset(arg: str) -> DaeSystem:
    N = 1
    if arg:
        key, _, val = arg.partition("=")
        if key.strip() != "N" or not val.strip().isdigit():
            raise ValueError(f"bad robot preset argument {arg!r}; expected N=<int>")
        N = int(val)
    return robotic_arm(N)


PRESETS = {
    "robot": _robot_preset,
    "transamp": lambda arg: transistor_amplifier(),
    "ringmod": lambda arg: ring_modulator(),
    "toy": lambda arg: toy_layer_form().dae,
    "mna": lambda arg: mna_example(),
}


def preset(spec: str) -> DaeSystem:
    """Resolve ``name`` or ``name:arg`` (e.g. ``robot:N=3``)."""
    name, _, arg = spec.partition(":")
    try:
        builder = PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    return builder(arg)
