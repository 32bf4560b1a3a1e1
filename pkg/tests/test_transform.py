import random
from fractions import Fraction as F

import pytest

from daereg import exactla as la
from daereg.dae import DaeSystem
from daereg.models import robotic_arm, toy_layer_form
from daereg.structural import sigma_matrix
from daereg.symexpr import NEG_INF, add, expand_arithmetic, mul, neg, substitute, sub, var
from daereg.transform import (Status, TriangularityViolation, analyze, apply_col_transform,
                              apply_row_transform, lti_regularize, regularize,
                              retrieval_system)

from oracles import random_pencil, sympy_det_degree

P = (0, 0, 0, 2, 2)
Q = (2, 2, 2, 0, 0)


def paper_V():
    V = la.identity(5)
    V[0][1] = F(-1)
    V[3][4] = F(1)
    return V


def test_identity_transforms_are_noops():
    d = robotic_arm(1)
    assert apply_row_transform(d, la.identity(5), P).equations == d.equations
    assert apply_col_transform(d, la.identity(5), Q).equations == d.equations


def test_paper_column_change():
    d = robotic_arm(1)
    out = apply_col_transform(d, paper_V(), Q)
    # theta0 = y1 - y2, theta1 = y2, phi = y3, tau0 = y4 + y5, tau1 = y5
    images = {1: sub(var(1), var(2)), 2: var(2), 3: var(3), 4: add(var(4), var(5)), 5: var(5)}
    want = [substitute(f, lambda j, l: _diff(images[j], l)) for f in d.equations]
    assert [expand_arithmetic(a) for a in out.equations] == [expand_arithmetic(b) for b in want]


def _diff(e, l):
    from daereg.symexpr import diff_time

    for _ in range(l):
        e = diff_time(e)
    return e


def test_transformed_robot_sigma():
    S = sigma_matrix(apply_col_transform(robotic_arm(1), paper_V(), Q))
    assert S[0][4] is NEG_INF and S[1][4] is NEG_INF
    assert S[3][1] == 0
    # syntactic sigma keeps theta1'' in row 1 after theta0 -> y1 - y2
    assert S[0][1] == 2


def test_triangularity_enforced():
    d = robotic_arm(1)
    U = la.identity(5)
    U[3][0] = F(1)
    with pytest.raises(TriangularityViolation):
        apply_row_transform(d, U, P)
    V = la.identity(5)
    V[0][3] = F(1)
    with pytest.raises(TriangularityViolation):
        apply_col_transform(d, V, Q)


def test_robot_regularize():
    r = regularize(robotic_arm(1))
    assert r.status is Status.REGULARIZED
    assert r.delta_hats == [2, 0] and r.iterations == 1
    assert analyze(r.dae).rank.rank == 5


def test_toy_regularize():
    r = regularize(toy_layer_form().dae, probe=True)
    assert r.trace[0].rank == 5
    assert r.status is Status.REGULARIZED
    assert r.probe["max_rank"] == 6


def test_already_regular():
    d = DaeSystem([sub(var(1, 1), var(1))], ["x"])
    r = regularize(d)
    assert r.status is Status.REGULARIZED and r.iterations == 0
    fs = retrieval_system(r)
    assert fs.n == 2
    assert expand_arithmetic(fs.equations[1]) == expand_arithmetic(sub(var(1), var(2)))


def test_structurally_singular():
    d = DaeSystem([add(var(1), var(2)), mul(2, add(var(1), var(2)))], ["a", "b"])
    # singular Jacobian; one transform exposes a zero equation
    r = regularize(d)
    assert r.iterations == 1 and r.status is Status.STRUCTURALLY_SINGULAR
    d2 = DaeSystem([var(1), neg(var(1))], ["a", "b"])
    assert regularize(d2).status is Status.STRUCTURALLY_SINGULAR


@pytest.mark.parametrize("builder,size", [(lambda: robotic_arm(1), 10),
                                          (lambda: toy_layer_form().dae, 12)])
def test_retrieval_nonsingular(builder, size):
    r = regularize(builder())
    fs = retrieval_system(r)
    a = analyze(fs)
    assert fs.n == size and a.rank.rank == size


def test_lti_small_cases():
    s_pencil = [la.mat([[0, 1], [0, 1]]), la.mat([[1, 0], [1, 0]])]
    r = lti_regularize(s_pencil)
    assert r.trace[0].rank < 2
    deg = sympy_det_degree(s_pencil)
    assert deg is None and r.status is not Status.REGULARIZED
    diag = [la.mat([[0, 0], [0, 1]]), la.mat([[1, 0], [0, 0]])]
    r = lti_regularize(diag)
    assert r.iterations == 0 and r.delta_hats == [1]


def test_lti_random_fixpoint():
    rng = random.Random(4)
    transformed = 0
    for _ in range(100):
        co = random_pencil(rng, 4)
        r = lti_regularize(co)
        deg = sympy_det_degree(co)
        if r.status is Status.STRUCTURALLY_SINGULAR or deg is None:
            continue
        assert r.status is Status.REGULARIZED
        assert r.delta_hats[-1] == deg
        transformed += r.iterations > 0
    assert transformed >= 5


def test_lti_matches_general_loop():
    rng = random.Random(5)
    for _ in range(30):
        co = random_pencil(rng, 4)
        n = len(co[0])
        r = lti_regularize(co)
        if r.status is Status.STRUCTURALLY_SINGULAR:
            continue
        eqs = [add(*[mul(co[l][i][j], var(j + 1, l)) for l in range(len(co)) for j in range(n)])
               for i in range(n)]
        rr = regularize(DaeSystem(eqs, [f"x{j}" for j in range(n)]))
        assert rr.delta_hats == r.delta_hats
