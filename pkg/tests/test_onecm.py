import itertools
import random
from fractions import Fraction as F

from daereg import exactla as la
from daereg.jacobian import Factor, OneCMMatrix
from daereg.matroid import lm_formula_value, lm_rank
from daereg.models import robotic_arm, toy_layer_form
from daereg.onecm import (bordered_matrix, layered_sparse_rep, rank_1cm, sparse_rep,
                          symbolic_support, validate_vanishing_pair, vanishing_pair)
from daereg.transform import analyze

from oracles import onecm_substitution_rank, random_onecm

PAPER_P = (0, 0, 0, 2, 2)
PAPER_Q = (2, 2, 2, 0, 0)


def paper_V():
    V = la.identity(5)
    V[0][1] = F(-1)
    V[3][4] = F(1)
    return V


def robot_onecm():
    return analyze(robotic_arm(1)).onecm


def test_no_symbols_is_plain_rank():
    A = OneCMMatrix(la.mat([[1, 2], [2, 4]]))
    r = rank_1cm(A)
    assert r.rank == 1 and r.I == ()


def test_robot_and_toy_ranks():
    assert rank_1cm(robot_onecm()).rank == 4
    assert rank_1cm(analyze(toy_layer_form().dae).onecm).rank == 5


def test_sparse_rep_rank_identity():
    rng = random.Random(8)
    for _ in range(40):
        A = random_onecm(rng, 5, 4)
        vals = [F(rng.randint(1, 99)) for _ in range(A.m)]
        Ms = sparse_rep(A, vals)
        # the Schur complement of the diagonal block recovers A(vals)
        assert la.rank(Ms) - A.m == la.rank(A.evaluate([-1 / v for v in vals]))


def test_layered_rep_shape_and_certificate():
    A = robot_onecm()
    lm = layered_sparse_rep(A)
    assert lm.ncols == 2 * A.m + A.n
    r = rank_1cm(A)
    assert la.rank(bordered_matrix(A, r.I)) == r.rank


def test_bordered_rank_minimum_over_subsets():
    rng = random.Random(9)
    for _ in range(60):
        A = random_onecm(rng, 5, 5)
        r = rank_1cm(A)
        best = min(la.rank(bordered_matrix(A, sub))
                   for k in range(A.m + 1) for sub in itertools.combinations(range(A.m), k))
        assert best == r.rank == la.rank(bordered_matrix(A, r.I))


def test_paper_witness_validates():
    A = robot_onecm()
    v = validate_vanishing_pair(A, la.identity(5), paper_V(), PAPER_P, PAPER_Q)
    assert v.ok and v.term_rank == 4


def test_emitted_robot_pair():
    A = robot_onecm()
    vp = vanishing_pair(A, PAPER_P, PAPER_Q)
    assert vp is not None and vp.block_size == 2 * 5 - 4
    assert validate_vanishing_pair(A, vp.U, vp.V, PAPER_P, PAPER_Q, (vp.rows, vp.cols))


def test_toy_pair_block_size():
    a = analyze(toy_layer_form().dae)
    vp = vanishing_pair(a.onecm, a.duals.p, a.duals.q)
    assert vp.block_size == 7
    assert validate_vanishing_pair(a.onecm, vp.U, vp.V, a.duals.p, a.duals.q)


def test_nonsingular_has_no_pair():
    A = OneCMMatrix(la.identity(3))
    assert vanishing_pair(A, (0, 0, 0), (0, 0, 0)) is None
    v = validate_vanishing_pair(A, la.identity(3), la.identity(3), (0, 0, 0), (0, 0, 0))
    assert not v.ok and v.term_rank == 3


def test_validation_rejections():
    A = robot_onecm()
    U = la.identity(5)
    U[0][0] = F(0)
    assert "singular" in validate_vanishing_pair(A, U, paper_V(), PAPER_P, PAPER_Q).reason
    # a coupling from a low-priority row to a high one breaks triangularity
    U = la.identity(5)
    U[3][0] = F(1)
    v = validate_vanishing_pair(A, U, paper_V(), PAPER_P, PAPER_Q)
    assert not v.ok and "triangular" in v.reason


def test_random_rank_vs_oracle():
    rng = random.Random(21)
    for _ in range(150):
        A = random_onecm(rng)
        r = rank_1cm(A)
        assert r.rank == onecm_substitution_rank(A, rng)
        assert not r.fallback


def test_symbolic_support_of_identity_transform():
    A = OneCMMatrix(la.mat([[1, 0], [0, 0]]),
                    (Factor(1, (F(0), F(1)), (F(0), F(1)), 0, 0),))
    assert symbolic_support(A, la.identity(2), la.identity(2)) == {(0, 0), (1, 1)}


def test_lm_certificate_recheck():
    A = robot_onecm()
    r = rank_1cm(A)
    lm = layered_sparse_rep(A)
    cert = lm_rank(lm)
    assert lm_formula_value(lm, cert.I)[0] == cert.rank == r.lm_rank
    assert r.lm_rank - 2 * A.m == r.rank
