from fractions import Fraction

import pytest

from pvakit import (
    Context,
    MatrixDiffOp,
    NonMonomialDivisor,
    NotExact,
    PlanMismatch,
    lenard_extend,
    make_plan,
    recursion_order1,
    verify_sequence,
)
from pvakit.lenard import HierarchyRecord, HierarchyStep

from conftest import kdv_pair


def test_make_plan_validates(ctx1):
    u = ctx1.gen(0)
    K = MatrixDiffOp.single(ctx1, [(0, u.total_derivative()), (1, u.scale(2))])
    half = Fraction(1, 2)
    plan = make_plan(K, "chain", [(u ** half).scale(2), u ** half])
    assert plan.operator() == K
    with pytest.raises(PlanMismatch):
        make_plan(K, "derivative")
    with pytest.raises(PlanMismatch):
        make_plan(K, "chain", [u ** half, u ** half])
    with pytest.raises(PlanMismatch):
        make_plan(K, "chain", [u + ctx1.one(), u])


def test_derivative_plan_solutions(ctx1):
    K = MatrixDiffOp.derivative(ctx1)
    plan = make_plan(K, "derivative")
    u = ctx1.gen(0)
    X = plan.solve((u * ctx1.gen(0, 1),))
    assert X == ((u ** 2).scale(Fraction(1, 2)),)
    with pytest.raises(NotExact):
        plan.solve((u,))


def test_chain_plan_solves_square_root_factorization(ctx1):
    u = ctx1.gen(0)
    half = Fraction(1, 2)
    K = MatrixDiffOp.single(ctx1, [(0, u.total_derivative()), (1, u.scale(2))])
    plan = make_plan(K, "chain", [(u ** half).scale(2), u ** half])
    Y = K.apply((u ** Fraction(-5, 2),))
    X = plan.solve(Y)
    assert X == (u ** Fraction(-5, 2),)


def test_kdv_extension_values(ctx1c):
    H, K = kdv_pair(ctx1c)
    plan = make_plan(K, "derivative")
    rec = lenard_extend(H, K, plan, [(ctx1c.one(),)], 3, name="kdv")
    assert rec.step(1).F == (ctx1c.gen(0),)
    assert rec.step(2).F == (ctx1c.parse("3/2*u^2 + c*u''"),)
    assert rec.step(3).F == (
        ctx1c.parse("5/2*u^3 + 5*c*u*u'' + 5/2*c*u'^2 + c^2*u^(4)"),
    )
    assert rec.step(3).h is not None
    verify_sequence(H, K, rec)
    v = rec.verification
    assert v.passed()
    assert v.chain and v.orthogonality and v.involution_h and v.involution_k
    assert all(v.closed)


def test_seed_validation(ctx1c):
    H, K = kdv_pair(ctx1c)
    plan = make_plan(K, "derivative")
    with pytest.raises(NotExact):
        lenard_extend(H, K, plan, [(ctx1c.one(),), (ctx1c.one(),)], 3)


def test_recursion_order1_matches_extension(ctx1c):
    H, K = kdv_pair(ctx1c)
    chain = recursion_order1(ctx1c.num(1, 2), H, ctx1c.one(), 4)
    plan = make_plan(K, "derivative")
    rec = lenard_extend(H, K, plan, [(ctx1c.one(),)], 4)
    for n in range(5):
        assert (chain[n],) == tuple(rec.step(n).F)


def test_recursion_order1_hd_values():
    ctx = Context(("u",), ("alpha", "beta"))
    u = ctx.gen(0)
    H = MatrixDiffOp.single(ctx, [(1, ctx.param("alpha")), (3, ctx.param("beta"))])
    chain = recursion_order1(u, H, u ** Fraction(-1, 2), 2)
    q = Fraction
    upow = lambda e: u ** q(e)
    want1 = ctx.param("alpha") * upow(q(-3, 2)).scale(q(1, 4)) + ctx.param("beta") * (
        upow(q(-5, 4)) * upow(q(-1, 4)).total_derivative(2)
    )
    assert chain[1] == want1
    want2 = (
        ctx.param("alpha") ** 2 * upow(q(-5, 2)).scale(q(3, 32))
        + ctx.param("alpha") * ctx.param("beta")
        * (upow(q(-7, 4)) * upow(q(-3, 4)).total_derivative(2)).scale(q(5, 12))
        + ctx.param("beta") ** 2
        * (upow(q(-7, 4)) * upow(q(-3, 4)).total_derivative(4)).scale(q(1, 6))
    )
    assert chain[2] == want2


def test_recursion_order1_preconditions(ctx1):
    u = ctx1.gen(0)
    H = MatrixDiffOp.derivative(ctx1, 3)
    with pytest.raises(ValueError):
        recursion_order1(ctx1.num(1, 2), H, u, 2)  # seed not in the kernel
    with pytest.raises(NonMonomialDivisor):
        recursion_order1(u + ctx1.one(), H, ctx1.zero(), 1)


def test_verify_detects_corruption(ctx1c):
    H, K = kdv_pair(ctx1c)
    plan = make_plan(K, "derivative")
    rec = lenard_extend(H, K, plan, [(ctx1c.one(),)], 3)
    bad_steps = [
        HierarchyStep(s.n, s.F if s.n != 2 else (s.F[0] + ctx1c.gen(0, 1),), s.h, s.flow)
        for s in rec.steps
    ]
    bad = HierarchyRecord("kdv", "hamiltonian", {}, bad_steps)
    verify_sequence(H, K, bad)
    assert not bad.verification.chain
    assert not bad.verification.orthogonality
    assert not bad.verification.passed()


def test_verify_empty_record(ctx1c):
    H, K = kdv_pair(ctx1c)
    rec = HierarchyRecord("empty", "hamiltonian", {}, [])
    verify_sequence(H, K, rec)
    assert rec.verification.passed()


def test_linear_chain_with_offset_start(ctx1):
    H = MatrixDiffOp.derivative(ctx1, 3)
    K = MatrixDiffOp.derivative(ctx1)
    plan = make_plan(K, "derivative")
    rec = lenard_extend(H, K, plan, [(ctx1.gen(0),)], 4, start_index=1)
    assert [s.n for s in rec.steps] == [1, 2, 3, 4]
    for s in rec.steps:
        assert s.F == (ctx1.gen(0, 2 * (s.n - 1)),)


def test_record_json_shape(ctx1c):
    H, K = kdv_pair(ctx1c)
    plan = make_plan(K, "derivative")
    rec = verify_sequence(H, K, lenard_extend(H, K, plan, [(ctx1c.one(),)], 2, name="kdv"))
    data = rec.to_json()
    assert set(data) == {"name", "kind", "params", "steps", "verification"}
    assert set(data["steps"][0]) == {"n", "F", "h", "flow"}
    assert set(data["verification"]) == {
        "chain",
        "orthogonality",
        "involution_H",
        "involution_K",
        "gradients",
        "closed",
    }
    assert rec.json_text() == rec.json_text()


def test_solve_K_function(ctx1):
    from pvakit import MatrixDiffOp, make_plan, solve_K

    K = MatrixDiffOp.derivative(ctx1)
    plan = make_plan(K, "derivative")
    u = ctx1.gen(0)
    assert solve_K(plan, (u * ctx1.gen(0, 1),)) == ((u ** 2).scale(Fraction(1, 2)),)
