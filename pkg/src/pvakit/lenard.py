"""Recursion driver for bi-Hamiltonian and bi-symplectic chains.

Extends a seed F^0 (, F^1) through K F^{n+1} = H F^n with a structured
solver for K, fixes integration constants to zero, projects away
kernel slack with the exponent-sum grading when both operators are
homogeneous, attaches conserved densities through the exactness
algorithms, and verifies the produced chain (orthogonality, involution,
closedness).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .algebra import Context, Expression, VectorExpr, vec_dot, vec_is_zero
from .errors import LogRequired, NonMonomialDivisor, NotExact, PlanMismatch
from .operators import MatrixDiffOp
from .varcalc import (
    LocalFunctional,
    exactify,
    integrate_total,
    is_closed,
    variational_derivative,
)


def _invert_total(f: Expression) -> Expression:
    """d^{-1} with zero integration constant; the constant part must vanish."""
    g, c = integrate_total(f)
    if not c.is_zero():
        raise NotExact("constant obstruction %r in a derivative inversion" % c)
    return g


class DerivativePlan:
    """Solver for K = diag(d, ..., d): componentwise inversion of d."""

    def __init__(self, ctx: Context, size: Optional[int] = None):
        self.ctx = ctx
        self.size = ctx.nvars if size is None else size

    def operator(self) -> MatrixDiffOp:
        return MatrixDiffOp.derivative(self.ctx, 1, self.size)

    def solve(self, Y: VectorExpr) -> VectorExpr:
        if len(Y) != self.size:
            raise PlanMismatch("vector length does not match the plan")
        return tuple(_invert_total(y) for y in Y)


class ChainPlan:
    """Solver for a scalar K = m_0 . d o m_1 o d o ... o m_r built from
    invertible monomials."""

    def __init__(self, ctx: Context, monomials):
        if ctx.nvars != 1:
            raise PlanMismatch("chain plans are single-variable")
        self.ctx = ctx
        self.monomials = list(monomials)
        for m in self.monomials:
            if not m.is_monomial():
                raise PlanMismatch("chain factors must be monomials")
        self.size = 1

    def operator(self) -> MatrixDiffOp:
        op = MatrixDiffOp.mult(self.ctx, self.monomials[-1])
        d = MatrixDiffOp.derivative(self.ctx, 1, 1)
        for m in reversed(self.monomials[:-1]):
            op = MatrixDiffOp.mult(self.ctx, m).compose(d.compose(op))
        return op

    def solve(self, Y: VectorExpr) -> VectorExpr:
        (cur,) = Y
        for m in self.monomials[:-1]:
            cur = _invert_total(cur / m)
        return (cur / self.monomials[-1],)


class CnwHdPlan:
    """Solver for the two-variable operator
    [[u' + 2 u d, v d], [v' + v d, 0]]:
    the second row is d(v X_1), so X_1 comes from the second component and
    X_2 from the first."""

    def __init__(self, ctx: Context):
        if ctx.nvars != 2:
            raise PlanMismatch("this plan needs exactly two variables")
        self.ctx = ctx
        self.size = 2

    def operator(self) -> MatrixDiffOp:
        ctx = self.ctx
        u = ctx.gen(0, 0)
        v = ctx.gen(1, 0)
        return MatrixDiffOp(
            ctx,
            [
                [[(0, u.total_derivative()), (1, u.scale(2))], [(1, v)]],
                [[(0, v.total_derivative()), (1, v)], []],
            ],
        )

    def solve(self, Y: VectorExpr) -> VectorExpr:
        ctx = self.ctx
        u = ctx.gen(0, 0)
        v = ctx.gen(1, 0)
        x1 = _invert_total(Y[1]) / v
        rest = Y[0] - u.total_derivative() * x1 - u.scale(2) * x1.total_derivative()
        x2 = _invert_total(rest / v)
        return (x1, x2)


def solve_K(plan, Y: VectorExpr) -> VectorExpr:
    """Solve K X = Y with the structured plan, zero integration constants."""
    return plan.solve(tuple(Y))


def make_plan(K: MatrixDiffOp, kind: str, monomials=None):
    """Build a solver plan and validate that it reproduces K."""
    ctx = K.ctx
    if kind == "derivative":
        plan = DerivativePlan(ctx, K.nrows)
    elif kind == "chain":
        plan = ChainPlan(ctx, monomials)
    elif kind == "cnw_hd":
        plan = CnwHdPlan(ctx)
    else:
        raise PlanMismatch("unknown plan kind %r" % kind)
    if plan.operator() != K:
        raise PlanMismatch("plan does not compose out to the given operator")
    return plan


@dataclass
class HierarchyStep:
    n: int
    F: VectorExpr
    h: Optional[LocalFunctional]
    flow: VectorExpr

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "F": [f.render() for f in self.F],
            "h": self.h.rep.render() if self.h is not None else None,
            "flow": [f.render() for f in self.flow],
        }


@dataclass
class Verification:
    chain: Optional[bool] = None
    orthogonality: Optional[bool] = None
    involution_h: Optional[bool] = None
    involution_k: Optional[bool] = None
    gradients: Optional[bool] = None
    closed: list = field(default_factory=list)

    def passed(self) -> bool:
        flags = [
            self.chain,
            self.orthogonality,
            self.involution_h,
            self.involution_k,
            self.gradients,
        ]
        return all(f is not False for f in flags) and all(self.closed)

    def to_json(self) -> dict:
        return {
            "chain": self.chain,
            "orthogonality": self.orthogonality,
            "involution_H": self.involution_h,
            "involution_K": self.involution_k,
            "gradients": self.gradients,
            "closed": list(self.closed),
        }


@dataclass
class HierarchyRecord:
    name: str
    kind: str  # "hamiltonian" | "symplectic" | "dirac"
    params: dict
    steps: list
    verification: Verification = field(default_factory=Verification)

    def step(self, n: int) -> HierarchyStep:
        for s in self.steps:
            if s.n == n:
                return s
        raise KeyError(n)

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "kind": self.kind,
            "params": self.params,
            "steps": [s.to_json() for s in self.steps],
            "verification": self.verification.to_json(),
        }

    def json_text(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)


def _vector_degree(F: VectorExpr) -> Optional[Fraction]:
    """Common exponent-sum degree of the nonzero components, if any."""
    deg = None
    for f in F:
        if f.is_zero():
            continue
        d = f.degree_if_homogeneous()
        if d is None or (deg is not None and d != deg):
            return None
        deg = d
    return deg


def _attach_density(gradient: VectorExpr) -> Optional[LocalFunctional]:
    if not is_closed(gradient).closed:
        return None
    try:
        return LocalFunctional(exactify(gradient))
    except LogRequired:
        return None


def lenard_extend(
    H: MatrixDiffOp,
    K: MatrixDiffOp,
    plan,
    seeds,
    depth: int,
    start_index: int = 0,
    name: str = "",
    kind: str = "hamiltonian",
    params: Optional[dict] = None,
) -> HierarchyRecord:
    """Extend seed vectors to F^0 ... F^depth through K F^{n+1} = H F^n.

    Seeds must already satisfy the recursion pairwise.  Kernel slack is
    fixed by zero integration constants, plus projection onto the expected
    grading degree when H and K are homogeneous.
    """
    seeds = [tuple(s) for s in seeds]
    for a, b in zip(seeds, seeds[1:]):
        if K.apply(b) != H.apply(a):
            raise NotExact("seed vectors do not satisfy the recursion")
    dH = H.homogeneous_degree()
    dK = K.homogeneous_degree()
    chain = list(seeds)
    while len(chain) <= depth - start_index:
        prev = chain[-1]
        target = None
        if dH is not None and dK is not None:
            d = _vector_degree(prev)
            if d is not None:
                target = d + dH - dK
        try:
            nxt = plan.solve(H.apply(prev))
        except (NotExact, LogRequired) as exc:
            raise type(exc)(
                "step %d: %s" % (start_index + len(chain), exc)
            ) from exc
        if target is not None:
            nxt = tuple(x.project_degree(target) for x in nxt)
        chain.append(nxt)
    steps = []
    for offset, F in enumerate(chain):
        n = start_index + offset
        gradient = F if kind == "hamiltonian" else K.apply(F)
        h = _attach_density(gradient)
        flow = H.apply(F) if kind == "hamiltonian" else F
        steps.append(HierarchyStep(n, F, h, flow))
    return HierarchyRecord(name, kind, params or {}, steps)


def recursion_order1(
    k: Expression, H: MatrixDiffOp, F0: Expression, depth: int
) -> list[Expression]:
    """Scalar partial-sum recursion for K = d(k) + 2 k d:

        d(k F^0 F^{n+1}) = 1/2 sum_{m<=n} F^{n-m} H F^m
                           - 1/2 sum_{1<=m<=n} d(k F^{n+1-m} F^m),

    solved with zero integration constants; the seed must satisfy
    K F^0 = 0 and k F^0 must be an invertible monomial."""
    ctx = k.ctx
    if ctx.nvars != 1:
        raise PlanMismatch("this recursion is single-variable")
    K = MatrixDiffOp.single(
        ctx, [(0, k.total_derivative()), (1, k.scale(2))]
    )
    if not vec_is_zero(K.apply((F0,))):
        raise ValueError("seed is not in the kernel of d(k) + 2 k d")
    divisor = k * F0
    if not divisor.is_monomial():
        raise NonMonomialDivisor("k times the seed must be a monomial")
    chain = [F0]
    images = [H.apply((F0,))[0]]
    for n in range(depth):
        rhs = ctx.zero()
        for m in range(n + 1):
            rhs = rhs + chain[n - m] * images[m]
        rhs = rhs.scale(Fraction(1, 2))
        inner = ctx.zero()
        for m in range(1, n + 1):
            inner = inner + k * chain[n + 1 - m] * chain[m]
        rhs = rhs - inner.scale(Fraction(1, 2)).total_derivative()
        nxt = _invert_total(rhs) / divisor
        chain.append(nxt)
        images.append(H.apply((nxt,))[0])
    return chain


def verify_sequence(
    H: MatrixDiffOp, K: MatrixDiffOp, record: HierarchyRecord
) -> HierarchyRecord:
    """Fill the verification flags of a record in place and return it.

    Checks the recursion K F^{n+1} = H F^n, pairwise orthogonality of the
    chain under both operators, closedness of the gradient at every step,
    the gradient/density relation, and involution of all attached
    densities under both brackets.
    """
    steps = record.steps
    ver = record.verification
    if not steps:
        ver.chain = ver.orthogonality = True
        ver.involution_h = ver.involution_k = ver.gradients = True
        ver.closed = []
        return record
    Fs = [s.F for s in steps]
    HF = [H.apply(F) for F in Fs]
    KF = [K.apply(F) for F in Fs]
    ver.chain = all(KF[m + 1] == HF[m] for m in range(len(Fs) - 1))
    ortho = True
    for m in range(len(Fs)):
        for n in range(len(Fs)):
            for image in (HF[n], KF[n]):
                if not LocalFunctional(vec_dot(Fs[m], image)).is_zero():
                    ortho = False
    ver.orthogonality = ortho
    gradients = [F if record.kind == "hamiltonian" else KFn for F, KFn in zip(Fs, KF)]
    ver.closed = [is_closed(g).closed for g in gradients]
    ok = True
    for s, g in zip(steps, gradients):
        if s.h is not None and variational_derivative(s.h.rep) != tuple(g):
            ok = False
    ver.gradients = ok
    if record.kind == "hamiltonian":
        from .brackets import functional_bracket

        hs = [s.h for s in steps if s.h is not None]
        ver.involution_h = all(
            functional_bracket(H, a, b).is_zero() for a in hs for b in hs
        )
        ver.involution_k = all(
            functional_bracket(K, a, b).is_zero() for a in hs for b in hs
        )
    else:
        # symplectic chains: {int h_m, int h_n} under either operator is
        # int P^m . (op P^n), already the orthogonality pairing
        inv_h = all(
            LocalFunctional(vec_dot(Fs[m], HF[n])).is_zero()
            for m in range(len(Fs))
            for n in range(len(Fs))
        )
        inv_k = all(
            LocalFunctional(vec_dot(Fs[m], KF[n])).is_zero()
            for m in range(len(Fs))
            for n in range(len(Fs))
        )
        ver.involution_h = inv_h
        ver.involution_k = inv_k
    return record
