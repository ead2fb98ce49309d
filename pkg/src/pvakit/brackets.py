"""Lambda-bracket calculus and structure verification.

The bracket of two expressions induced by a matrix differential operator H
(with {u_i lam u_j} = H_ji(lam)) is computed by the master expansion

    {f_lam g} = sum_{i,j,m,n} dg/du_j^(n) (lam+d)^n H_ji(lam+d)->
                 (-lam-d)^m df/du_i^(m),

all derivatives resolved rightward.  On top of it sit the Beltrami bracket
(H = identity), brackets of local functionals, and the checkers for
Hamiltonian, compatible and symplectic operators; the latter two report
residual witnesses per generator triple.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import product
from math import comb
from typing import Optional, Sequence, Union

from .algebra import Context, Expression, VectorExpr, vec_dot, vec_sub
from .errors import IndividualFailure
from .operators import BiLambdaPoly, LambdaPoly, MatrixDiffOp
from .varcalc import LocalFunctional, frechet, variational_derivative


def lambda_bracket(H: MatrixDiffOp, f: Expression, g: Expression) -> LambdaPoly:
    """{f_lam g} for the bracket with {u_i lam u_j} = H_ji(lam)."""
    ctx = f.ctx
    ell = ctx.nvars
    zero = LambdaPoly(ctx, {})
    # A_i = sum_m (-lam-d)^m df/du_i^(m)
    A = []
    for i in range(ell):
        acc = zero
        for m in range(f.max_order() + 1):
            p = f.partial(i, m)
            if p.is_zero():
                continue
            term = LambdaPoly.of(p)
            for _ in range(m):
                term = -term.shift_apply()
            acc = acc + term
        A.append(acc)
    out = zero
    for j in range(ell):
        cj = zero
        for i in range(ell):
            if A[i].is_zero():
                continue
            entry = H.entry(j, i)
            if entry:
                cj = cj + A[i].op_apply(entry)
        if cj.is_zero():
            continue
        shifted = cj
        last = 0
        for n in range(g.max_order() + 1):
            p = g.partial(j, n)
            if p.is_zero():
                continue
            shifted = shifted.shift_apply(n - last)
            last = n
            out = out + shifted.mul_expr(p)
    return out


def beltrami_bracket(f: Expression, g: Expression) -> LambdaPoly:
    """The bracket with {u_i lam u_j} = delta_ij; its value against a
    generator collects the higher Euler operators of f."""
    return lambda_bracket(MatrixDiffOp.identity(f.ctx), f, g)


def skew_image(x: LambdaPoly) -> LambdaPoly:
    """-{g_{-lam-d} f} built from {g_lam f}: negate and substitute."""
    return -x.subst_neg_shift()


def nested_bracket_left(H: MatrixDiffOp, f: Expression, x: LambdaPoly) -> BiLambdaPoly:
    """{f_lam x} applied to the coefficients of x, whose degrees are read
    as powers of mu."""
    ctx = f.ctx
    out = BiLambdaPoly(ctx, {})
    for b, xb in x.coeffs.items():
        lp = lambda_bracket(H, f, xb)
        out = out + BiLambdaPoly(ctx, {(a, b): v for a, v in lp.coeffs.items()})
    return out


def nested_bracket_right(H: MatrixDiffOp, f: Expression, x: LambdaPoly) -> BiLambdaPoly:
    """{f_mu x} applied to the coefficients of x, whose degrees are read
    as powers of lambda."""
    ctx = f.ctx
    out = BiLambdaPoly(ctx, {})
    for a, xa in x.coeffs.items():
        lp = lambda_bracket(H, f, xa)
        out = out + BiLambdaPoly(ctx, {(a, b): v for b, v in lp.coeffs.items()})
    return out


def nested_bracket_composed(
    H: MatrixDiffOp, x: LambdaPoly, g: Expression
) -> BiLambdaPoly:
    """{x(lam)_{lam+mu} g}: bracket each coefficient against g and
    evaluate the bracket variable at lam + mu."""
    ctx = g.ctx
    out = BiLambdaPoly(ctx, {})
    for a, xa in x.coeffs.items():
        lp = lambda_bracket(H, xa, g)
        for k, w in lp.coeffs.items():
            for j in range(k + 1):
                key = (a + j, k - j)
                term = w.scale(comb(k, j))
                out = out + BiLambdaPoly(ctx, {key: term})
    return out


def functional_bracket(
    H: MatrixDiffOp, a: Union[LocalFunctional, Expression], b
) -> LocalFunctional:
    """{int a, int b} = int (delta b/delta u . H delta a/delta u)."""
    fa = a.rep if isinstance(a, LocalFunctional) else a
    fb = b.rep if isinstance(b, LocalFunctional) else b
    va = variational_derivative(fa)
    vb = variational_derivative(fb)
    return LocalFunctional(vec_dot(vb, H.apply(va)))


def hamiltonian_vector_field(H: MatrixDiffOp, h) -> VectorExpr:
    """Characteristics of the flow of int h: H applied to delta h/delta u."""
    f = h.rep if isinstance(h, LocalFunctional) else h
    return H.apply(variational_derivative(f))


def evolutionary_commutator(P: VectorExpr, Q: VectorExpr) -> VectorExpr:
    """Characteristics of [X_P, X_Q]: D_Q(d) P - D_P(d) Q."""
    return vec_sub(frechet(Q).apply(P), frechet(P).apply(Q))


# ---------------------------------------------------------------------------
# structure checks


@dataclass
class CheckFailure:
    kind: str  # "skew" | "jacobi" | "symplectic" | "golden"
    triple: Optional[tuple] = None  # 1-based indices when applicable
    residual_text: str = ""
    residual: object = None

    def to_json(self) -> dict:
        return {"triple": self.triple, "residual_text": self.residual_text}


@dataclass
class CheckReport:
    passed: bool
    failures: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "failures": [f.to_json() for f in self.failures],
        }

    def json_text(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)


def _gen_bracket(H: MatrixDiffOp, i: int, x: Expression) -> LambdaPoly:
    """{u_i lam x} = sum_{h,n} dx/du_h^(n) (lam+d)^n H_hi(lam)."""
    ctx = x.ctx
    out = LambdaPoly(ctx, {})
    for h in range(ctx.nvars):
        sym = H.symbol(h, i)
        if sym.is_zero():
            continue
        shifted = sym
        last = 0
        for n in range(x.max_order() + 1):
            p = x.partial(h, n)
            if p.is_zero():
                continue
            shifted = shifted.shift_apply(n - last)
            last = n
            out = out + shifted.mul_expr(p)
    return out


def jacobi_triple_residual(H: MatrixDiffOp, i: int, j: int, k: int) -> BiLambdaPoly:
    """Residual of the generator-triple Jacobi identity, zero for a
    Hamiltonian operator:

      sum_{h,n} [ dH_kj(mu)/du_h^(n) (lam+d)^n H_hi(lam)
                - dH_ki(lam)/du_h^(n) (mu+d)^n H_hj(mu) ]
      - sum_{h,n} H_kh(lam+mu+d)-> (-lam-mu-d)^n dH_ji(lam)/du_h^(n).
    """
    ctx = H.ctx
    ell = ctx.nvars
    res = BiLambdaPoly(ctx, {})
    # first term: {u_i lam H_kj(mu)} spread over mu degrees
    for b, xb in H.symbol(k, j).coeffs.items():
        lp = _gen_bracket(H, i, xb)
        res = res + BiLambdaPoly(ctx, {(a, b): v for a, v in lp.coeffs.items()})
    # second term: {u_j mu H_ki(lam)}
    for a, ya in H.symbol(k, i).coeffs.items():
        lp = _gen_bracket(H, j, ya)
        res = res - BiLambdaPoly(ctx, {(a, b): v for b, v in lp.coeffs.items()})
    # right side: {H_ji(lam) _(lam+mu) u_k}
    for a, za in H.symbol(j, i).coeffs.items():
        for h in range(ell):
            entry = H.entry(k, h)
            if not entry:
                continue
            for n in range(za.max_order() + 1):
                p = za.partial(h, n)
                if p.is_zero():
                    continue
                B = BiLambdaPoly(ctx, {(a, 0): p}).shift_both_neg(n)
                res = res - B.op_apply_both(entry)
    return res


def check_pva(H: MatrixDiffOp) -> CheckReport:
    """Hamiltonian test: skew-adjointness plus the Jacobi identity on all
    generator triples."""
    defect = H.adjoint() + H
    if not defect.is_zero():
        return CheckReport(
            False,
            [CheckFailure("skew", None, defect.render(), defect)],
        )
    ell = H.ctx.nvars
    failures = []
    for i, j, k in product(range(ell), repeat=3):
        r = jacobi_triple_residual(H, i, j, k)
        if not r.is_zero():
            failures.append(
                CheckFailure("jacobi", (i + 1, j + 1, k + 1), r.render(), r)
            )
    return CheckReport(not failures, failures)


_MIX_PREFIX = "t"


def _mixing_names(ctx: Context, count: int) -> list[str]:
    taken = set(ctx.params) | set(ctx.var_names)
    names = []
    k = 1
    while len(names) < count:
        name = "%s%d" % (_MIX_PREFIX, k)
        if name not in taken:
            names.append(name)
        k += 1
    return names


def check_compatible(ops: Sequence[MatrixDiffOp]) -> CheckReport:
    """Compatibility: a generic linear combination with fresh formal
    parameters must itself pass the Hamiltonian test."""
    if len({op.ctx for op in ops}) != 1:
        raise ValueError("operators must share one context")
    bad = [idx for idx, H in enumerate(ops) if not check_pva(H).passed]
    if bad:
        raise IndividualFailure(bad)
    ctx = ops[0].ctx
    names = _mixing_names(ctx, len(ops))
    big = ctx.extend_params(names)
    total = MatrixDiffOp.zero(big, ops[0].nrows)
    for name, H in zip(names, ops):
        total = total + H.with_context(big).scale_expr(big.param(name))
    return check_pva(total)


def symplectic_triple_residual(S: MatrixDiffOp, i: int, j: int, k: int) -> BiLambdaPoly:
    """Residual of the closedness condition for a skew-adjoint operator
    viewed as a two-form:

      sum_n [ dS_ki(mu)/du_j^(n) lam^n - dS_kj(lam)/du_i^(n) mu^n
            + (-lam-mu-d)^n dS_ij(lam)/du_k^(n) ].
    """
    ctx = S.ctx
    res = BiLambdaPoly(ctx, {})
    for b, sb in S.symbol(k, i).coeffs.items():
        for n in range(sb.max_order() + 1):
            p = sb.partial(j, n)
            if not p.is_zero():
                res = res + BiLambdaPoly(ctx, {(n, b): p})
    for a, sa in S.symbol(k, j).coeffs.items():
        for n in range(sa.max_order() + 1):
            p = sa.partial(i, n)
            if not p.is_zero():
                res = res - BiLambdaPoly(ctx, {(a, n): p})
    for a, sa in S.symbol(i, j).coeffs.items():
        for n in range(sa.max_order() + 1):
            p = sa.partial(k, n)
            if not p.is_zero():
                res = res + BiLambdaPoly(ctx, {(a, 0): p}).shift_both_neg(n)
    return res


def check_symplectic(S: MatrixDiffOp) -> CheckReport:
    defect = S.adjoint() + S
    if not defect.is_zero():
        return CheckReport(
            False, [CheckFailure("skew", None, defect.render(), defect)]
        )
    ell = S.ctx.nvars
    failures = []
    for i, j, k in product(range(ell), repeat=3):
        r = symplectic_triple_residual(S, i, j, k)
        if not r.is_zero():
            failures.append(
                CheckFailure("symplectic", (i + 1, j + 1, k + 1), r.render(), r)
            )
    return CheckReport(not failures, failures)


def two_form_from_potential(F: VectorExpr) -> MatrixDiffOp:
    """The symplectic operator D_F - D_F^* attached to a vector F."""
    d = frechet(F)
    return d - d.adjoint()


def jacobi_operator_residual(
    H: MatrixDiffOp, F: VectorExpr, G: VectorExpr
) -> VectorExpr:
    """Difference of the two sides of the operator form of the Jacobi
    identity, evaluated on concrete vectors F, G; zero for Hamiltonian H."""
    HF = H.apply(F)
    HG = H.apply(G)
    lhs_inner = (
        frechet(G).apply(HF),
        frechet(HF, adjoint=True).apply(G),
        tuple(-x for x in frechet(F).apply(HG)),
        frechet(F, adjoint=True).apply(HG),
    )
    lhs = H.apply(
        tuple(a + b + c + d for a, b, c, d in zip(*lhs_inner))
    )
    rhs = vec_sub(frechet(HG).apply(HF), frechet(HF).apply(HG))
    return vec_sub(lhs, rhs)
