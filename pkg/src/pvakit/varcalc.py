"""Variational calculus over an algebra of differential functions.

Provides the variational derivative and higher Euler operators, the first
variation (Frechet derivative) of a vector of expressions together with
its formal adjoint, the closedness test D_F = D_F^*, and the two exactness
algorithms: inversion of the total derivative and reconstruction of a
potential for a closed vector.  Local functionals (expressions modulo
total derivatives) and their equality test live here as well.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Optional

from .algebra import Context, Expression, VectorExpr, mono_set_exp, vec_is_zero
from .errors import LogRequired, NotClosed, NotExact, OrderViolation
from .operators import MatrixDiffOp


def variational_derivative(f: Expression) -> VectorExpr:
    """delta f / delta u: component i is sum_n (-d)^n (df/du_i^(n))."""
    ctx = f.ctx
    out = []
    top = f.max_order()
    for i in range(ctx.nvars):
        acc = ctx.zero()
        for n in range(top + 1):
            p = f.partial(i, n)
            if p.is_zero():
                continue
            acc = acc + p.total_derivative(n).scale((-1) ** n)
        out.append(acc)
    return tuple(out)


def euler_operator(f: Expression, i: int, m: int) -> Expression:
    """The m-th Euler operator sum_n C(n,m) (-1)^n d^(n-m) (df/du_i^(n))."""
    ctx = f.ctx
    acc = ctx.zero()
    for n in range(m, f.max_order() + 1):
        p = f.partial(i, n)
        if p.is_zero():
            continue
        acc = acc + p.total_derivative(n - m).scale((-1) ** n * comb(n, m))
    return acc


def frechet(F: VectorExpr, adjoint: bool = False) -> MatrixDiffOp:
    """First-variation operator of F: entry (i, j) is sum_n (dF_i/du_j^(n)) d^n."""
    ctx = F[0].ctx
    rows = []
    for f in F:
        top = f.max_order()
        row = []
        for j in range(ctx.nvars):
            entry = []
            for n in range(top + 1):
                p = f.partial(j, n)
                if not p.is_zero():
                    entry.append((n, p))
            row.append(entry)
        rows.append(row)
    op = MatrixDiffOp(ctx, rows)
    return op.adjoint() if adjoint else op


@dataclass
class ClosednessReport:
    closed: bool
    defect: MatrixDiffOp  # D_F - D_F^*


def is_closed(F: VectorExpr) -> ClosednessReport:
    d = frechet(F)
    defect = d - d.adjoint()
    return ClosednessReport(defect.is_zero(), defect)


def antiderivative(f: Expression, i: int, n: int) -> Expression:
    """Termwise preimage of d/du_i^(n) for f of differential order <= (n, i).

    Raises LogRequired when a term carries exponent -1 in u_i^(n), and
    OrderViolation when f depends on a jet variable above (n, i).
    """
    ctx = f.ctx
    g = (n, i)
    out = {}
    for m, c in f.terms.items():
        if m and m[0][0] > g:
            raise OrderViolation(
                "argument depends on %s, above the integration variable %s"
                % (ctx.gen_name(m[0][0]), ctx.gen_name(g))
            )
        e = 0
        for h, x in m:
            if h == g:
                e = x
                break
        if e == -1:
            raise LogRequired(
                "term %s needs a logarithm in %s"
                % (Expression(ctx, {m: c}).render(), ctx.gen_name(g))
            )
        nm = mono_set_exp(m, g, e + 1)
        out[nm] = c / _coeff_num(ctx, e + 1)
    return Expression(ctx, out)


def _coeff_num(ctx: Context, q):
    from .fields import Coefficient

    return Coefficient.from_fraction(Fraction(q), len(ctx.params))


def integrate_total(f: Expression):
    """Write f = d(g) + const, or raise NotExact / LogRequired.

    Descends the order-then-index filtration: at top pair (n, i) the slice
    d(f)/du_i^(n) is integrated in u_i^(n-1) and the resulting total
    derivative subtracted.
    """
    if not vec_is_zero(variational_derivative(f)):
        raise NotExact("nonzero variational derivative, not a total derivative")
    ctx = f.ctx
    g = ctx.zero()
    cur = f
    prev = None
    while True:
        top = cur.diff_order()
        if top is None:
            return g, cur.constant_coefficient()
        if prev is not None and top >= prev:
            raise NotExact("no descent at %s" % (top,))
        prev = top
        n, i = top
        if n == 0:
            raise NotExact("depends on undifferentiated variables only")
        piece = antiderivative(cur.partial(i, n), i, n - 1)
        g = g + piece
        cur = cur - piece.total_derivative()


def _exactify_scaling(F: VectorExpr) -> Optional[Expression]:
    """Potential via the grading shortcut: f = sum over eigencomponents of
    (u . F) scaled by the inverse eigenvalue; None when a component sits
    at eigenvalue zero."""
    ctx = F[0].ctx
    w = ctx.zero()
    for i, fi in enumerate(F):
        w = w + ctx.gen(i, 0) * fi
    f = ctx.zero()
    for d, comp in w.degree_components():
        if d == 0:
            return None
        f = f + comp.scale(Fraction(1) / d)
    return f


def _triple(F: VectorExpr):
    """Filtration position (n, i, j) of a vector, None when all constant."""
    top = None
    for fk in F:
        t = fk.diff_order()
        if t is not None and (top is None or t > top):
            top = t
    if top is None:
        return None
    n, i = top
    j = max(k for k, fk in enumerate(F) if not fk.partial(i, n).is_zero())
    return n, i, j


def _exactify_inductive(F: VectorExpr) -> Expression:
    ctx = F[0].ctx
    acc = ctx.zero()
    cur = list(F)
    prev = None
    while True:
        t = _triple(tuple(cur))
        if t is None:
            for k, fk in enumerate(cur):
                acc = acc + ctx.gen(k, 0) * ctx.coeff_expr(fk.constant_coefficient())
            return acc
        if prev is not None and t >= prev:
            raise NotClosed("potential reconstruction does not descend at %s" % (t,))
        prev = t
        n, i, j = t
        slice_ = cur[j].partial(i, n)
        if n % 2 == 0:
            if j > i:
                raise NotClosed("vector is not closed (filtration position)")
            m = n // 2
            piece = antiderivative(antiderivative(slice_, j, m), i, m)
            piece = piece.scale((-1) ** m)
        else:
            if j >= i:
                raise NotClosed("vector is not closed (filtration position)")
            m = (n + 1) // 2
            piece = antiderivative(antiderivative(slice_, i, m - 1), j, m)
            piece = piece.scale((-1) ** m)
        acc = acc + piece
        dd = variational_derivative(piece)
        cur = [fk - dk for fk, dk in zip(cur, dd)]


def exactify(F: VectorExpr) -> Expression:
    """A potential f with delta f / delta u = F, for closed F.

    Tries the grading shortcut first and falls back to the inductive
    double-antiderivative algorithm; the result always satisfies the
    equation exactly.
    """
    if vec_is_zero(F):
        return F[0].ctx.zero()
    report = is_closed(F)
    if not report.closed:
        raise NotClosed("defect operator: %s" % report.defect.render())
    f = _exactify_scaling(F)
    if f is not None and variational_derivative(f) == tuple(F):
        return f
    return _exactify_inductive(F)


@dataclass
class FunctionalComparison:
    equal: bool
    strict: Optional[bool] = None  # total-derivative membership certified
    antiderivative: Optional[Expression] = None


class LocalFunctional:
    """An expression regarded modulo total derivatives."""

    __slots__ = ("rep",)

    def __init__(self, rep: Expression):
        self.rep = rep

    @property
    def ctx(self) -> Context:
        return self.rep.ctx

    def compare(self, other: "LocalFunctional") -> FunctionalComparison:
        d = self.rep - other.rep
        if not vec_is_zero(variational_derivative(d)):
            return FunctionalComparison(False)
        if not d.constant_coefficient().is_zero():
            return FunctionalComparison(False)
        try:
            g, _ = integrate_total(d)
            return FunctionalComparison(True, True, g)
        except LogRequired:
            return FunctionalComparison(True, False, None)

    def is_zero(self) -> bool:
        return self.compare(LocalFunctional(self.ctx.zero())).equal

    def __eq__(self, other):
        if not isinstance(other, LocalFunctional):
            return NotImplemented
        return self.compare(other).equal

    __hash__ = None

    def __add__(self, other: "LocalFunctional") -> "LocalFunctional":
        return LocalFunctional(self.rep + other.rep)

    def __sub__(self, other: "LocalFunctional") -> "LocalFunctional":
        return LocalFunctional(self.rep - other.rep)

    def render(self) -> str:
        return "int(%s)" % self.rep.render()

    def __repr__(self):
        return self.render()


def functional_equal(a, b) -> bool:
    """Equality in V / dV: zero variational derivative and zero constant
    part of the difference."""
    if isinstance(a, Expression):
        a = LocalFunctional(a)
    if isinstance(b, Expression):
        b = LocalFunctional(b)
    return a.compare(b).equal
