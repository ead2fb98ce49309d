"""Matrix differential operators and polynomials in formal lambda/mu.

A MatrixDiffOp is a matrix whose entries are finite sums a_k d^k with
Expression coefficients, stored left-normalized (all derivatives to the
right of coefficients).  LambdaPoly and BiLambdaPoly carry bracket values:
polynomials in lambda (resp. lambda and mu) with Expression coefficients,
together with the shift substitutions lambda -> lambda + d needed by the
bracket calculus.
"""

from __future__ import annotations

from math import comb
from typing import Optional

from .algebra import Context, Expression, VectorExpr
from .fields import Fraction

Entry = tuple[tuple[int, Expression], ...]  # ((power, coeff), ...) sorted by power


def _entry_norm(ctx: Context, items) -> Entry:
    acc: dict[int, Expression] = {}
    for p, a in items:
        if a.is_zero():
            continue
        acc[p] = acc[p] + a if p in acc else a
    return tuple(sorted((p, a) for p, a in acc.items() if not a.is_zero()))


def _entry_apply(entry: Entry, f: Expression) -> Expression:
    out = f.ctx.zero()
    cache = f
    last = 0
    for p, a in entry:
        cache = cache.total_derivative(p - last)
        last = p
        out = out + a * cache
    return out


def _entry_adjoint(ctx: Context, entry: Entry) -> list[tuple[int, Expression]]:
    """Formal adjoint of a scalar entry: sum_k (-d)^k o a_k, expanded."""
    out: list[tuple[int, Expression]] = []
    for p, a in entry:
        sign = -1 if p % 2 else 1
        for k in range(p + 1):
            out.append((k, a.total_derivative(p - k).scale(sign * comb(p, k))))
    return out


def _entry_compose(ctx: Context, ea: Entry, eb: Entry) -> list[tuple[int, Expression]]:
    """(a d^p) o (b d^q) expanded by the Leibniz rule."""
    out: list[tuple[int, Expression]] = []
    for p, a in ea:
        for q, b in eb:
            for k in range(p + 1):
                out.append((k + q, a * b.total_derivative(p - k).scale(comb(p, k))))
    return out


class MatrixDiffOp:
    __slots__ = ("ctx", "entries")

    def __init__(self, ctx: Context, rows):
        self.ctx = ctx
        norm = []
        for row in rows:
            norm.append(tuple(self._coerce(e) for e in row))
        self.entries = tuple(norm)
        width = {len(r) for r in self.entries}
        if len(width) > 1:
            raise ValueError("ragged operator matrix")

    def _coerce(self, e) -> Entry:
        if isinstance(e, Expression):
            return _entry_norm(self.ctx, [(0, e)])
        if isinstance(e, dict):
            return _entry_norm(self.ctx, e.items())
        return _entry_norm(self.ctx, e)

    # -- constructors ----------------------------------------------------

    @staticmethod
    def single(ctx: Context, terms) -> "MatrixDiffOp":
        """1x1 operator from (power, coeff) pairs."""
        return MatrixDiffOp(ctx, [[terms]])

    @staticmethod
    def derivative(ctx: Context, power: int = 1, size: int = 1) -> "MatrixDiffOp":
        one = ctx.one()
        rows = [
            [[(power, one)] if i == j else [] for j in range(size)]
            for i in range(size)
        ]
        return MatrixDiffOp(ctx, rows)

    @staticmethod
    def identity(ctx: Context, size: Optional[int] = None) -> "MatrixDiffOp":
        size = ctx.nvars if size is None else size
        return MatrixDiffOp.derivative(ctx, 0, size)

    @staticmethod
    def zero(ctx: Context, size: Optional[int] = None) -> "MatrixDiffOp":
        size = ctx.nvars if size is None else size
        return MatrixDiffOp(ctx, [[[] for _ in range(size)] for _ in range(size)])

    @staticmethod
    def mult(ctx: Context, f: Expression) -> "MatrixDiffOp":
        return MatrixDiffOp(ctx, [[f]])

    # -- shape -----------------------------------------------------------

    @property
    def nrows(self) -> int:
        return len(self.entries)

    @property
    def ncols(self) -> int:
        return len(self.entries[0]) if self.entries else 0

    def entry(self, i: int, j: int) -> Entry:
        return self.entries[i][j]

    def max_order(self) -> int:
        return max(
            (p for row in self.entries for e in row for p, _ in e), default=0
        )

    def is_zero(self) -> bool:
        return all(not e for row in self.entries for e in row)

    def __eq__(self, other):
        return (
            isinstance(other, MatrixDiffOp)
            and self.ctx == other.ctx
            and self.entries == other.entries
        )

    __hash__ = None

    # -- algebra -----------------------------------------------------------

    def apply(self, vec: VectorExpr) -> VectorExpr:
        if len(vec) != self.ncols:
            raise ValueError("operator/vector size mismatch")
        out = []
        for row in self.entries:
            s = self.ctx.zero()
            for e, f in zip(row, vec):
                s = s + _entry_apply(e, f)
            out.append(s)
        return tuple(out)

    def __add__(self, other: "MatrixDiffOp") -> "MatrixDiffOp":
        if (self.nrows, self.ncols) != (other.nrows, other.ncols):
            raise ValueError("operator size mismatch")
        rows = []
        for ra, rb in zip(self.entries, other.entries):
            rows.append([list(ea) + list(eb) for ea, eb in zip(ra, rb)])
        return MatrixDiffOp(self.ctx, rows)

    def __neg__(self) -> "MatrixDiffOp":
        return self.scale(-1)

    def __sub__(self, other: "MatrixDiffOp") -> "MatrixDiffOp":
        return self + (-other)

    def scale(self, q) -> "MatrixDiffOp":
        rows = [
            [[(p, a.scale(Fraction(q))) for p, a in e] for e in row]
            for row in self.entries
        ]
        return MatrixDiffOp(self.ctx, rows)

    def scale_expr(self, f: Expression) -> "MatrixDiffOp":
        rows = [[[(p, f * a) for p, a in e] for e in row] for row in self.entries]
        return MatrixDiffOp(self.ctx, rows)

    def adjoint(self) -> "MatrixDiffOp":
        n, m = self.nrows, self.ncols
        rows = [
            [_entry_adjoint(self.ctx, self.entries[j][i]) for j in range(n)]
            for i in range(m)
        ]
        return MatrixDiffOp(self.ctx, rows)

    def compose(self, other: "MatrixDiffOp") -> "MatrixDiffOp":
        if self.ncols != other.nrows:
            raise ValueError("operator size mismatch in composition")
        rows = []
        for i in range(self.nrows):
            row = []
            for j in range(other.ncols):
                items: list[tuple[int, Expression]] = []
                for k in range(self.ncols):
                    items.extend(
                        _entry_compose(self.ctx, self.entries[i][k], other.entries[k][j])
                    )
                row.append(items)
            rows.append(row)
        return MatrixDiffOp(self.ctx, rows)

    def is_skew_adjoint(self) -> bool:
        return (self.adjoint() + self).is_zero()

    def is_self_adjoint(self) -> bool:
        return (self.adjoint() - self).is_zero()

    # -- symbols ---------------------------------------------------------

    def symbol(self, i: int, j: int) -> "LambdaPoly":
        """The entry (i, j) with d^k replaced by lambda^k."""
        return LambdaPoly(self.ctx, {p: a for p, a in self.entries[i][j]})

    def symbol_matrix(self) -> list[list["LambdaPoly"]]:
        return [
            [self.symbol(i, j) for j in range(self.ncols)] for i in range(self.nrows)
        ]

    # -- grading -----------------------------------------------------------

    def homogeneous_degree(self) -> Optional[Fraction]:
        """Common exponent-sum degree of all coefficients, or None."""
        deg: Optional[Fraction] = None
        for row in self.entries:
            for e in row:
                for _, a in e:
                    d = a.degree_if_homogeneous()
                    if d is None:
                        return None
                    if deg is None:
                        deg = d
                    elif deg != d:
                        return None
        return Fraction(0) if deg is None else deg

    # -- context / rendering -------------------------------------------------

    def with_context(self, ctx: Context) -> "MatrixDiffOp":
        rows = [
            [[(p, a.with_context(ctx)) for p, a in e] for e in row]
            for row in self.entries
        ]
        return MatrixDiffOp(ctx, rows)

    def render_entry(self, i: int, j: int) -> str:
        e = self.entries[i][j]
        if not e:
            return "0"
        parts = []
        for p, a in e:
            if p == 0:
                parts.append(a.render())
                continue
            d = "d" if p == 1 else "d^%d" % p
            if a == self.ctx.one():
                parts.append(d)
            elif a.is_monomial():
                parts.append("%s*%s" % (a.render(), d))
            else:
                parts.append("(%s)*%s" % (a.render(), d))
        return " + ".join(parts)

    def render(self) -> str:
        if self.nrows == 1 and self.ncols == 1:
            return self.render_entry(0, 0)
        rows = [
            ", ".join(self.render_entry(i, j) for j in range(self.ncols))
            for i in range(self.nrows)
        ]
        return "[" + "; ".join(rows) + "]"

    def __repr__(self):
        return self.render()


class LambdaPoly:
    """Polynomial in lambda with Expression coefficients."""

    __slots__ = ("ctx", "coeffs")

    def __init__(self, ctx: Context, coeffs: dict):
        self.ctx = ctx
        self.coeffs = {k: v for k, v in coeffs.items() if not v.is_zero()}

    @staticmethod
    def of(expr: Expression, degree: int = 0) -> "LambdaPoly":
        return LambdaPoly(expr.ctx, {degree: expr})

    def coefficient(self, k: int) -> Expression:
        return self.coeffs.get(k, self.ctx.zero())

    def degree(self) -> int:
        return max(self.coeffs, default=0)

    def is_zero(self) -> bool:
        return not self.coeffs

    def __add__(self, other: "LambdaPoly") -> "LambdaPoly":
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out[k] + v if k in out else v
        return LambdaPoly(self.ctx, out)

    def __neg__(self) -> "LambdaPoly":
        return LambdaPoly(self.ctx, {k: -v for k, v in self.coeffs.items()})

    def __sub__(self, other: "LambdaPoly") -> "LambdaPoly":
        return self + (-other)

    def mul_expr(self, f: Expression) -> "LambdaPoly":
        return LambdaPoly(self.ctx, {k: f * v for k, v in self.coeffs.items()})

    def shift_apply(self, times: int = 1) -> "LambdaPoly":
        """Apply (lambda + d)^times, with d acting on coefficients;
        expanded binomially so each coefficient is differentiated along a
        single chain."""
        if times == 0:
            return self
        out: dict[int, Expression] = {}
        for k, v in self.coeffs.items():
            dv = v
            for j in range(times, -1, -1):
                # contributes C(times, j) lam^j d^(times-j) v
                key = k + j
                term = dv.scale(comb(times, j)) if 0 < j < times else dv
                out[key] = out[key] + term if key in out else term
                if j:
                    dv = dv.total_derivative()
        return LambdaPoly(self.ctx, out)

    def subst_neg_shift(self) -> "LambdaPoly":
        """Substitute lambda -> -lambda - d, the derivative acting on the
        coefficient it lands on."""
        out: dict[int, Expression] = {}
        for k, v in self.coeffs.items():
            sign = -1 if k % 2 else 1
            dv = v
            for j in range(k, -1, -1):
                term = dv.scale(sign * comb(k, j))
                out[j] = out[j] + term if j in out else term
                if j:
                    dv = dv.total_derivative()
        return LambdaPoly(self.ctx, out)

    def op_apply(self, entry: Entry) -> "LambdaPoly":
        """Apply an operator entry with d replaced by (lambda + d), acting
        to the right on this polynomial."""
        out = LambdaPoly(self.ctx, {})
        shifted = self
        last = 0
        for p, a in entry:
            shifted = shifted.shift_apply(p - last)
            last = p
            out = out + shifted.mul_expr(a)
        return out

    def at_zero(self) -> Expression:
        return self.coefficient(0)

    def __eq__(self, other):
        return (
            isinstance(other, LambdaPoly)
            and self.ctx == other.ctx
            and self.coeffs == other.coeffs
        )

    __hash__ = None

    def render(self, var: str = "lam") -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for k in sorted(self.coeffs, reverse=True):
            v = self.coeffs[k]
            if k == 0:
                parts.append(v.render())
                continue
            power = var if k == 1 else "%s^%d" % (var, k)
            parts.append(_attach_power(self.ctx, v, power))
        return " + ".join(parts)

    def __repr__(self):
        return self.render()


def _attach_power(ctx: Context, v: Expression, power: str) -> str:
    if v == ctx.one():
        return power
    if v == ctx.num(-1):
        return "-" + power
    if v.is_monomial():
        return "%s*%s" % (v.render(), power)
    return "(%s)*%s" % (v.render(), power)


class BiLambdaPoly:
    """Polynomial in commuting formal lambda and mu over Expressions."""

    __slots__ = ("ctx", "coeffs")

    def __init__(self, ctx: Context, coeffs: dict):
        self.ctx = ctx
        self.coeffs = {k: v for k, v in coeffs.items() if not v.is_zero()}

    @staticmethod
    def from_lambda(lp: LambdaPoly) -> "BiLambdaPoly":
        return BiLambdaPoly(lp.ctx, {(k, 0): v for k, v in lp.coeffs.items()})

    @staticmethod
    def from_mu(lp: LambdaPoly) -> "BiLambdaPoly":
        return BiLambdaPoly(lp.ctx, {(0, k): v for k, v in lp.coeffs.items()})

    def is_zero(self) -> bool:
        return not self.coeffs

    def __add__(self, other: "BiLambdaPoly") -> "BiLambdaPoly":
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out[k] + v if k in out else v
        return BiLambdaPoly(self.ctx, out)

    def __neg__(self) -> "BiLambdaPoly":
        return BiLambdaPoly(self.ctx, {k: -v for k, v in self.coeffs.items()})

    def __sub__(self, other: "BiLambdaPoly") -> "BiLambdaPoly":
        return self + (-other)

    def mul(self, other: "BiLambdaPoly") -> "BiLambdaPoly":
        out: dict = {}
        for (a, b), v in self.coeffs.items():
            for (c, d), w in other.coeffs.items():
                k = (a + c, b + d)
                prod = v * w
                out[k] = out[k] + prod if k in out else prod
        return BiLambdaPoly(self.ctx, out)

    def mul_expr(self, f: Expression) -> "BiLambdaPoly":
        return BiLambdaPoly(self.ctx, {k: f * v for k, v in self.coeffs.items()})

    def _shift(self, dl: int, dm: int, sign: int, times: int) -> "BiLambdaPoly":
        cur = self
        for _ in range(times):
            out: dict = {}

            def put(key, val):
                out[key] = out[key] + val if key in out else val

            for (a, b), v in cur.coeffs.items():
                if dl:
                    put((a + 1, b), v.scale(sign))
                if dm:
                    put((a, b + 1), v.scale(sign))
                dv = v.total_derivative().scale(sign)
                if not dv.is_zero():
                    put((a, b), dv)
            cur = BiLambdaPoly(self.ctx, out)
        return cur

    def shift_lambda(self, times: int = 1) -> "BiLambdaPoly":
        """(lambda + d)^times, d acting on coefficients."""
        return self._shift(1, 0, 1, times)

    def shift_mu(self, times: int = 1) -> "BiLambdaPoly":
        return self._shift(0, 1, 1, times)

    def shift_both_neg(self, times: int = 1) -> "BiLambdaPoly":
        """(-lambda - mu - d)^times."""
        return self._shift(1, 1, -1, times)

    def op_apply_both(self, entry: Entry) -> "BiLambdaPoly":
        """Apply an operator entry with d replaced by (lambda + mu + d)."""
        out = BiLambdaPoly(self.ctx, {})
        shifted = self
        last = 0
        for p, a in entry:
            shifted = shifted._shift(1, 1, 1, p - last)
            last = p
            out = out + shifted.mul_expr(a)
        return out

    def __eq__(self, other):
        return (
            isinstance(other, BiLambdaPoly)
            and self.ctx == other.ctx
            and self.coeffs == other.coeffs
        )

    __hash__ = None

    def render(self) -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for a, b in sorted(self.coeffs, reverse=True):
            v = self.coeffs[(a, b)]
            factors = []
            if a:
                factors.append("lam" if a == 1 else "lam^%d" % a)
            if b:
                factors.append("mu" if b == 1 else "mu^%d" % b)
            if not factors:
                parts.append(v.render())
                continue
            parts.append(_attach_power(self.ctx, v, "*".join(factors)))
        return " + ".join(parts)

    def __repr__(self):
        return self.render()
