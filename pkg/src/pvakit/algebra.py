"""Differential algebra on jet variables u_i^(n) with rational exponents.

An Expression is a finite sum of monomials in the generators u_i^(n)
(i < ell a variable index, n >= 0 a derivative order) with exponents in QQ
and coefficients in QQ(parameters).  Generators are keyed by the pair
(n, i) so that tuple comparison matches the order-then-index filtration.
All values are immutable after construction.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Optional, Union

from .errors import NonMonomialDivisor, NonRationalExponent
from .fields import Coefficient
from . import fields

Gen = tuple[int, int]  # (derivative order n, variable index i), both >= 0
Monomial = tuple[tuple[Gen, Union[int, Fraction]], ...]  # sorted by Gen, descending

ONE_MONO: Monomial = ()


def _exp(x) -> Union[int, Fraction]:
    if isinstance(x, int):
        return x
    if isinstance(x, Fraction):
        return int(x) if x.denominator == 1 else x
    raise NonRationalExponent("exponent %r is not a rational number" % (x,))


def _exp_arg(x) -> Fraction:
    """Coerce a user-supplied exponent, rejecting floats outright."""
    if isinstance(x, float):
        raise NonRationalExponent("float exponent %r; use Fraction" % (x,))
    return Fraction(x)


def mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    out = []
    ia = ib = 0
    while ia < len(a) and ib < len(b):
        ga, ea = a[ia]
        gb, eb = b[ib]
        if ga > gb:
            out.append(a[ia])
            ia += 1
        elif gb > ga:
            out.append(b[ib])
            ib += 1
        else:
            e = ea + eb
            if e:
                out.append((ga, _exp(e)))
            ia += 1
            ib += 1
    out.extend(a[ia:])
    out.extend(b[ib:])
    return tuple(out)


def mono_pow(a: Monomial, k) -> Monomial:
    k = _exp(_exp_arg(k))
    if k == 0:
        return ONE_MONO
    return tuple((g, _exp(e * k)) for g, e in a)


def mono_degree(a: Monomial):
    """Total exponent sum (the eigenvalue of the exponent-sum grading)."""
    d = Fraction(0)
    for _, e in a:
        d += e
    return _exp(d)


def mono_set_exp(a: Monomial, g: Gen, e) -> Monomial:
    """Return a with the exponent of g replaced by e (e may be 0)."""
    e = _exp(e)
    out = [(h, x) for h, x in a if h != g]
    if e:
        out.append((g, e))
        out.sort(reverse=True)
    return tuple(out)


def mono_bump(a: Monomial, idx: int) -> Monomial:
    """One product-rule step of the total derivative at position idx:
    lower that generator's exponent by one and multiply by its derivative
    generator (order + 1, same variable)."""
    g, e = a[idx]
    up: Gen = (g[0] + 1, g[1])
    out = []
    placed = False
    for t in range(len(a)):
        h, x = a[t]
        if not placed:
            if h == up:
                placed = True
                merged = x + 1
                if merged:
                    out.append((up, _exp(merged)))
                continue
            if h < up:
                out.append((up, 1))
                placed = True
        if t == idx:
            if e != 1:
                out.append((g, _exp(e - 1)))
        else:
            out.append((h, x))
    if not placed:
        out.append((up, 1))
    return tuple(out)


class Context:
    """Ambient algebra: variable names and coefficient parameters."""

    __slots__ = ("var_names", "params", "_one_coeff", "_zero")

    def __init__(self, var_names=("u",), params=()):
        var_names = tuple(var_names)
        params = tuple(params)
        if len(set(var_names) | set(params)) != len(var_names) + len(params):
            raise ValueError("variable and parameter names must be distinct")
        self.var_names = var_names
        self.params = params
        self._one_coeff = Coefficient.from_fraction(1, len(params))
        self._zero = None

    @property
    def nvars(self) -> int:
        return len(self.var_names)

    def __eq__(self, other):
        return (
            isinstance(other, Context)
            and self.var_names == other.var_names
            and self.params == other.params
        )

    def __hash__(self):
        return hash((self.var_names, self.params))

    def __repr__(self):
        return "Context(vars=%s, params=%s)" % (self.var_names, self.params)

    # -- element constructors -------------------------------------------

    def zero(self) -> "Expression":
        if self._zero is None:
            self._zero = Expression(self, {})
        return self._zero

    def one(self) -> "Expression":
        return self.num(1)

    def num(self, p, q=1) -> "Expression":
        value = Fraction(p, q) if q != 1 else Fraction(p)
        if not value:
            return self.zero()
        return Expression(
            self, {ONE_MONO: Coefficient.from_fraction(value, len(self.params))}
        )

    def coeff_expr(self, c: Coefficient) -> "Expression":
        if c.is_zero():
            return self.zero()
        return Expression(self, {ONE_MONO: c})

    def gen(self, var, order=0) -> "Expression":
        """The generator u_i^{(order)}; var is a name or a 0-based index."""
        i = var if isinstance(var, int) else self.var_names.index(var)
        if not 0 <= i < self.nvars:
            raise ValueError("variable index out of range")
        mono: Monomial = (((order, i), 1),)
        return Expression(self, {mono: self._one_coeff})

    def param(self, name) -> "Expression":
        j = name if isinstance(name, int) else self.params.index(name)
        return Expression(
            self, {ONE_MONO: Coefficient.parameter(j, len(self.params))}
        )

    def vector(self, *components) -> tuple["Expression", ...]:
        if len(components) != self.nvars:
            raise ValueError("vector length must match the variable count")
        return tuple(components)

    def zero_vector(self) -> tuple["Expression", ...]:
        return tuple(self.zero() for _ in range(self.nvars))

    def expression(self, raw_terms) -> "Expression":
        """Normalize a raw term list into an Expression.

        Each term is (coefficient, factors) with factors an iterable of
        (var, order, exponent); repeated generators, zero exponents and
        cancelling terms are all merged away.
        """
        total = self.zero()
        for coeff, factors in raw_terms:
            term = self.num(coeff) if not isinstance(coeff, Expression) else coeff
            for var, order, exponent in factors:
                term = term * self.gen(var, order) ** Fraction(exponent)
            total = total + term
        return total

    def parse(self, text: str) -> "Expression":
        from .parsing import parse_expression

        return parse_expression(text, self)

    def parse_vector(self, *texts: str) -> tuple["Expression", ...]:
        return self.vector(*(self.parse(t) for t in texts))

    # -- parameter extension ---------------------------------------------

    def extend_params(self, extra: Iterable[str]) -> "Context":
        return Context(self.var_names, self.params + tuple(extra))

    # -- rendering --------------------------------------------------------

    def gen_name(self, g: Gen) -> str:
        n, i = g
        base = self.var_names[i]
        if n == 0:
            return base
        if n <= 3:
            return base + "'" * n
        return "%s^(%d)" % (base, n)


class Expression:
    """Element of the algebra of differential functions over a Context."""

    __slots__ = ("ctx", "terms")

    def __init__(self, ctx: Context, terms: dict):
        self.ctx = ctx
        self.terms = terms

    # -- inspection -------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(m == ONE_MONO for m in self.terms)

    def constant_coefficient(self) -> Coefficient:
        c = self.terms.get(ONE_MONO)
        return c if c is not None else Coefficient.from_fraction(0, len(self.ctx.params))

    def is_monomial(self) -> bool:
        return len(self.terms) == 1

    def generators(self) -> set[Gen]:
        out: set[Gen] = set()
        for m in self.terms:
            for g, _ in m:
                out.add(g)
        return out

    def diff_order(self) -> Optional[Gen]:
        """Largest (n, i) on which the expression depends, None for constants."""
        top: Optional[Gen] = None
        for m in self.terms:
            if m and (top is None or m[0][0] > top):
                top = m[0][0]
        return top

    def max_order(self) -> int:
        g = self.diff_order()
        return g[0] if g else 0

    def in_filtration(self, n: int, i: int) -> bool:
        """True if the expression lies in V_{n,i}: no dependence on any
        u_j^{(m)} with (m, j) > (n, i)."""
        bound = (n, i)
        return all((not m) or m[0][0] <= bound for m in self.terms)

    def degree_components(self) -> list[tuple[Fraction, "Expression"]]:
        """Split into eigencomponents of the exponent-sum grading."""
        buckets: dict = {}
        for m, c in self.terms.items():
            buckets.setdefault(mono_degree(m), {})[m] = c
        return [
            (Fraction(d), Expression(self.ctx, t)) for d, t in sorted(buckets.items())
        ]

    def degree_if_homogeneous(self) -> Optional[Fraction]:
        comps = self.degree_components()
        if len(comps) != 1:
            return None if comps else Fraction(0)
        return comps[0][0]

    def project_degree(self, d) -> "Expression":
        d = Fraction(d)
        kept = {m: c for m, c in self.terms.items() if mono_degree(m) == d}
        return Expression(self.ctx, kept)

    def is_polynomial(self) -> bool:
        return all(
            isinstance(e, int) and e > 0 for m in self.terms for _, e in m
        )

    # -- arithmetic ---------------------------------------------------------

    def _check_ctx(self, other: "Expression"):
        if self.ctx != other.ctx:
            raise ValueError("expressions live in different contexts")

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.ctx.num(other)
        self._check_ctx(other)
        if not self.terms:
            return other
        if not other.terms:
            return self
        out = dict(self.terms)
        for m, c in other.terms.items():
            s = out.get(m)
            if s is None:
                out[m] = c
            else:
                s = s + c
                if s.is_zero():
                    del out[m]
                else:
                    out[m] = s
        return Expression(self.ctx, out)

    __radd__ = __add__

    def __neg__(self):
        return Expression(self.ctx, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.ctx.num(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if isinstance(other, Coefficient):
            return self.scale_coeff(other)
        self._check_ctx(other)
        if not self.terms or not other.terms:
            return self.ctx.zero()
        out: dict = {}
        for ma, ca in self.terms.items():
            for mb, cb in other.terms.items():
                m = mono_mul(ma, mb)
                c = ca * cb
                s = out.get(m)
                s = c if s is None else s + c
                if s.is_zero():
                    if m in out:
                        del out[m]
                else:
                    out[m] = s
        return Expression(self.ctx, out)

    __rmul__ = __mul__

    def scale(self, q) -> "Expression":
        if not isinstance(q, (int, Fraction)):
            q = Fraction(q)
        if not q:
            return self.ctx.zero()
        return Expression(self.ctx, {m: c.scale(q) for m, c in self.terms.items()})

    def scale_coeff(self, c: Coefficient) -> "Expression":
        if c.is_zero():
            return self.ctx.zero()
        return Expression(self.ctx, {m: cc * c for m, cc in self.terms.items()})

    def __pow__(self, k):
        k = _exp_arg(k)
        if k.denominator == 1 and k >= 0:
            out = self.ctx.one()
            base = self
            n = int(k)
            while n:
                if n & 1:
                    out = out * base
                base = base * base
                n >>= 1
            return out
        if not self.is_monomial():
            raise NonMonomialDivisor(
                "fractional or negative powers need a single-term base"
            )
        (m, c), = self.terms.items()
        if not c.is_one():
            if k.denominator != 1:
                raise NonMonomialDivisor(
                    "fractional powers need a unit monomial base"
                )
            c = c ** int(k)
        else:
            c = Coefficient.from_fraction(1, len(self.ctx.params))
        return Expression(self.ctx, {mono_pow(m, k): c})

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(Fraction(1) / Fraction(other))
        self._check_ctx(other)
        if not other.is_monomial():
            raise NonMonomialDivisor("division is only defined by monomials")
        (m, c), = other.terms.items()
        inv = Expression(
            self.ctx,
            {mono_pow(m, -1): Coefficient.from_fraction(1, len(self.ctx.params)) / c},
        )
        return self * inv

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.ctx.num(other)
        if not isinstance(other, Expression):
            return NotImplemented
        return self.ctx == other.ctx and self.terms == other.terms

    __hash__ = None

    # -- derivations ----------------------------------------------------------

    def partial(self, i: int, n: int) -> "Expression":
        """Partial derivative with respect to u_i^{(n)}."""
        g = (n, i)
        out: dict = {}
        for m, c in self.terms.items():
            for h, e in m:
                if h == g:
                    nm = mono_set_exp(m, g, e - 1)
                    nc = c.scale(e)
                    s = out.get(nm)
                    s = nc if s is None else s + nc
                    if s.is_zero():
                        if nm in out:
                            del out[nm]
                    else:
                        out[nm] = s
                    break
                if h < g:
                    break
        return Expression(self.ctx, out)

    def total_derivative(self, times: int = 1) -> "Expression":
        """Apply the derivation sum_{i,n} u_i^{(n+1)} d/du_i^{(n)}."""
        cur = self
        for _ in range(times):
            out: dict = {}
            for m, c in cur.terms.items():
                for idx in range(len(m)):
                    nm = mono_bump(m, idx)
                    nc = c.scale(m[idx][1])
                    s = out.get(nm)
                    s = nc if s is None else s + nc
                    if s.is_zero():
                        if nm in out:
                            del out[nm]
                    else:
                        out[nm] = s
            cur = Expression(cur.ctx, out)
        return cur

    # -- context embedding ------------------------------------------------------

    def with_context(self, ctx: Context) -> "Expression":
        """Re-embed into a context with the same variables and a parameter
        superset."""
        if ctx == self.ctx:
            return self
        if ctx.var_names != self.ctx.var_names:
            raise ValueError("target context has different variables")
        positions = [ctx.params.index(p) for p in self.ctx.params]
        n = len(ctx.params)
        return Expression(
            ctx, {m: c.pad(n, positions) for m, c in self.terms.items()}
        )

    # -- rendering ----------------------------------------------------------------

    def render(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for m in sorted(self.terms, reverse=True):
            c = self.terms[m]
            body, negative = _render_term(self.ctx, m, c)
            if not parts:
                parts.append("-" + body if negative else body)
            else:
                parts.append((" - " if negative else " + ") + body)
        return "".join(parts)

    def __repr__(self):
        return self.render()


def _render_exponent(e) -> str:
    if isinstance(e, int) and e >= 0:
        return "^%d" % e
    return "^(%s)" % e


def _render_term(ctx: Context, m: Monomial, c: Coefficient) -> tuple[str, bool]:
    """Render one term; returns (text without sign, sign-is-negative)."""
    factors = []
    for g, e in m:
        name = ctx.gen_name(g)
        factors.append(name if e == 1 else name + _render_exponent(e))
    negative = False
    coeff = c
    if len(coeff.num) == 1 and fields._pis_const(coeff.den):
        (exps, q), = coeff.num.items()
        if q < 0:
            negative = True
            coeff = -coeff
    ctext = coeff.render(ctx.params)
    if ctext == "1" and factors:
        return "*".join(factors), negative
    if len(coeff.num) > 1:
        ctext = "(%s)" % ctext if "/" not in ctext else ctext
    return "*".join([ctext] + factors), negative


VectorExpr = tuple[Expression, ...]


def vec_add(a: VectorExpr, b: VectorExpr) -> VectorExpr:
    return tuple(x + y for x, y in zip(a, b))

def vec_sub(a: VectorExpr, b: VectorExpr) -> VectorExpr:
    return tuple(x - y for x, y in zip(a, b))

def vec_neg(a: VectorExpr) -> VectorExpr:
    return tuple(-x for x in a)

def vec_is_zero(a: VectorExpr) -> bool:
    return all(x.is_zero() for x in a)

def vec_dot(a, b) -> Expression:
    out = a[0].ctx.zero()
    for x, y in zip(a, b):
        out = out + x * y
    return out

def vec_render(a: VectorExpr) -> str:
    return "(" + ", ".join(x.render() for x in a) + ")"
