from fractions import Fraction

import pytest

from pvakit import Context, MatrixDiffOp


def rand_expr(rng, ctx, nterms=2, nfactors=3, max_order=4, fancy_exps=False):
    """Small random expression; fancy_exps allows negative and half-integer
    exponents."""
    total = ctx.zero()
    for _ in range(rng.randint(1, nterms)):
        t = ctx.num(Fraction(rng.randint(-4, 4) or 1, rng.randint(1, 3)))
        for _ in range(rng.randint(0, nfactors)):
            i = rng.randrange(ctx.nvars)
            n = rng.randint(0, max_order)
            e = rng.randint(1, 2)
            if fancy_exps:
                r = rng.random()
                if r < 0.15:
                    e = -rng.randint(1, 2)
                elif r < 0.3:
                    e = Fraction(rng.choice([1, -1, 3]), 2)
            t = t * ctx.gen(i, n) ** e
        total = total + t
    return total


def rand_vector(rng, ctx, **kw):
    return tuple(rand_expr(rng, ctx, **kw) for _ in range(ctx.nvars))


def rand_operator(rng, ctx, max_power=3, nterms=2):
    rows = []
    for _ in range(ctx.nvars):
        row = []
        for _ in range(ctx.nvars):
            entry = []
            for _ in range(rng.randint(0, nterms)):
                entry.append(
                    (rng.randint(0, max_power), rand_expr(rng, ctx, nterms=1, nfactors=2, max_order=2))
                )
            row.append(entry)
        rows.append(row)
    return MatrixDiffOp(ctx, rows)


@pytest.fixture
def ctx1():
    return Context(("u",))


@pytest.fixture
def ctx1c():
    return Context(("u",), ("c",))


@pytest.fixture
def ctx2():
    return Context(("u", "v"))


@pytest.fixture
def ctx3():
    return Context(("u", "v", "w"))


def kdv_pair(ctx):
    """The third-order operator u' + 2u d + c d^3 together with d."""
    u = ctx.gen(0)
    c = ctx.param("c")
    H = MatrixDiffOp.single(ctx, [(0, u.total_derivative()), (1, u.scale(2)), (3, c)])
    K = MatrixDiffOp.derivative(ctx)
    return H, K
