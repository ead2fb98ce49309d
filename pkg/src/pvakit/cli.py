"""Command-line front end.

Session options (--vars/--params or --config) fix the ambient algebra;
subcommands expose the checkers, the variational calculus and the
hierarchy generators.  Exit status: 0 on success or a passing check, 1 on
a failing check or an unsolvable computation, 2 on usage or syntax errors.
"""

from __future__ import annotations

import json
import sys
from fractions import Fraction

import click

from .algebra import Context
from .brackets import (
    check_compatible,
    check_pva,
    check_symplectic,
    lambda_bracket,
)
from .errors import IndividualFailure, ParseError, PvakitError
from .hierarchies import NAMES, HierarchySpec, generate, golden_verify
from .lenard import lenard_extend, make_plan, verify_sequence
from .operators import MatrixDiffOp
from .parsing import parse_expression, parse_operator
from .varcalc import exactify, frechet, integrate_total, variational_derivative


def _session(vars_, params, config) -> Context:
    if config:
        with open(config) as fh:
            data = json.load(fh)
        vars_ = ",".join(data.get("variables", vars_.split(",")))
        params = ",".join(data.get("parameters", params.split(",") if params else []))
    names = tuple(s.strip() for s in vars_.split(",") if s.strip())
    plist = tuple(s.strip() for s in params.split(",") if s.strip()) if params else ()
    return Context(names, plist)


def _fail(message: str):
    click.echo("error: %s" % message, err=True)
    sys.exit(1)


def _parse(ctx: Context, text: str):
    try:
        return parse_expression(text, ctx)
    except ParseError as exc:
        raise click.UsageError(str(exc))


def _parse_op(ctx: Context, text: str) -> MatrixDiffOp:
    try:
        return parse_operator(text, ctx)
    except ParseError as exc:
        raise click.UsageError(str(exc))


def _emit_report(report, as_json: bool):
    if as_json:
        click.echo(report.json_text())
    elif report.passed:
        click.echo("pass")
    else:
        click.echo("fail")
        for f in report.failures:
            where = " at %s" % (f.triple,) if f.triple else ""
            click.echo("  %s%s: %s" % (f.kind, where, f.residual_text))
    sys.exit(0 if report.passed else 1)


@click.group()
@click.option("--vars", "vars_", default="u", help="comma-separated variable names")
@click.option("--params", default="", help="comma-separated parameter names")
@click.option("--config", default=None, type=click.Path(exists=True),
              help="JSON file with {variables, parameters}")
@click.pass_context
def main(com, vars_, params, config):
    """Exact calculus for Hamiltonian structures of evolution PDEs."""
    com.obj = _session(vars_, params, config)


@main.command()
@click.argument("expr")
@click.pass_obj
def vder(ctx, expr):
    """Variational derivative of EXPR, one component per line."""
    f = _parse(ctx, expr)
    for component in variational_derivative(f):
        click.echo(component.render())


@main.command()
@click.argument("expr")
@click.pass_obj
def integrate(ctx, expr):
    """Write EXPR as d(g) + const and print both."""
    f = _parse(ctx, expr)
    try:
        g, c = integrate_total(f)
    except PvakitError as exc:
        _fail(str(exc))
    click.echo(g.render())
    click.echo("const: %s" % c.render(ctx.params))


@main.command("exactify")
@click.argument("components", nargs=-1, required=True)
@click.pass_obj
def exactify_cmd(ctx, components):
    """Potential f with delta f/delta u = (COMPONENTS...)."""
    if len(components) != ctx.nvars:
        raise click.UsageError("expected %d components" % ctx.nvars)
    F = tuple(_parse(ctx, c) for c in components)
    try:
        click.echo(exactify(F).render())
    except PvakitError as exc:
        _fail(str(exc))


@main.command("frechet")
@click.argument("components", nargs=-1, required=True)
@click.option("--adjoint", is_flag=True, help="print the formal adjoint instead")
@click.pass_obj
def frechet_cmd(ctx, components, adjoint):
    """First-variation operator of the vector (COMPONENTS...)."""
    if len(components) != ctx.nvars:
        raise click.UsageError("expected %d components" % ctx.nvars)
    F = tuple(_parse(ctx, c) for c in components)
    click.echo(frechet(F, adjoint=adjoint).render())


@main.command()
@click.option("--op", "op_text", required=True, help="bracket operator")
@click.argument("f")
@click.argument("g")
@click.pass_obj
def bracket(ctx, op_text, f, g):
    """{f_lam g} for the bracket defined by --op."""
    H = _parse_op(ctx, op_text)
    click.echo(lambda_bracket(H, _parse(ctx, f), _parse(ctx, g)).render())


@main.command("check-pva")
@click.option("--op", "op_text", required=True)
@click.option("--json", "as_json", is_flag=True)
@click.pass_obj
def check_pva_cmd(ctx, op_text, as_json):
    """Skew-adjointness and Jacobi identity for --op."""
    _emit_report(check_pva(_parse_op(ctx, op_text)), as_json)


@main.command("check-compat")
@click.option("--op", "op_texts", required=True, multiple=True)
@click.option("--json", "as_json", is_flag=True)
@click.pass_obj
def check_compat_cmd(ctx, op_texts, as_json):
    """Compatibility of several Hamiltonian operators."""
    ops = [_parse_op(ctx, t) for t in op_texts]
    try:
        report = check_compatible(ops)
    except IndividualFailure as exc:
        _fail(str(exc))
    _emit_report(report, as_json)


@main.command("check-symplectic")
@click.option("--op", "op_text", required=True)
@click.option("--json", "as_json", is_flag=True)
@click.pass_obj
def check_symplectic_cmd(ctx, op_text, as_json):
    """Skew-adjointness and the two-form closedness condition for --op."""
    _emit_report(check_symplectic(_parse_op(ctx, op_text)), as_json)


@main.command("lenard")
@click.option("--op-h", "h_text", required=True, help="recursion operator H")
@click.option("--op-k", "k_text", required=True, help="solved operator K")
@click.option("--plan", "plan_kind", default="derivative",
              type=click.Choice(["derivative", "chain", "cnw_hd"]))
@click.option("--chain", "chain_text", default=None,
              help="';'-separated monomials for a chain plan")
@click.option("--seed", "seed_texts", required=True, multiple=True,
              help="seed vector, components separated by ','")
@click.option("--depth", default=3, show_default=True)
@click.option("--kind", default="hamiltonian",
              type=click.Choice(["hamiltonian", "symplectic"]))
@click.option("--json", "as_json", is_flag=True)
@click.pass_obj
def lenard_cmd(ctx, h_text, k_text, plan_kind, chain_text, seed_texts, depth,
               kind, as_json):
    """Extend seed vectors through K F^{n+1} = H F^n."""
    H = _parse_op(ctx, h_text)
    K = _parse_op(ctx, k_text)
    monomials = None
    if chain_text:
        monomials = [_parse(ctx, t) for t in chain_text.split(";")]
    seeds = []
    for text in seed_texts:
        parts = [p for p in text.split(",")]
        if len(parts) != ctx.nvars:
            raise click.UsageError("seed needs %d components" % ctx.nvars)
        seeds.append(tuple(_parse(ctx, p) for p in parts))
    try:
        plan = make_plan(K, plan_kind, monomials)
        rec = lenard_extend(H, K, plan, seeds, depth, name="lenard", kind=kind)
        verify_sequence(H, K, rec)
    except PvakitError as exc:
        _fail(str(exc))
    if as_json:
        click.echo(rec.json_text())
    else:
        for s in rec.steps:
            click.echo("F^%d = (%s)" % (s.n, ", ".join(x.render() for x in s.F)))
            if s.h is not None:
                click.echo("h_%d = %s" % (s.n, s.h.rep.render()))
    sys.exit(0 if rec.verification.passed() else 1)


def _parse_binding(text: str):
    if "=" not in text:
        return text, None
    name, _, value = text.partition("=")
    return name.strip(), Fraction(value.strip())


@main.command("hierarchy")
@click.argument("name", type=click.Choice(NAMES))
@click.option("--param", "param_texts", multiple=True,
              help="NAME for a symbolic parameter or NAME=VALUE to bind it")
@click.option("--depth", default=None, type=int)
@click.option("--verify", "do_verify", is_flag=True,
              help="also compare against the stored reference values")
@click.option("--json", "as_json", is_flag=True)
def hierarchy_cmd(name, param_texts, depth, do_verify, as_json):
    """Generate a shipped hierarchy (and optionally check its goldens)."""
    params = dict(_parse_binding(t) for t in param_texts)
    spec = HierarchySpec(name, params, depth)
    try:
        rec = generate(spec)
    except PvakitError as exc:
        _fail(str(exc))
    ok = rec.verification.passed()
    if as_json:
        click.echo(rec.json_text())
    else:
        for s in rec.steps:
            click.echo("F^%d = (%s)" % (s.n, ", ".join(x.render() for x in s.F)))
            click.echo(
                "h_%d = %s" % (s.n, s.h.rep.render() if s.h is not None else "-")
            )
            click.echo("flow_%d = (%s)" % (s.n, ", ".join(x.render() for x in s.flow)))
        click.echo("verification: %s" % ("pass" if ok else "fail"))
    if do_verify:
        report = golden_verify(spec)
        if not as_json:
            click.echo("golden: %s" % ("pass" if report.passed else "fail"))
        ok = ok and report.passed
    sys.exit(0 if ok else 1)


if __name__ == "__main__":
    main()
