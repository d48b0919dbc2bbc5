#!/usr/bin/env python
# -*- coding: utf-8 -*-
# filename: cli.py

import functools
import json
import logging

import click

from ham_bsde import __version__
from ham_bsde.client import Ham_client, RunConfig, describe_errors, get_run_conf
from ham_bsde.codec import mpf_to_str
from ham_bsde.diagnostics import argmin_c0, convergence_window
from ham_bsde.exceptions import BoundaryError, HamError, ResourceError
from ham_bsde.utils import format_sci
from ham_bsde.verify import run_checks

logger = logging.getLogger(__name__)

EXIT_FAILED = 1
EXIT_USAGE = 2
EXIT_RESOURCE = 3


def _exit_code(e):
    if isinstance(e, ResourceError):
        return EXIT_RESOURCE
    if isinstance(e, BoundaryError):
        return EXIT_FAILED
    return EXIT_USAGE


def handle_errors(fn):
    """Map library exceptions to exit codes."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except HamError as e:
            message = str(e)
            if not message.startswith("[-] Error"):
                message = "[-] Error: %s" % message
            click.echo(message, err=True)
            raise SystemExit(_exit_code(e))

    return wrapper


def run_options(fn):
    options = [
        click.option("--problem", help="bsde1d, bsde2d, bsde2w, fbsde, fbsde2nd or fbsdeNd"),
        click.option("--d", "d", type=int, help="dimension of fbsdeNd"),
        click.option("--c0", help="convergence-control parameter, e.g. -1 or -7/10"),
        click.option("--precision-bits", type=int, help="evaluation precision (default 256)"),
        click.option("--domain", help='norm domain, e.g. "x=-pi:pi,t=0:1" or "*=0:2"'),
        click.option("--quadrature", type=click.Choice(["symbolic", "gauss", "qmc"])),
        click.option("--nodes", type=int, help="Gauss-Legendre nodes per axis"),
        click.option("--samples", type=int, help="quasi-random sample count"),
        click.option("--seed", type=int, help="quasi-random seed"),
        click.option("--out", help="output directory (default runs)"),
        click.option("--format", "format_", help="csv, json or csv,json"),
        click.option("--term-cap", type=int, help="abort when a phi exceeds this many terms"),
        click.option("--config", "config_path", type=click.Path(), help="JSON or key = value run file"),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


def build_config(config_path=None, **flags):
    """File values first, then every flag that was given."""
    mapping = get_run_conf(config_path) if config_path else {}
    if "format_" in flags:
        flags["format"] = flags.pop("format_")
    for key, value in flags.items():
        # unset flags come through as None, an unset --residual as False
        if value is not None and value is not False:
            mapping[key] = value
    return RunConfig.from_mapping(mapping)


def _echo(name, value):
    click.echo("[+] %s : %s" % (name, value))


@click.group()
@click.version_option(__version__)
@click.option("--debug", is_flag=True, help="log at DEBUG level")
@click.pass_context
def main(ctx, debug):
    """Homotopy series solver for BSDEs and FBSDEs."""
    logging.basicConfig(
        level=logging.DEBUG if debug else logging.WARNING,
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )
    ctx.ensure_object(dict)
    ctx.obj["debug"] = debug


@main.command()
@run_options
@click.option("--order", type=int, help="series order M")
@click.pass_context
@handle_errors
def solve(ctx, config_path, **flags):
    """Run the recursion to one order and print the initial values."""
    config = build_config(config_path, **flags)
    client = Ham_client(config, debug=ctx.obj.get("debug"))
    ret = client.solve()
    _echo("problem", client.problem.name)
    _echo("order", config.order)
    _echo("c0", config.c0)
    for label, value in ret["Observables"].values:
        _echo(label, mpf_to_str(value, 64))
    for label, error in describe_errors(ret["Errors"]):
        _echo("%s error" % label, error)
    _echo("run dir", ret["Run dir"])


@main.command()
@run_options
@click.option("--orders", help="comma list of orders, e.g. 4,8,12")
@click.option("--residual", is_flag=True, help="add the operator residual column")
@click.pass_context
@handle_errors
def table(ctx, config_path, **flags):
    """Error table at several orders."""
    config = build_config(config_path, **flags)
    client = Ham_client(config, debug=ctx.obj.get("debug"))
    report = client.table()
    _echo("problem", report.problem_id)
    _echo("domain", report.norm)
    for row in report.rows:
        parts = ["E~=%s" % format_sci(row.exact_error)]
        if report.has_residual:
            parts.append("E=%s" % format_sci(row.residual))
        parts.extend("%s=%s" % (label, format_sci(v)) for label, v in row.observables)
        _echo("m=%d" % row.order, " ".join(parts))


@main.command()
@run_options
@click.option("--orders", help="comma list of orders, e.g. 5,10,15")
@click.option("--c0-grid", help='"lo:hi:step" or a comma list')
@click.option("--workers", type=int, help="worker processes for the c0 columns")
@click.pass_context
@handle_errors
def sweep(ctx, config_path, **flags):
    """Operator residual over orders x c0 grid."""
    config = build_config(config_path, **flags)
    client = Ham_client(config, debug=ctx.obj.get("debug"))
    result = client.sweep()
    _echo("problem", result.problem_id)
    _echo("cells", "%d x %d" % (len(result.orders), len(result.c0_grid)))
    for m in result.orders:
        if any(v is not None for v in result.row(m)):
            _echo("argmin c0 at m=%d" % m, argmin_c0(result, m))
    window = convergence_window(result)
    _echo("convergence window", ",".join(str(c) for c in window) or "empty")
    for m, c0, message in result.failed:
        click.echo("[-] Error: cell m=%d c0=%s failed: %s" % (m, c0, message), err=True)


@main.command()
@click.option("--only", multiple=True, help="run only this check (repeatable)")
@click.option("--fixtures", "fixtures_dir", type=click.Path(), help="directory of golden fixtures")
@click.option("--out", "out_path", type=click.Path(), help="write the JSON result here")
@handle_errors
def verify(only, fixtures_dir, out_path):
    """Golden fixtures plus structural checks; exit 1 on any failure."""
    results = run_checks(list(only) or None, fixtures_dir)
    text = json.dumps(results, indent=2)
    click.echo(text)
    if out_path:
        with open(out_path, "w") as f:
            f.write(text + "\n")
    failed = [name for name, r in results.items() if not r["passed"]]
    if failed:
        click.echo("[-] Error: failed checks: %s" % ", ".join(failed), err=True)
        raise SystemExit(EXIT_FAILED)


if __name__ == "__main__":
    main()
