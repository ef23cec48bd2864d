"""
app.py - Command line entry point for the module loci toolkit.

Reports go to standard output, messages to standard error. Exit codes: 0 all pass,
1 any fail, 2 any inconclusive, 3 usage or fixture error.
"""

import functools
import sys

import click

from config import APP_VERSION
from models import json_utils
from models.fixtures import FixtureParseError, FixtureValidationError, load_fixture
from models.groebner import NotMonomialAndNotDeclaredError, ResourceLimitError
from models.invariants import DecompositionUnavailableError, NotMaximalError, local_profile
from models.loci import INCONCLUSIVE, NotCertifiedGorensteinError
from models.logger import setup_logger
from models.modres import free_resolution, verify_exactness
from models.qpoly import PolynomialError
from models.render import render_locus, render_profile, render_resolution, render_verify
from models.schemas import VerifyReport
from models.verify import run_checks

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_INCONCLUSIVE = 2
EXIT_USAGE = 3

USAGE_ERRORS = (
    FixtureParseError,
    FixtureValidationError,
    PolynomialError,
    NotCertifiedGorensteinError,
    NotMonomialAndNotDeclaredError,
    DecompositionUnavailableError,
    NotMaximalError,
    KeyError,
    ValueError,
)

logger = setup_logger()


class LociGroup(click.Group):
    """click group whose usage errors exit with 3, keeping 2 for inconclusive."""

    def main(self, *args, standalone_mode=True, **kwargs):
        try:
            rv = super().main(*args, standalone_mode=False, **kwargs)
        except click.ClickException as e:
            e.show()
            rv = EXIT_USAGE
        except click.exceptions.Abort:
            click.echo("Aborted!", err=True)
            rv = EXIT_USAGE
        code = rv if isinstance(rv, int) else EXIT_PASS
        if standalone_mode:
            sys.exit(code)
        return code


def handle_errors(fn):
    """Domain errors become a message on stderr and an exit code."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ResourceLimitError as e:
            click.echo(f"inconclusive: {e} (budget {e.budget})", err=True)
            return EXIT_INCONCLUSIVE
        except USAGE_ERRORS as e:
            logger.info("Usage error: %s", e)
            click.echo(f"error: {e}", err=True)
            return EXIT_USAGE

    return wrapper


fixture_option = click.option(
    "--fixture",
    "fixture_path",
    required=True,
    type=click.Path(exists=True, dir_okay=False),
    help="Fixture file (TOML).",
)
module_option = click.option("--module", "module_name", default="R", show_default=True)


def _fast_path(value: str):
    return {"auto": None, "on": True, "off": False}[value]


@click.group(cls=LociGroup)
@click.version_option(APP_VERSION)
def cli():
    """Loci of modules over Q[x]/J, and a harness checking statements about them."""


@cli.command()
@fixture_option
@module_option
@click.option("--locus", required=True, help="supp, free, cm, mcm, sn:N, tn:N, fid or gor")
@click.option("--json", "as_json", is_flag=True, help="Print the JSON report.")
@click.option("--pointwise", is_flag=True, help="Evaluate the local rule at the sample primes.")
@click.option("--fast-path", type=click.Choice(["auto", "on", "off"]), default="auto")
@handle_errors
def compute(fixture_path, module_name, locus, as_json, pointwise, fast_path):
    """Compute one locus of a module."""
    fx = load_fixture(fixture_path)
    M = fx.module(module_name)
    if pointwise:
        report = fx.context.pointwise(locus, M)
    elif locus.split(":")[0] in ("fid", "gor"):
        report = fx.context.compute(locus, M, gorenstein_fast_path=_fast_path(fast_path))
    else:
        report = fx.context.compute(locus, M)
    if as_json:
        click.echo(json_utils.dumps(report.to_model()), nl=False)
    else:
        click.echo(render_locus(report), nl=False)
    return EXIT_PASS


@cli.command()
@fixture_option
@module_option
@click.option("--locus", required=True)
@click.option("--prime", "prime_name", required=True)
@click.option("--pointwise", is_flag=True)
@handle_errors
def member(fixture_path, module_name, locus, prime_name, pointwise):
    """Is the prime in the locus? Prints true, false or inconclusive."""
    fx = load_fixture(fixture_path)
    M = fx.module(module_name)
    p = fx.prime(prime_name)
    report = fx.context.pointwise(locus, M) if pointwise else fx.context.compute(locus, M)
    verdict = report.member(p)
    if verdict == INCONCLUSIVE:
        click.echo(INCONCLUSIVE)
        return EXIT_INCONCLUSIVE
    click.echo("true" if verdict else "false")
    return EXIT_PASS


@cli.command()
@fixture_option
@module_option
@click.option("--prime", "prime_name", required=True)
@click.option("--json", "as_json", is_flag=True)
@handle_errors
def profile(fixture_path, module_name, prime_name, as_json):
    """Local invariants of a module at a prime."""
    fx = load_fixture(fixture_path)
    M = fx.module(module_name)
    result = local_profile(M, fx.prime(prime_name), fx.catalog)
    if as_json:
        click.echo(json_utils.dumps(result), nl=False)
    else:
        click.echo(render_profile(result, M.label), nl=False)
    return EXIT_PASS


@cli.command()
@fixture_option
@click.option("--check", "check_id", default=None, help="Run only this check id.")
@click.option("--json", "as_json", is_flag=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None,
              help="Also save the JSON report (atomic, with a .sha256 sidecar).")
@click.option("--baseline", "baseline_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="Fail unless the report equals this saved report.")
@handle_errors
def verify(fixture_path, check_id, as_json, out_path, baseline_path):
    """Run the fixture's checks."""
    fx = load_fixture(fixture_path)
    report = run_checks(fx, check_id)
    if as_json:
        click.echo(json_utils.dumps(report), nl=False)
    else:
        click.echo(render_verify(report), nl=False)
    if out_path:
        json_utils.save_report(report, out_path)
    code = report.exit_code()
    if baseline_path:
        baseline = json_utils.load_report(baseline_path, VerifyReport)
        if json_utils.dumps(baseline) != json_utils.dumps(report):
            click.echo(f"report differs from baseline {baseline_path}", err=True)
            return EXIT_FAIL
    unexpected = [c.id for c in report.checks if not c.as_expected]
    if unexpected:
        click.echo(f"not as expected: {', '.join(unexpected)}", err=True)
    return code


@cli.command()
@fixture_option
@module_option
@click.option("--length", type=click.IntRange(min=0), default=None)
@handle_errors
def resolve(fixture_path, module_name, length):
    """Print a free resolution."""
    fx = load_fixture(fixture_path)
    M = fx.module(module_name)
    res = free_resolution(M, length)
    click.echo(render_resolution(res, M.label), nl=False)
    if not verify_exactness(res):
        click.echo("resolution is not exact", err=True)
        return EXIT_FAIL
    return EXIT_PASS


if __name__ == "__main__":
    cli()
