"""
Command-Line Interface

nnts-symmetry fit | symmetry-test | simulate | density | experiment
"""

import functools
import sys
from pathlib import Path
from typing import List, Optional

import click
from loguru import logger
from tabulate import tabulate

from . import __version__
from .analysis import FAMILIES, FitTable, SymmetryAnalysis
from .angles import AngleUnit
from .estimation import FitOptions
from .exceptions import ConvergenceError, NntsError
from .exporters import CSVExporter, JSONExporter
from .ingest import parse_angles
from .persistence import load_experiment_config, load_model, save_model
from .rng import UINT64_MAX, RngStream
from .settings import configure_logging
from .simulation import run_experiment

ALL_METHODS = ["lr-asymptotic", "lr-bootstrap", "wald", "b2-bootstrap"]

UNIT_CHOICE = click.Choice([unit.value for unit in AngleUnit])
COLUMN_HELP = ("Column name or zero-based index. The first row is a header when that "
               "cell starts with a letter or underscore")
SEED = click.IntRange(0, UINT64_MAX)


def handle_errors(func):
    """Map library errors to their exit codes."""
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except NntsError as exc:
            logger.error(str(exc))
            click.echo(f"Error: {exc}", err=True)
            sys.exit(exc.exit_code)
    return wrapper


class OrderParam(click.ParamType):
    """NNTS order for tests: 'auto' or an integer >= 2."""

    name = "order"

    def convert(self, value, param, ctx):
        if value is None or str(value).lower() == "auto":
            return None
        try:
            order = int(value)
        except (TypeError, ValueError):
            self.fail(f"{value!r} is neither 'auto' nor an integer", param, ctx)
        if order == 1:
            self.fail("M=1 NNTS models are symmetric by definition", param, ctx)
        if order < 2:
            self.fail(f"symmetry tests need M >= 2, got {order}", param, ctx)
        return order


def _print_table(table: FitTable):
    headers = ["M", "logL(G)", "AIC(G)", "BIC(G)", "logL(S)", "AIC(S)", "BIC(S)",
               "mu", "LR", "chi2 p", "BLR p", "SK"]
    keys = ["M", "loglik_general", "aic_general", "bic_general", "loglik_symmetric",
            "aic_symmetric", "bic_symmetric", "mu_hat", "lr_gs", "chi2_p", "blr_p", "sk_nnts"]
    rows = []
    for record in table.records():
        row = [record[key] for key in keys]
        if record["best_general"] or record["best_symmetric"]:
            row[0] = f"{row[0]}*"
        rows.append(row)
    click.echo(tabulate(rows, headers=headers, floatfmt=".4f", missingval="-"))


@click.group()
@click.version_option(version=__version__)
@click.option("--log-level", default=None, help="Log level (default: NNTS_LOG_LEVEL or INFO)")
def cli(log_level: Optional[str]):
    """Fit NNTS circular models and test reflective symmetry."""
    configure_logging(log_level)


@cli.command()
@click.option("--input", "input_path", required=True, help="CSV/text file of angles")
@click.option("--unit", type=UNIT_CHOICE, default="rad", show_default=True)
@click.option("--column", default=None, help=COLUMN_HELP)
@click.option("--family", type=click.Choice(FAMILIES), default="both", show_default=True)
@click.option("--m-max", type=click.IntRange(min=0), default=10, show_default=True)
@click.option("--m", "m", type=click.IntRange(min=0), default=None, help="Order to report tests and save (default: best)")
@click.option("--criterion", type=click.Choice(["aic", "bic"]), default="bic", show_default=True)
@click.option("--seed", type=SEED, default=0, show_default=True)
@click.option("--restarts", type=click.IntRange(min=1), default=3, show_default=True)
@click.option("--k", "k", type=click.IntRange(min=0), default=0, help="Bootstrap replicates for BLR p (0 disables)")
@click.option("--out-model", type=click.Path(dir_okay=False), default=None)
@click.option("--out-report", type=click.Path(dir_okay=False), default=None)
@click.option("--strict", is_flag=True, help="Exit 4 if any fit did not converge")
@handle_errors
def fit(input_path, unit, column, family, m_max, m, criterion, seed, restarts, k,
        out_model, out_report, strict):
    """Fit NNTS models for M = 0..m-max and report LR, p-values and SK."""
    if k and k < 99:
        raise click.BadParameter("bootstrap needs at least 99 replicates", param_hint="--k")

    data = parse_angles(input_path, unit, column)
    analysis = SymmetryAnalysis(data, FitOptions(seed=seed, n_restarts=restarts))
    top = m_max if m is None else max(m_max, m)
    table = analysis.fit_table(top, family=family, criterion=criterion)
    selected = table.selected_m() if m is None else m

    if k and family == "both" and selected >= 2:
        result = analysis.run_tests(selected, ["lr-bootstrap"], k=k, seed=seed)[0]
        table = table.with_bootstrap_p(selected, result.p_value)

    _print_table(table)
    for note in table.notes:
        click.echo(f"note: {note}", err=True)

    if out_report:
        CSVExporter().export_fit_table(table, out_report)
    if out_model:
        report = table.report_for(selected)
        if report is None or not report.ok:
            raise NntsError(f"No fitted model at M={selected} to save")
        save_model(report.model, out_model)

    if strict and not table.all_converged:
        raise ConvergenceError("At least one fit did not converge")


@cli.command("symmetry-test")
@click.option("--input", "input_path", required=True, help="CSV/text file of angles")
@click.option("--unit", type=UNIT_CHOICE, default="rad", show_default=True)
@click.option("--column", default=None, help=COLUMN_HELP)
@click.option("--method", type=click.Choice(ALL_METHODS + ["all"]), default="all", show_default=True)
@click.option("--m", "m", type=OrderParam(), default="auto", show_default=True)
@click.option("--k", "k", type=click.IntRange(min=99), default=999, show_default=True)
@click.option("--m-max", type=click.IntRange(min=0), default=10, show_default=True)
@click.option("--seed", type=SEED, default=0, show_default=True)
@click.option("--restarts", type=click.IntRange(min=1), default=3, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Write JSON here as well as stdout")
@handle_errors
def symmetry_test(input_path, unit, column, method, m, k, m_max, seed, restarts, out):
    """Test reflective symmetry; prints a JSON array of results."""
    data = parse_angles(input_path, unit, column)
    analysis = SymmetryAnalysis(data, FitOptions(seed=seed, n_restarts=restarts))
    methods: List[str] = ALL_METHODS if method == "all" else [method]

    needs_order = any(name != "b2-bootstrap" for name in methods)
    if needs_order and m is None:
        m = analysis.select_m(m_max)
        logger.info(f"Best-BIC symmetric model has M={m}")
        if m < 2:
            logger.warning(f"Best-BIC order M={m} has nothing to test; using M=2")
            m = 2

    results = analysis.run_tests(m, methods, k=k, seed=seed)
    click.echo(JSONExporter().export_test_results(results, out), nl=False)


@cli.command()
@click.option("--model", "model_path", required=True, help="Model JSON file")
@click.option("--n", "n", type=click.IntRange(min=1), required=True)
@click.option("--seed", type=SEED, default=0, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True)
@handle_errors
def simulate(model_path, n, seed, out):
    """Draw n angles from a saved model."""
    model = load_model(model_path)
    sample = model.sample(n, RngStream(seed))
    CSVExporter().export_samples(sample, out)


@cli.command()
@click.option("--model", "model_path", required=True, help="Model JSON file")
@click.option("--grid", type=click.IntRange(min=8), default=512, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True)
@handle_errors
def density(model_path, grid, out):
    """Tabulate a saved model's density on a uniform grid."""
    CSVExporter().export_density_curve(load_model(model_path), grid, out)


@cli.command()
@click.option("--config", "config_path", required=True, help="Experiment YAML file")
@click.option("--out-dir", type=click.Path(file_okay=False), required=True)
@handle_errors
def experiment(config_path, out_dir):
    """Run a size/power experiment and write rates CSV plus audit JSON."""
    spec = load_experiment_config(config_path)
    table = run_experiment(spec)

    output = Path(out_dir)
    output.mkdir(parents=True, exist_ok=True)
    CSVExporter().export_rejection_table(table, str(output / "rejection_rates.csv"))
    JSONExporter().export_audit_bundle(spec, table, str(output / "audit.json"))
    click.echo(tabulate(table.to_frame(), headers="keys", showindex=False, floatfmt=".3f"))


def main():
    cli(prog_name="nnts-symmetry")


if __name__ == "__main__":
    main()
