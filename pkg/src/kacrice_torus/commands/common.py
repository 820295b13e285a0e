"""Plumbing shared by the CLI commands: config overrides, reports and errors."""

import logging
import traceback
from collections.abc import Callable
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import rich_click as click
from rich.console import Console

from ..covariance.radial_weight import WeightSpec, load_weight_table
from ..exceptions import KacRiceError, WeightSpecError
from ..formatters.report import build_report, render_json, render_table, write_report
from ..utils.config import Config

logger = logging.getLogger(__name__)

# Reports go to stdout; status messages and errors go to stderr
console = Console(stderr=True)
USAGE_EXIT_CODE = 2


@dataclass
class RunContext:
    """State built by the command group and handed to every command."""

    config: Config
    output: Path | None = None
    verbose: bool = False


def weight_from_config(config: Config) -> WeightSpec:
    """The weight described by ``config`` in dimension ``config.m``."""
    if config.weight == "gaussian":
        return WeightSpec.gaussian(config.weight_scale, dimension=config.m)
    if config.weight_table is None:
        raise WeightSpecError("weight 'tabulated' needs weight_table (--weight-table)")
    return load_weight_table(config.weight_table, dimension=config.m)


def parse_vector(text: str, name: str) -> list[float]:
    """Parse a comma-separated list of floats such as ``1,0``."""
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise click.BadParameter(f"{name} must be comma-separated numbers, got '{text}'") from e


def _error_entry(error: Exception) -> dict[str, Any]:
    if isinstance(error, KacRiceError):
        return error.to_dict()
    return {
        "code": "invalid_argument",
        "exit_code": USAGE_EXIT_CODE,
        "type": type(error).__name__,
        "message": str(error),
    }


def emit(run: RunContext, report: dict[str, Any]) -> None:
    """Print or write a report in the configured output format."""
    if run.config.output_format == "table":
        render_table(report, Console())
        if run.output:
            write_report(report, run.output)
        return
    if run.output:
        write_report(report, run.output)
        console.print(f"[SUCCESS] Report written to {run.output}", style="green", markup=False)
    else:
        click.echo(render_json(report), nl=False)


def run_command(
    ctx: click.Context,
    command: str,
    body: Callable[[Config], Any],
    overrides: dict[str, Any] | None = None,
) -> None:
    """Apply overrides, run ``body`` and emit its report.

    KacRiceError and ValueError abort with a report whose ``errors`` list
    describes the failure, and the process exits with the error's code.
    """
    run: RunContext = ctx.obj
    config = run.config
    try:
        if overrides:
            config.update(overrides)
        results = body(config)
    except (KacRiceError, ValueError) as e:
        entry = _error_entry(e)
        console.print(f"[ERROR] {e}", style="red", markup=False)
        if run.verbose:
            console.print(traceback.format_exc(), markup=False)
        logger.debug(f"{command} failed with {entry['code']}")
        report = build_report(command, config.to_dict(), config.seed, getattr(e, "results", None), [entry])
        emit(run, report)
        ctx.exit(entry["exit_code"])
        return

    emit(run, build_report(command, config.to_dict(), config.seed, results))


def common_weight_options(func: Callable) -> Callable:
    """Add --m, --weight, --weight-scale and --weight-table to a command."""
    func = click.option(
        "--weight-table",
        type=click.Path(exists=True, dir_okay=False, path_type=Path),
        help="Two-column CSV (t, w(t)) for --weight tabulated.",
    )(func)
    func = click.option("--weight-scale", type=float, help="Scale of the Gaussian weight.")(func)
    func = click.option(
        "--weight", type=click.Choice(Config.VALID_WEIGHTS), help="Weight family."
    )(func)
    func = click.option("--m", "m", type=int, help="Torus dimension.")(func)
    return func
