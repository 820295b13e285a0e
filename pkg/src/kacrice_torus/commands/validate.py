"""Validate command for the kacrice CLI."""

from typing import Any

import rich_click as click
from rich.table import Table

from ..exceptions import ValidationFailedError
from ..utils.config import Config
from ..validation import CheckResult, run_checks
from .common import console, run_command

VALIDATE_SAMPLES = 20_000


def _checks_table(checks: list[CheckResult]) -> Table:
    table = Table(title="kacrice validate")
    table.add_column("Check", style="cyan")
    table.add_column("Value")
    table.add_column("Expected")
    table.add_column("Tolerance")
    table.add_column("Result")
    for check in checks:
        table.add_row(
            check.name,
            f"{check.value:.6g}",
            f"{check.expected:.6g}",
            f"{check.tolerance:.2g}",
            "[green]PASS[/green]" if check.passed else "[red]FAIL[/red]",
        )
    return table


@click.command()
@click.option(
    "--samples",
    type=int,
    default=VALIDATE_SAMPLES,
    show_default=True,
    help="Monte Carlo draws for the randomized checks.",
)
@click.option("--seed", type=int, help="Run seed (64-bit unsigned).")
@click.pass_context
def validate(ctx: click.Context, samples: int, seed: int | None) -> None:
    r"""Run the self-checks against closed forms and print a pass/fail table.

    Exits with code 8 when any check fails.

    \b
    Examples:
      kacrice validate
      kacrice validate --samples 100000 --seed 11
    """

    def body(config: Config) -> list[dict[str, Any]]:
        checks = run_checks(samples, config.seed, max_workers=config.threads)
        console.print(_checks_table(checks))
        results = [check.to_dict() for check in checks]
        failed = [check.name for check in checks if not check.passed]
        if failed:
            raise ValidationFailedError(failed, results)
        console.print(f"[SUCCESS] All {len(checks)} checks passed", style="green", markup=False)
        return results

    run_command(ctx, "validate", body, {"seed": seed})
