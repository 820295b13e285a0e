"""Constants command for the kacrice CLI."""

from pathlib import Path
from typing import Any

import rich_click as click

from ..asymptotic_constants import compute_constants, dump_delta0
from ..constants import DEFAULT_RADIAL_NODES
from ..covariance.radial_weight import make_profile
from ..utils.config import Config
from .common import common_weight_options, console, run_command, weight_from_config


@click.command()
@common_weight_options
@click.option("--epsilon", type=float, help="Scale at which the moments are predicted.")
@click.option("--samples", type=int, help="Monte Carlo draws per expectation.")
@click.option("--seed", type=int, help="Run seed (64-bit unsigned).")
@click.option(
    "--tail-tolerance",
    type=float,
    help="Truncate the radial integral once the weight decays below this.",
)
@click.option(
    "--nodes",
    type=int,
    default=DEFAULT_RADIAL_NODES,
    show_default=True,
    help="Gauss-Legendre nodes per radial panel (m >= 2).",
)
@click.option(
    "--dump-delta0",
    "delta0_path",
    type=click.Path(dir_okay=False, path_type=Path),
    help="Also write (t, delta0, std_error) rows to this CSV file.",
)
@click.pass_context
def constants(
    ctx: click.Context,
    m: int | None,
    weight: str | None,
    weight_scale: float | None,
    weight_table: Path | None,
    epsilon: float | None,
    samples: int | None,
    seed: int | None,
    tail_tolerance: float | None,
    nodes: int,
    delta0_path: Path | None,
) -> None:
    r"""Compute C_m(w), C'_m(w) and the predicted moments of the count.

    \b
    Examples:
      kacrice constants --m 1 --samples 100000 --seed 7
      kacrice constants --m 2 --weight-scale 0.5 --epsilon 0.1
      kacrice constants --m 1 --dump-delta0 delta0.csv
    """

    def body(config: Config) -> dict[str, Any]:
        p = make_profile(weight_from_config(config), config.m)
        report = compute_constants(
            p,
            config.samples,
            config.seed,
            epsilon=config.epsilon,
            tail_tolerance=config.radial_tail_tolerance,
            nodes=nodes,
            max_workers=config.threads,
        )
        results = report.to_dict()
        if delta0_path is not None:
            dump_delta0(
                p,
                delta0_path,
                config.samples,
                config.seed,
                tail_tolerance=config.radial_tail_tolerance,
            )
            console.print(
                f"[SUCCESS] delta0 curve written to {delta0_path}", style="green", markup=False
            )
            results["delta0_csv"] = str(delta0_path)
        return results

    overrides = {
        "m": m,
        "weight": weight,
        "weight_scale": weight_scale,
        "weight_table": weight_table,
        "epsilon": epsilon,
        "samples": samples,
        "seed": seed,
        "radial_tail_tolerance": tail_tolerance,
    }
    run_command(ctx, "constants", body, overrides)
