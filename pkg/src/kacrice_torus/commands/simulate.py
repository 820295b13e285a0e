"""Simulate command for the kacrice CLI."""

from pathlib import Path
from typing import Any

import numpy as np
import rich_click as click

from ..asymptotic_constants import predict_moments
from ..covariance.radial_weight import make_profile
from ..simulation.runner import empirical_moments, write_counts_csv
from ..utils.config import Config
from .common import common_weight_options, console, run_command, weight_from_config


@click.command()
@common_weight_options
@click.option("--epsilon", type=float, help="Field scale (0 < epsilon <= 0.2).")
@click.option("--fields", type=int, help="Number of independent fields (at least 100).")
@click.option("--seed", type=int, help="Run seed (64-bit unsigned).")
@click.option("--bootstrap", type=int, help="Bootstrap resamples for the standard errors.")
@click.option(
    "--emit-counts",
    type=click.Path(dir_okay=False, path_type=Path),
    help="Write one (field_index, count) row per field to this CSV file.",
)
@click.option(
    "--compare",
    is_flag=True,
    help="Add the predicted mean and variance at the same epsilon.",
)
@click.option("--samples", type=int, help="Monte Carlo draws for --compare.")
@click.pass_context
def simulate(
    ctx: click.Context,
    m: int | None,
    weight: str | None,
    weight_scale: float | None,
    weight_table: Path | None,
    epsilon: float | None,
    fields: int | None,
    seed: int | None,
    bootstrap: int | None,
    emit_counts: Path | None,
    compare: bool,
    samples: int | None,
) -> None:
    r"""Count critical points of simulated random fields on the torus.

    Field i is drawn from the stream (seed, i), so the report does not
    depend on --threads.

    \b
    Examples:
      kacrice simulate --m 1 --epsilon 0.05 --fields 2000 --seed 7
      kacrice simulate --m 2 --epsilon 0.2 --fields 200 --emit-counts counts.csv
      kacrice simulate --m 1 --epsilon 0.1 --compare
    """

    def body(config: Config) -> dict[str, Any]:
        w = weight_from_config(config)
        moments = empirical_moments(
            w,
            config.m,
            config.epsilon,
            config.fields,
            config.seed,
            max_workers=config.threads,
            bootstrap_resamples=config.bootstrap_resamples,
        )
        results = moments.to_dict()
        if moments.signed_counts is not None:
            results["nonzero_signed_counts"] = int(np.count_nonzero(moments.signed_counts))
        if emit_counts is not None:
            write_counts_csv(moments, emit_counts)
            console.print(f"[SUCCESS] Counts written to {emit_counts}", style="green", markup=False)
            results["counts_csv"] = str(emit_counts)
        if compare:
            prediction = predict_moments(
                make_profile(w, config.m),
                config.epsilon,
                n_mc=config.samples,
                rng=config.seed,
                max_workers=config.threads,
            )
            results["prediction"] = prediction.to_dict()
            mean = prediction.mean_exact or prediction.mean
            variance = prediction.variance_exact or prediction.variance
            results["mean_ratio"] = moments.mean / mean
            results["variance_ratio"] = moments.variance / variance
        return results

    overrides = {
        "m": m,
        "weight": weight,
        "weight_scale": weight_scale,
        "weight_table": weight_table,
        "epsilon": epsilon,
        "fields": fields,
        "seed": seed,
        "bootstrap_resamples": bootstrap,
        "samples": samples,
    }
    run_command(ctx, "simulate", body, overrides)
