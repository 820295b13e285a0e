"""Ensemble command for the kacrice CLI."""

import math
from typing import Any

import rich_click as click

from ..ensembles.sampling import expect_abs_det
from ..ensembles.sym_ensembles import (
    AxialSpec,
    IsoSpec,
    PairGaussianSpec,
    axial_covariance,
    det_qc,
    validate_axial,
)
from ..utils.config import Config
from ..utils.rng import spawn
from .common import parse_vector, run_command


def iso_results(spec: IsoSpec, samples: int, rng) -> dict[str, Any]:
    estimate = expect_abs_det(spec, samples, rng)
    results: dict[str, Any] = {"spec": spec.to_dict(), "abs_det": estimate.to_dict()}
    if spec.m == 1:
        # a ~ N(0, u + 2v), so E|a| = sqrt(2 (u + 2v) / pi)
        results["abs_det_exact"] = math.sqrt(2.0 * (spec.u + 2.0 * spec.v) / math.pi)
    return results


def axial_results(spec: AxialSpec, samples: int, rng) -> dict[str, Any]:
    validation = validate_axial(spec)
    results: dict[str, Any] = {
        "spec": spec.to_dict(),
        "valid": validation.valid,
        "reason": validation.reason,
        "det_qc": det_qc(spec),
    }
    if validation:
        pair = PairGaussianSpec(spec.m, axial_covariance(spec), blocks=1)
        results["abs_det"] = expect_abs_det(pair, samples, rng).to_dict()
    return results


@click.command()
@click.option("--m", "m", type=int, help="Matrix size.")
@click.option("--u", type=float, default=1.0, show_default=True, help="Trace coupling u of Gamma_{u,v}.")
@click.option("--v", type=float, default=1.0, show_default=True, help="GOE scale v of Gamma_{u,v}.")
@click.option(
    "--c",
    "c_values",
    metavar="C1,C2,C3,C4,C5",
    help="Also evaluate the axially invariant ensemble Q_c with these coefficients.",
)
@click.option("--samples", type=int, help="Monte Carlo draws.")
@click.option("--seed", type=int, help="Run seed (64-bit unsigned).")
@click.pass_context
def ensemble(
    ctx: click.Context,
    m: int | None,
    u: float,
    v: float,
    c_values: str | None,
    samples: int | None,
    seed: int | None,
) -> None:
    r"""Estimate E|det| for invariant Gaussian ensembles of symmetric matrices.

    \b
    Examples:
      kacrice ensemble --m 1 --u 1 --v 1 --samples 100000
      kacrice ensemble --m 3 --u 0.5 --v 2
      kacrice ensemble --m 2 --c 3,1,0.5,1,2
    """
    c = parse_vector(c_values, "--c") if c_values is not None else None

    def body(config: Config) -> dict[str, Any]:
        iso_rng, axial_rng = spawn(config.seed, 2)
        results = {"iso": iso_results(IsoSpec(config.m, u, v), config.samples, iso_rng)}
        if c is not None:
            results["axial"] = axial_results(AxialSpec(config.m, tuple(c)), config.samples, axial_rng)
        return results

    run_command(ctx, "ensemble", body, {"m": m, "samples": samples, "seed": seed})
