"""Kernel command for the kacrice CLI."""

from pathlib import Path
from typing import Any

import rich_click as click

from ..asymptotic_constants import k_eta
from ..covariance.conditional_hessian import xi_bar
from ..covariance.kernel import det_script_h, hessian_gap, script_h, sigma_tilde, tech_margin
from ..covariance.radial_weight import make_profile
from ..formatters.report import write_csv
from ..utils.config import Config
from .common import common_weight_options, console, parse_vector, run_command, weight_from_config


@click.command()
@common_weight_options
@click.option("--eta", required=True, metavar="X1,...,XM", help="Separation vector eta.")
@click.option(
    "--periodic-epsilon",
    type=float,
    default=0.0,
    show_default=True,
    help="Use the periodization V^eps instead of V (0 disables it).",
)
@click.option(
    "--tensor-csv",
    type=click.Path(dir_okay=False, path_type=Path),
    help="Write the entries (i, j, k, l, value) of Xi(eta) to this CSV file.",
)
@click.pass_context
def kernel(
    ctx: click.Context,
    m: int | None,
    weight: str | None,
    weight_scale: float | None,
    weight_table: Path | None,
    eta: str,
    periodic_epsilon: float,
    tensor_csv: Path | None,
) -> None:
    r"""Evaluate H(V, eta), its inverse and the conditional Hessian covariance.

    \b
    Examples:
      kacrice kernel --m 1 --eta 1
      kacrice kernel --m 2 --eta 0.5,0.5 --tensor-csv xi.csv
      kacrice kernel --m 2 --eta 0.3,0 --periodic-epsilon 0.1
    """
    eta_vector = parse_vector(eta, "--eta")

    def body(config: Config) -> dict[str, Any]:
        if len(eta_vector) != config.m:
            raise ValueError(f"--eta needs {config.m} components, got {len(eta_vector)}")
        p = make_profile(weight_from_config(config), config.m)
        h = script_h(p, eta_vector, periodic_epsilon)
        tensor = xi_bar(p, eta_vector, periodic_epsilon)
        results: dict[str, Any] = {
            "eta": eta_vector,
            "eta_norm": h.eta_norm,
            "periodic_epsilon": periodic_epsilon,
            "moments": {"s": p.s_m, "d": p.d_m, "h": p.h_m},
            "script_h": h.matrix,
            "det_script_h": det_script_h(h),
            "sigma_tilde": sigma_tilde(p, eta_vector, periodic_epsilon).matrix,
            "xi_min_eigenvalue": tensor.min_eigenvalue(),
            "xi_psd": tensor.is_psd(),
        }
        if periodic_epsilon == 0:
            axial, transverse = tech_margin(p, h.eta_norm)
            results["k_eta"] = k_eta(p, eta_vector)
            results["hessian_gap"] = hessian_gap(p, eta_vector)
            results["tech_margin"] = {"axial": axial, "transverse": transverse}
        if tensor_csv is not None:
            write_csv(tensor_csv, ("i", "j", "k", "l", "value"), tensor.to_rows())
            console.print(f"[SUCCESS] Tensor written to {tensor_csv}", style="green", markup=False)
            results["tensor_csv"] = str(tensor_csv)
        return results

    overrides = {
        "m": m,
        "weight": weight,
        "weight_scale": weight_scale,
        "weight_table": weight_table,
    }
    run_command(ctx, "kernel", body, overrides)
