"""Command-line interface for kacrice-torus."""

import sys
from pathlib import Path

import rich_click as click

from .__version__ import __version__

# Check Python version before importing anything else
if sys.version_info < (3, 11):  # noqa: UP036
    print(
        "Error: kacrice-torus requires Python 3.11 or higher.\n"
        f"You are using Python {sys.version_info.major}.{sys.version_info.minor}.{sys.version_info.micro}.",
        file=sys.stderr,
    )
    sys.exit(1)

from .commands.common import RunContext, console
from .commands.constants import constants
from .commands.ensemble import ensemble
from .commands.init_config import init_config
from .commands.kernel import kernel
from .commands.simulate import simulate
from .commands.validate import validate
from .utils.config import Config, ConfigValidationError
from .utils.logging_config import setup_logging, timestamped_log_file

# Configure rich-click for better help formatting
click.rich_click.USE_RICH_MARKUP = True
click.rich_click.SHOW_ARGUMENTS = True
click.rich_click.GROUP_ARGUMENTS_OPTIONS = True
click.rich_click.STYLE_OPTION = "bold green"
click.rich_click.STYLE_ARGUMENT = "bold cyan"
click.rich_click.STYLE_COMMAND = "bold blue"


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.option(
    "-c",
    "--config",
    "config_path",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    help="Config file, YAML or key=value lines (default: kacrice.yaml searched upwards).",
)
@click.option(
    "-o",
    "--output",
    type=click.Path(dir_okay=False, path_type=Path),
    help="Write the JSON report to this file instead of stdout.",
)
@click.option("--threads", type=int, help="Worker threads (default: all available CPUs).")
@click.option(
    "--format",
    "output_format",
    type=click.Choice(Config.VALID_OUTPUT_FORMATS),
    help="Report format on stdout.",
)
@click.option("-v", "--verbose", is_flag=True, help="Enable verbose logging.")
@click.option(
    "--log-dir",
    type=click.Path(file_okay=False, path_type=Path),
    default=Path("logs"),
    show_default=True,
    help="Directory for the log file written in verbose mode.",
)
@click.version_option(version=__version__, prog_name="kacrice-torus")
@click.pass_context
def main(
    ctx: click.Context,
    config_path: Path | None,
    output: Path | None,
    threads: int | None,
    output_format: str | None,
    verbose: bool,
    log_dir: Path,
) -> None:
    r"""Kac-Rice predictions and simulations for critical points of random fields on the torus.

    Every command prints a JSON report with the keys version, command,
    config, seed, results and errors. Flags override the config file, which
    overrides the built-in defaults.

    \b
    [bold cyan]Examples:[/bold cyan]
      [green]kacrice constants --m 1 --samples 100000 --seed 7[/green]
      [green]kacrice simulate --m 1 --epsilon 0.05 --fields 2000[/green]
      [green]kacrice kernel --m 2 --eta 0.5,0[/green]
      [green]kacrice --format table validate[/green]
      [green]kacrice init-config[/green]
    """
    try:
        config = Config.load(config_path=config_path, search_path=Path.cwd())
        config.update(
            {
                "threads": threads,
                "output_format": output_format,
                "verbose": True if verbose else None,
            }
        )
    except ConfigValidationError as e:
        console.print(f"[ERROR] {e}", style="red", markup=False)
        ctx.exit(e.exit_code)
        return

    log_file = timestamped_log_file(log_dir) if config.verbose else None
    setup_logging(verbose=config.verbose, log_file=log_file, log_level=config.log_level)
    ctx.obj = RunContext(config=config, output=output, verbose=config.verbose)


main.add_command(constants)
main.add_command(simulate)
main.add_command(ensemble)
main.add_command(kernel)
main.add_command(validate)
main.add_command(init_config)


if __name__ == "__main__":
    main()
