"""Init-config command for the kacrice CLI."""

import sys
from pathlib import Path

import rich_click as click

from ..utils.config import CONFIG_FILENAME, Config, ConfigValidationError
from .common import console


@click.command("init-config")
@click.argument(
    "directory",
    type=click.Path(exists=True, file_okay=False, path_type=Path),
    default=".",
)
@click.option("--force", is_flag=True, help="Overwrite an existing config file.")
def init_config(directory: Path, force: bool) -> None:
    r"""Write a commented kacrice.yaml with the default settings.

    \b
    Examples:
      kacrice init-config
      kacrice init-config runs/ --force
    """
    config_file = directory / CONFIG_FILENAME

    if config_file.exists():
        console.print(f"[WARNING] {CONFIG_FILENAME} already exists at {config_file}", style="yellow")
        if not force:
            # Handle non-interactive environment
            if not sys.stdin.isatty():
                console.print(
                    "[ERROR] File exists and --force not specified in non-interactive environment",
                    style="red",
                )
                sys.exit(1)
            if not click.confirm("Overwrite existing file?"):
                console.print("[ERROR] Operation cancelled", style="red")
                sys.exit(1)

    try:
        Config().create_default_config(config_file)
    except ConfigValidationError as e:
        console.print(f"[ERROR] {e}", style="red")
        sys.exit(e.exit_code)
    console.print(f"[SUCCESS] Generated {CONFIG_FILENAME} at {config_file}", style="green")
    console.print("[NOTE] Command-line flags override the values in this file", style="cyan")
