"""JSON reports, CSV curves and console tables."""

import csv
import dataclasses
import enum
import json
import math
from collections.abc import Iterable, Sequence
from pathlib import Path
from typing import Any

import numpy as np
from rich.console import Console
from rich.table import Table

from ..__version__ import __version__
from ..constants import REPORT_KEYS


def to_jsonable(value: Any) -> Any:
    """Convert numpy scalars/arrays, dataclasses, enums and paths to JSON types.

    Non-finite floats become None.
    """
    if hasattr(value, "to_dict"):
        return to_jsonable(value.to_dict())
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return to_jsonable(dataclasses.asdict(value))
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, list | tuple):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, np.bool_ | bool):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, float | np.floating):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, enum.Enum):
        return value.value
    if isinstance(value, Path):
        return str(value)
    return value


def build_report(
    command: str,
    config: dict[str, Any],
    seed: int | None,
    results: Any,
    errors: Sequence[dict[str, Any]] = (),
) -> dict[str, Any]:
    """Assemble a report with exactly the keys in REPORT_KEYS, in order."""
    values = (
        __version__,
        command,
        to_jsonable(config),
        seed,
        to_jsonable(results),
        [to_jsonable(e) for e in errors],
    )
    return dict(zip(REPORT_KEYS, values, strict=True))


def render_json(report: dict[str, Any]) -> str:
    """Indented JSON; floats use the shortest round-trip representation."""
    return json.dumps(to_jsonable(report), indent=2, allow_nan=False) + "\n"


def write_report(report: dict[str, Any], path: Path | None = None) -> str:
    """Write the JSON report to ``path`` (if given) and return the text."""
    text = render_json(report)
    if path is not None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    return text


def _cell(value: Any) -> str:
    if isinstance(value, float | np.floating):
        return repr(float(value))
    return str(value)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    """CSV with full-precision shortest round-trip decimals."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])
    return path


def _flatten(value: Any, prefix: str = "") -> list[tuple[str, Any]]:
    if isinstance(value, dict):
        items: list[tuple[str, Any]] = []
        for key, sub in value.items():
            items.extend(_flatten(sub, f"{prefix}.{key}" if prefix else str(key)))
        return items
    return [(prefix, value)]


def render_table(report: dict[str, Any], console: Console) -> None:
    """Print the results of a report as a two-column rich table."""
    table = Table(title=f"kacrice {report['command']} (seed {report['seed']})")
    table.add_column("Quantity", style="cyan")
    table.add_column("Value", style="green")
    results = report["results"]
    for key, value in _flatten(results) if results is not None else ():
        if isinstance(value, list) and len(value) > 8:
            value = f"[{len(value)} values]"
        table.add_row(key, str(value))
    console.print(table)
    for error in report["errors"]:
        console.print(f"[ERROR] {error.get('message', error)}", style="red", markup=False)
