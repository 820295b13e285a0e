"""Output formatters for reports and curves."""

from .report import build_report, render_json, render_table, to_jsonable, write_csv, write_report

__all__ = [
    "build_report",
    "render_json",
    "render_table",
    "to_jsonable",
    "write_csv",
    "write_report",
]
