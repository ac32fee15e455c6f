from enum import Enum
from typing import Any, Iterable, Sequence

from src.core import constants


def format_value(value: Any, float_format: str = constants.telemetry.float_format) -> str:
    """Render a report cell: fixed-precision floats, enum values, '-' for missing."""
    if value is None:
        return "-"
    if isinstance(value, Enum):
        return str(value.value)
    if isinstance(value, float):
        return float_format.format(value)
    return str(value)


def format_table(headers: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    """Align already formatted cells into a plain-text table; numbers are right-aligned."""
    cells = [[format_value(value) for value in row] for row in rows]
    widths = [max([len(header)] + [len(row[i]) for row in cells]) for i, header in enumerate(headers)]

    lines = ["  ".join(header.ljust(width) for header, width in zip(headers, widths)).rstrip()]
    lines.append("  ".join("-" * width for width in widths))
    for row in cells:
        lines.append("  ".join(
            cell.rjust(width) if _is_number(cell) else cell.ljust(width) for cell, width in zip(row, widths)
        ).rstrip())
    return "\n".join(lines)


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True
