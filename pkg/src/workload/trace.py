import csv
import logging
from pathlib import Path
from typing import Iterator

from src.core.errors import TraceOrderError, TraceParseError, WorkloadError
from src.models import IoOp, TraceEvent

logger = logging.getLogger(__name__)

TRACE_HEADER = ("tick", "op", "lba", "n_sector")


def _parse_int(value: str, name: str, line: int, minimum: int) -> int:
    try:
        number = int(value)
    except ValueError:
        raise TraceParseError(line, f"{name} {value!r} is not an integer") from None
    if number < minimum:
        raise TraceParseError(line, f"{name} must be >= {minimum}, got {number}")
    return number


def parse_trace_lines(lines: Iterator[str]) -> Iterator[TraceEvent]:
    """
    Parse trace CSV lines lazily.

    The optional first line is the header `tick,op,lba,n_sector`; every other line is one request:
    arrival tick in ns, R or W, first 512-byte sector and sector count. Blank lines are skipped.

    Raises:
        TraceParseError: A line is malformed; the error carries its 1-based line number.
        TraceOrderError: A tick is smaller than the one before it.
    """
    last_tick = 0
    for line, row in enumerate(csv.reader(lines), start=1):
        if not row or all(not cell.strip() for cell in row):
            continue
        cells = [cell.strip() for cell in row]
        if line == 1 and tuple(cell.lower() for cell in cells) == TRACE_HEADER:
            continue
        if len(cells) != len(TRACE_HEADER):
            raise TraceParseError(line, f"expected {len(TRACE_HEADER)} fields, got {len(cells)}")

        tick = _parse_int(cells[0], "tick", line, 0)
        try:
            op = IoOp(cells[1].upper())
        except ValueError:
            raise TraceParseError(line, f"op {cells[1]!r} is not R or W") from None
        lba = _parse_int(cells[2], "lba", line, 0)
        n_sector = _parse_int(cells[3], "n_sector", line, 1)

        if tick < last_tick:
            raise TraceOrderError(line, f"tick {tick} goes back from {last_tick}")
        last_tick = tick
        yield TraceEvent(tick=tick, op=op, lba=lba, n_sector=n_sector)


def parse_trace(path: str | Path) -> Iterator[TraceEvent]:
    """Stream the events of a trace file; only one line is held in memory at a time."""
    path = Path(path)
    try:
        stream = path.open(newline="", encoding="utf-8")
    except OSError as exc:
        raise WorkloadError(f"Cannot read trace {path}: {exc.strerror}") from exc

    logger.info(f"Replaying trace {path}")
    with stream:
        yield from parse_trace_lines(stream)
