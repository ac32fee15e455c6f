import csv
import io
import logging
from pathlib import Path
from typing import Iterable, Literal, TextIO

from src.models import TransactionRecord
from src.telemetry.stats import StatsReport
from src.utils.formatters import format_table, format_value

logger = logging.getLogger(__name__)

REPORT_COLUMNS = (
    "request_size",
    "op",
    "requests",
    "mean_latency_us",
    "median_latency_us",
    "p99_latency_us",
    "bandwidth_mbps",
    "queueing_us",
    "firmware_us",
    "flash_us",
)
PAGE_TYPE_COLUMNS = ("op", "page_type", "transactions", "mean_cell_us", "mean_latency_us")
SUMMARY_COLUMNS = ("metric", "value")
WEAR_COLUMNS = ("block_id", "erase_count", "invalid_count")
TRANSACTION_COLUMNS = (
    "sub_id",
    "channel",
    "die",
    "start",
    "finish",
    "t_cmd",
    "t_bus",
    "t_cell",
    "op",
    "page_type",
    "cell_start",
    "bus_start",
)


def _csv(headers: Iterable[str], rows: Iterable[Iterable]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(headers)
    writer.writerows([format_value(value) for value in row] for row in rows)
    return buffer.getvalue()


def _size_rows(stats: StatsReport) -> list[tuple]:
    return [tuple(getattr(row, column) for column in REPORT_COLUMNS) for row in stats.rows]


def _page_type_rows(stats: StatsReport) -> list[tuple]:
    return [tuple(getattr(row, column) for column in PAGE_TYPE_COLUMNS) for row in stats.page_types]


def render_csv(stats: StatsReport) -> str:
    """One row per (request size, op)."""
    return _csv(REPORT_COLUMNS, _size_rows(stats))


def render_page_types_csv(stats: StatsReport) -> str:
    return _csv(PAGE_TYPE_COLUMNS, _page_type_rows(stats))


def render_summary_csv(stats: StatsReport) -> str:
    """Run-wide metrics in long form."""
    return _csv(SUMMARY_COLUMNS, stats.summary.items())


def render_wear_csv(snapshot: list[tuple[int, int, int]]) -> str:
    return _csv(WEAR_COLUMNS, snapshot)


def render_human(stats: StatsReport) -> str:
    """Every CSV table as aligned text."""
    sections = [
        ("Requests by size", format_table(REPORT_COLUMNS, _size_rows(stats))),
        ("Flash transactions by page type", format_table(PAGE_TYPE_COLUMNS, _page_type_rows(stats))),
        ("Summary", format_table(SUMMARY_COLUMNS, stats.summary.items())),
    ]
    return "\n\n".join(f"{title}\n{table}" for title, table in sections) + "\n"


def report(stats: StatsReport, fmt: Literal["csv", "human"] = "csv") -> str:
    """Serialize a report; column order is fixed."""
    if fmt == "csv":
        return render_csv(stats)
    if fmt == "human":
        return render_human(stats)
    raise ValueError(f"Unknown report format {fmt!r}.")


def write_reports(stats: StatsReport, out: Path) -> None:
    """Write report.csv, page_types.csv and summary.csv into `out`."""
    out.mkdir(parents=True, exist_ok=True)
    for name, text in (
        ("report.csv", render_csv(stats)),
        ("page_types.csv", render_page_types_csv(stats)),
        ("summary.csv", render_summary_csv(stats)),
    ):
        (out / name).write_text(text, encoding="utf-8")
    logger.info(f"Reports written to {out}")


class TransactionLog:
    """CSV log of every scheduled flash transaction."""

    def __init__(self, stream: TextIO):
        self.stream = stream
        self.writer = csv.writer(stream, lineterminator="\n")
        self.writer.writerow(TRANSACTION_COLUMNS)

    def write(self, records: Iterable[TransactionRecord]) -> None:
        """Append transaction records."""
        self.writer.writerows(
            (
                record.sub_request_id,
                record.channel,
                record.die,
                record.start_tick,
                record.finish_tick,
                record.phases.t_cmd,
                record.phases.t_bus,
                record.phases.t_cell,
                record.op.value,
                format_value(record.page_type),
                record.cell_start,
                record.bus_start,
            )
            for record in records
        )
