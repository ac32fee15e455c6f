import logging
import math
import random
import statistics
from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Optional

from src.core.constants import constants
from src.models import CompletionRecord, IoOp, PageType, SubOp, Topology, TransactionRecord

logger = logging.getLogger(__name__)


@dataclass(slots=True)
class _SizeAccumulator:
    requests: int = 0
    n_bytes: int = 0
    latency_sum: int = 0
    queueing_sum: int = 0
    firmware_sum: int = 0
    flash_sum: int = 0
    first_arrival: Optional[int] = None
    last_finish: int = 0
    seen: int = 0
    samples: list[int] = field(default_factory=list)


@dataclass(slots=True)
class _PageTypeAccumulator:
    transactions: int = 0
    cell_sum: int = 0
    latency_sum: int = 0


@dataclass(frozen=True, slots=True)
class SizeRow:
    """Latency and bandwidth of one (op, request size) class. Latencies in µs, bandwidth in MB/s."""

    request_size: int
    op: IoOp
    requests: int
    mean_latency_us: float
    median_latency_us: float
    p99_latency_us: float
    bandwidth_mbps: float
    queueing_us: float
    firmware_us: float
    flash_us: float


@dataclass(frozen=True, slots=True)
class PageTypeRow:
    """Transactions of one (op, page type) class."""

    op: SubOp
    page_type: Optional[PageType]
    transactions: int
    mean_cell_us: float
    mean_latency_us: float


@dataclass(frozen=True, slots=True)
class StatsReport:
    rows: list[SizeRow]
    page_types: list[PageTypeRow]
    summary: dict[str, int | float]


def _us(ticks: float) -> float:
    return ticks / constants.units.ns_per_us


def _mbps(n_bytes: int, ticks: int) -> float:
    """Bytes per nanosecond span as MB/s (10^6 bytes)."""
    if ticks <= 0:
        return 0.0
    return n_bytes * 1e9 / ticks / constants.units.bytes_per_mb


def percentile(samples: list[int], fraction: float) -> int:
    """Nearest-rank percentile of a non-empty sample."""
    ordered = sorted(samples)
    rank = max(1, math.ceil(fraction * len(ordered)))
    return ordered[rank - 1]


class StatsCollector:
    """
    Streaming aggregation of completion and transaction records.

    Latency percentiles come from a seeded reservoir of at most `reservoir_size` samples per
    (op, size) class, so they are exact below that size. Collectors of independent runs can be merged.
    """

    def __init__(self, topology: Topology, reservoir_size: int = constants.telemetry.reservoir_size, seed: int = 0):
        self.topology = topology
        self.reservoir_size = reservoir_size
        self._rng = random.Random(seed)
        self._sizes: dict[tuple[IoOp, int], _SizeAccumulator] = {}
        self._page_types: dict[tuple[SubOp, Optional[PageType]], _PageTypeAccumulator] = {}
        self.channel_busy = [0] * topology.n_channel
        self.die_busy = [0] * topology.n_dies_total
        self.transaction_counts: Counter[SubOp] = Counter()
        self.firmware_counters: Counter[str] = Counter()
        self.erase_histogram: Counter[int] = Counter()
        self._first_tick: Optional[int] = None
        self._last_tick = 0
        self._merged_span = 0

    @property
    def span_ticks(self) -> int:
        """Simulated time covered by the records, summed over merged runs."""
        own = 0 if self._first_tick is None else self._last_tick - self._first_tick
        return own + self._merged_span

    def _observe(self, start: int, end: int) -> None:
        if self._first_tick is None or start < self._first_tick:
            self._first_tick = start
        self._last_tick = max(self._last_tick, end)

    def accumulate(self, record: CompletionRecord | TransactionRecord) -> None:
        """Add one finished request or flash transaction."""
        if isinstance(record, CompletionRecord):
            self._accumulate_completion(record)
        else:
            self._accumulate_transaction(record)

    def _accumulate_completion(self, record: CompletionRecord) -> None:
        self._observe(record.arrival_tick, record.finish_tick)
        row = self._sizes.setdefault((record.op, record.n_bytes), _SizeAccumulator())
        row.requests += 1
        row.n_bytes += record.n_bytes
        row.latency_sum += record.device_latency
        row.queueing_sum += record.breakdown.queueing
        row.firmware_sum += record.breakdown.firmware
        row.flash_sum += record.breakdown.flash
        if row.first_arrival is None or record.arrival_tick < row.first_arrival:
            row.first_arrival = record.arrival_tick
        row.last_finish = max(row.last_finish, record.finish_tick)

        row.seen += 1
        if len(row.samples) < self.reservoir_size:
            row.samples.append(record.device_latency)
        else:
            slot = self._rng.randrange(row.seen)
            if slot < self.reservoir_size:
                row.samples[slot] = record.device_latency

    def _accumulate_transaction(self, record: TransactionRecord) -> None:
        self._observe(record.start_tick, record.finish_tick)
        self.transaction_counts[record.op] += 1
        self.channel_busy[record.channel] += record.phases.t_cmd + record.phases.t_bus
        self.die_busy[record.die] += record.finish_tick - record.start_tick

        row = self._page_types.setdefault((record.op, record.page_type), _PageTypeAccumulator())
        row.transactions += 1
        row.cell_sum += record.phases.t_cell
        row.latency_sum += record.finish_tick - record.start_tick

    def add_counters(self, counters: dict[str, int]) -> None:
        """Add firmware activity counters (GC invocations, erases, ...)."""
        self.firmware_counters.update(counters)

    def add_wear(self, snapshot: list[tuple[int, int, int]]) -> None:
        """Add the erase counts of a (block_id, erase_count, invalid_count) snapshot."""
        self.erase_histogram.update(erase_count for _, erase_count, _ in snapshot)

    def merge(self, other: "StatsCollector") -> None:
        """Fold the statistics of an independent run into this one."""
        for key, theirs in other._sizes.items():
            mine = self._sizes.get(key)
            if mine is None:
                self._sizes[key] = replace(theirs, samples=list(theirs.samples))
                continue
            for name in ("requests", "n_bytes", "latency_sum", "queueing_sum", "firmware_sum", "flash_sum", "seen"):
                setattr(mine, name, getattr(mine, name) + getattr(theirs, name))
            mine.first_arrival = min(mine.first_arrival, theirs.first_arrival)
            mine.last_finish = max(mine.last_finish, theirs.last_finish)
            samples = mine.samples + theirs.samples
            if len(samples) > self.reservoir_size:
                samples = self._rng.sample(samples, self.reservoir_size)
            mine.samples = samples

        for key, theirs in other._page_types.items():
            mine = self._page_types.setdefault(key, _PageTypeAccumulator())
            mine.transactions += theirs.transactions
            mine.cell_sum += theirs.cell_sum
            mine.latency_sum += theirs.latency_sum

        self.channel_busy = [a + b for a, b in zip(self.channel_busy, other.channel_busy)]
        self.die_busy = [a + b for a, b in zip(self.die_busy, other.die_busy)]
        self.transaction_counts.update(other.transaction_counts)
        self.firmware_counters.update(other.firmware_counters)
        self.erase_histogram.update(other.erase_histogram)
        self._merged_span += other.span_ticks

    @property
    def write_amplification(self) -> tuple[float, bool]:
        """(host + GC page writes) / host page writes, and whether there were no host writes at all."""
        host = self.transaction_counts[SubOp.WRITE]
        if not host:
            return 1.0, True
        return (host + self.transaction_counts[SubOp.GC_WRITE]) / host, False

    def report(self) -> StatsReport:
        """Snapshot the statistics."""
        rows = []
        for (op, size), acc in sorted(self._sizes.items(), key=lambda item: (item[0][0].value, item[0][1])):
            rows.append(SizeRow(
                request_size=size,
                op=op,
                requests=acc.requests,
                mean_latency_us=_us(acc.latency_sum / acc.requests),
                median_latency_us=_us(statistics.median(acc.samples)),
                p99_latency_us=_us(percentile(acc.samples, 0.99)),
                bandwidth_mbps=_mbps(acc.n_bytes, acc.last_finish - acc.first_arrival),
                queueing_us=_us(acc.queueing_sum / acc.requests),
                firmware_us=_us(acc.firmware_sum / acc.requests),
                flash_us=_us(acc.flash_sum / acc.requests),
            ))

        page_types = [
            PageTypeRow(
                op=op,
                page_type=page_type,
                transactions=acc.transactions,
                mean_cell_us=_us(acc.cell_sum / acc.transactions),
                mean_latency_us=_us(acc.latency_sum / acc.transactions),
            )
            for (op, page_type), acc in sorted(
                self._page_types.items(), key=lambda item: (item[0][0].value, item[0][1].value if item[0][1] else "")
            )
        ]

        return StatsReport(rows=rows, page_types=page_types, summary=self._summary())

    def _summary(self) -> dict[str, int | float]:
        span = self.span_ticks
        requests = sum(acc.requests for acc in self._sizes.values())
        n_bytes = sum(acc.n_bytes for acc in self._sizes.values())
        wa, zero_writes = self.write_amplification

        summary: dict[str, int | float] = {
            "requests": requests,
            "bytes": n_bytes,
            "span_us": _us(span),
            "bandwidth_mbps": _mbps(n_bytes, span),
            "host_pages_written": self.transaction_counts[SubOp.WRITE],
            "gc_pages_written": self.transaction_counts[SubOp.GC_WRITE],
            "write_amplification": wa,
            "zero_writes": int(zero_writes),
            "gc_invocations": self.firmware_counters["gc_invocations"],
            "merges": self.firmware_counters["merges"],
            "pages_moved_by_gc": self.firmware_counters["gc_pages_moved"],
            "erases": self.firmware_counters["erases"],
        }

        if self.erase_histogram:
            counts = list(self.erase_histogram.elements())
            summary["erase_count_min"] = min(counts)
            summary["erase_count_max"] = max(counts)
            summary["erase_count_mean"] = statistics.fmean(counts)
            for erase_count in sorted(self.erase_histogram):
                summary[f"erase_count_blocks[{erase_count}]"] = self.erase_histogram[erase_count]

        for channel, busy in enumerate(self.channel_busy):
            summary[f"channel_busy[{channel}]"] = busy / span if span else 0.0
        for die, busy in enumerate(self.die_busy):
            summary[f"die_busy[{die}]"] = busy / span if span else 0.0
        return summary
