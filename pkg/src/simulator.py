import heapq
import io
import itertools
import logging
import math
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from typing import Iterable, Optional

from src.core.errors import InvariantError
from src.firmware.ftl import FlashTranslationLayer
from src.firmware.hil import HostInterface, SubmitCode
from src.firmware.pal import ParallelismLayer
from src.helpers.size import format_size
from src.models import HostRequest, IoOp, SimulationConfig, TraceEvent
from src.telemetry.report import TransactionLog
from src.telemetry.stats import StatsCollector
from src.utils.formatters import format_value
from src.workload.sweep import generate_sweep, request_count

logger = logging.getLogger(__name__)

# Completions go first at equal ticks so their queue slots are free for arrivals.
_COMPLETION, _ARRIVAL = 0, 1


class Simulator:
    """
    One simulated SSD driven by a discrete-event loop.

    Requests the device queue rejects wait, in order, and are retried whenever a request completes.
    """

    def __init__(
        self,
        config: SimulationConfig,
        collector: Optional[StatsCollector] = None,
        transaction_log: Optional[TransactionLog] = None,
    ):
        self.config = config
        self.pal = ParallelismLayer(config.topology, config.timing)
        self.ftl = FlashTranslationLayer(config.topology, config.firmware, self.pal)
        self.hil = HostInterface(config.firmware, self.ftl)
        self.collector = collector
        self.transaction_log = transaction_log
        self.completed = 0
        self.rejections = 0
        self._events: list[tuple[int, int, int, Optional[TraceEvent]]] = []
        self._seq = itertools.count()
        self._next_request_id = 0
        self._blocked: deque[TraceEvent] = deque()

    def _push(self, tick: int, kind: int, payload: Optional[TraceEvent] = None) -> None:
        heapq.heappush(self._events, (tick, kind, next(self._seq), payload))

    def _offer(self, event: TraceEvent, tick: int) -> None:
        """Submit at `tick`, or queue behind earlier rejected requests."""
        if self._blocked or not self._submit(event, tick):
            self._blocked.append(event)

    def _submit(self, event: TraceEvent, tick: int) -> bool:
        request = HostRequest(
            id=self._next_request_id, op=event.op, lba=event.lba, n_sector=event.n_sector, arrival_tick=tick
        )
        if self.hil.submit(request) is SubmitCode.QUEUE_FULL:
            self.rejections += 1
            return False

        self._next_request_id += 1
        for record, outcome in self.hil.dispatch():
            self._push(record.finish_tick, _COMPLETION)
            if self.collector is not None:
                for transaction in outcome.transactions:
                    self.collector.accumulate(transaction)
            if self.transaction_log is not None:
                self.transaction_log.write(outcome.transactions)
        return True

    def _retry_blocked(self, tick: int) -> None:
        while self._blocked and self._submit(self._blocked[0], tick):
            self._blocked.popleft()

    def run(self, events: Iterable[TraceEvent], queue_depth: Optional[int] = None) -> int:
        """
        Replay events until every request has completed; returns the number of completions.

        Without `queue_depth` the loop is open: requests arrive at their event ticks. With it the loop
        is closed: `queue_depth` requests are kept outstanding and each completion issues the next one.
        """
        source = iter(events)
        closed = queue_depth is not None
        outstanding = 0

        if closed:
            for event in itertools.islice(source, queue_depth):
                outstanding += 1
                self._offer(event, self.hil.clock)
        else:
            first = next(source, None)
            if first is not None:
                self._push(max(first.tick, self.hil.clock), _ARRIVAL, first)

        while self._events:
            tick, kind, _, event = heapq.heappop(self._events)
            self.hil.advance(tick)

            if kind == _ARRIVAL:
                upcoming = next(source, None)
                if upcoming is not None:
                    self._push(max(upcoming.tick, tick), _ARRIVAL, upcoming)
                self._offer(event, tick)
                continue

            self.completed += 1
            for record in self.hil.drain():
                if self.collector is not None:
                    self.collector.accumulate(record)
            self._retry_blocked(tick)
            if closed:
                outstanding -= 1
                upcoming = next(source, None)
                if upcoming is not None:
                    outstanding += 1
                    self._offer(upcoming, tick)

        if self._blocked:
            raise InvariantError(f"{len(self._blocked)} requests were never accepted.")
        return self.completed

    def precondition(self, n_bytes: int) -> None:
        """Fill the first `n_bytes` of the logical space instantly, outside of any statistics."""
        pages = math.ceil(n_bytes / self.config.topology.page_size)
        self.ftl.precondition(range(min(pages, self.ftl.state.logical_pages)))

    def finish(self) -> None:
        """Hand the firmware counters and the wear snapshot to the collector."""
        if self.collector is not None:
            self.collector.add_counters(asdict(self.ftl.counters))
            self.collector.add_wear(self.ftl.state.snapshot())


@dataclass
class SweepPointResult:
    """Statistics of one isolated sweep point."""

    request_size: int
    collector: StatsCollector
    wear: list[tuple[int, int, int]]
    transactions: Optional[str] = None


def run_sweep_point(config: SimulationConfig, request_size: int, transaction_log: bool = False) -> SweepPointResult:
    """Run one request size of the configured sweep on a fresh device."""
    spec = config.workload
    collector = StatsCollector(config.topology, seed=spec.seed)
    buffer = io.StringIO() if transaction_log else None
    simulator = Simulator(config, collector, TransactionLog(buffer) if buffer is not None else None)

    if spec.io_op is IoOp.READ and spec.precondition:
        if spec.pattern == "sequential":
            touched = min(spec.span_bytes, request_count(spec, request_size) * request_size)
        else:
            touched = spec.span_bytes
        simulator.precondition(touched)

    simulator.run(generate_sweep(spec, request_size), queue_depth=spec.queue_depth)
    simulator.finish()
    logger.info(
        f"Sweep point {spec.op} {format_size(request_size)}: {simulator.completed} requests, "
        f"{format_value(collector.report().rows[0].bandwidth_mbps)} MB/s"
    )
    return SweepPointResult(
        request_size=request_size,
        collector=collector,
        wear=simulator.ftl.state.snapshot(),
        transactions=buffer.getvalue() if buffer is not None else None,
    )


def run_sweep(config: SimulationConfig, jobs: int = 1, transaction_log: bool = False) -> list[SweepPointResult]:
    """Run every sweep point, in parallel worker processes when `jobs` > 1; results keep sweep order."""
    sizes = config.workload.request_sizes
    if jobs <= 1:
        return [run_sweep_point(config, size, transaction_log) for size in sizes]

    with ProcessPoolExecutor(max_workers=jobs) as executor:
        return list(executor.map(
            run_sweep_point, itertools.repeat(config), sizes, itertools.repeat(transaction_log)
        ))
