import heapq
import logging
from enum import Enum
from typing import Optional, Protocol

from src import metrics
from src.core.errors import InvariantError, OutOfRangeError, UnknownRequestError
from src.firmware.ftl import FlashTranslationLayer, RequestOutcome
from src.models import CompletionRecord, FirmwarePolicy, HostRequest, IoOp, LatencyBreakdown

logger = logging.getLogger(__name__)


class SubmitCode(Enum):
    """Result codes of `HostInterface.submit`."""

    ACCEPTED = "accepted"
    QUEUE_FULL = "queue_full"


class RequestQueue(Protocol):
    """Order in which queued requests are handed to the FTL."""

    def push(self, request: HostRequest) -> None:
        """Queue a request."""

    def pop(self) -> HostRequest:
        """Remove and return the next request to dispatch."""

    def peek(self) -> Optional[HostRequest]:
        """The next request to dispatch, None when empty."""

    def __len__(self) -> int:
        ...


class FcfsQueue:
    """First come, first served: by arrival tick, then request id."""

    def __init__(self):
        self._heap: list[tuple[int, int, HostRequest]] = []

    def push(self, request: HostRequest) -> None:
        """Queue a request."""
        heapq.heappush(self._heap, (request.arrival_tick, request.id, request))

    def pop(self) -> HostRequest:
        """Remove and return the oldest request."""
        return heapq.heappop(self._heap)[2]

    def peek(self) -> Optional[HostRequest]:
        """The oldest request, None when empty."""
        return self._heap[0][2] if self._heap else None

    def __len__(self) -> int:
        return len(self._heap)


SCHEDULERS: dict[str, type] = {
    "fcfs": FcfsQueue,
}


class HostInterface:
    """
    Device-level request queue and latency map table.

    A request occupies a queue slot from `submit` until the clock passes its finish tick. Completion
    records are computed at dispatch but only published once the clock reaches them.
    """

    def __init__(self, policy: FirmwarePolicy, ftl: FlashTranslationLayer):
        self.policy = policy
        self.ftl = ftl
        self.capacity_sectors = ftl.state.logical_pages * ftl.topology.sectors_per_page
        self.queue: RequestQueue = SCHEDULERS[policy.scheduler]()
        self.clock = 0
        self.latency_map: dict[int, CompletionRecord] = {}
        self._in_flight: list[tuple[int, int]] = []
        self._queued: set[int] = set()

    @property
    def occupancy(self) -> int:
        """Requests queued or in flight."""
        return len(self.queue) + len(self._in_flight)

    def submit(self, request: HostRequest) -> SubmitCode:
        """
        Queue a host request.

        Returns QUEUE_FULL when the queue has no free slot; the caller retries later.

        Raises:
            OutOfRangeError: The request reaches beyond the exported capacity.
        """
        if request.n_sector < 1 or request.lba < 0 or request.end_lba > self.capacity_sectors:
            raise OutOfRangeError(
                f"Request {request.id} covers sectors [{request.lba}, {request.end_lba}) "
                f"outside the {self.capacity_sectors} exported sectors."
            )
        if request.arrival_tick < self.clock:
            raise InvariantError(
                f"Request {request.id} arrives at {request.arrival_tick}, before the clock {self.clock}."
            )
        if request.id in self._queued or request.id in self.latency_map:
            raise InvariantError(f"Request id {request.id} was already submitted.")

        if self.occupancy >= self.policy.queue_depth:
            metrics.queue_rejections.inc()
            logger.warning(f"Device queue full ({self.policy.queue_depth}), request {request.id} rejected.")
            return SubmitCode.QUEUE_FULL

        self.queue.push(request)
        self._queued.add(request.id)
        return SubmitCode.ACCEPTED

    def advance(self, tick: int) -> None:
        """Move the clock to `tick`, freeing the slots of requests finished by then."""
        if tick < self.clock:
            raise InvariantError(f"Clock cannot go back from {self.clock} to {tick}.")
        self.clock = tick
        while self._in_flight and self._in_flight[0][0] <= tick:
            heapq.heappop(self._in_flight)
        self.ftl.pal.advance(tick)

    def dispatch(self) -> list[tuple[CompletionRecord, RequestOutcome]]:
        """Hand every queued request that has arrived to the FTL, in queue order."""
        dispatched = []
        while self.queue and self.queue.peek().arrival_tick <= self.clock:
            request = self.queue.pop()
            self._queued.discard(request.id)
            if request.op is IoOp.READ:
                outcome = self.read_transaction(request)
            else:
                outcome = self.write_transaction(request)
            record = self._complete(request, outcome)
            heapq.heappush(self._in_flight, (record.finish_tick, request.id))
            dispatched.append((record, outcome))
        return dispatched

    def read_transaction(self, request: HostRequest) -> RequestOutcome:
        """Forward a read to the FTL."""
        logger.debug(f"Dispatching read {request.id}: LBA {request.lba}, {request.n_sector} sectors")
        return self.ftl.handle(request, self.clock)

    def write_transaction(self, request: HostRequest) -> RequestOutcome:
        """Forward a write to the FTL."""
        logger.debug(f"Dispatching write {request.id}: LBA {request.lba}, {request.n_sector} sectors")
        return self.ftl.handle(request, self.clock)

    def _complete(self, request: HostRequest, outcome: RequestOutcome) -> CompletionRecord:
        device_latency = outcome.finish_tick - request.arrival_tick
        flash = outcome.finish_tick - outcome.last_start
        firmware = min(outcome.background_end, outcome.last_start) - request.arrival_tick
        record = CompletionRecord(
            request_id=request.id,
            op=request.op,
            n_bytes=request.n_bytes,
            arrival_tick=request.arrival_tick,
            finish_tick=outcome.finish_tick,
            device_latency=device_latency,
            breakdown=LatencyBreakdown(queueing=device_latency - firmware - flash, firmware=firmware, flash=flash),
        )
        self.latency_map[request.id] = record
        return record

    def poll_completion(self, request_id: int) -> Optional[CompletionRecord]:
        """
        The completion record of a request, or None while it is pending.

        Records stay available until drained.

        Raises:
            UnknownRequestError: The request was never accepted, or its record was drained.
        """
        record = self.latency_map.get(request_id)
        if record is not None:
            return record if record.finish_tick <= self.clock else None
        if request_id in self._queued:
            return None
        raise UnknownRequestError(request_id)

    def drain(self) -> list[CompletionRecord]:
        """Remove and return every published record, by finish tick then request id."""
        done = sorted(
            (record for record in self.latency_map.values() if record.finish_tick <= self.clock),
            key=lambda record: (record.finish_tick, record.request_id),
        )
        for record in done:
            del self.latency_map[record.request_id]
        return done
