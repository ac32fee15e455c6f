import itertools
import logging
from dataclasses import dataclass, field
from typing import Iterator, Optional

from src import metrics
from src.core.constants import constants
from src.core.errors import UnmappedReadError
from src.firmware.gc import GC_POLICIES, WEAR_LEVELING_POLICIES, allocate_block, garbage_collection, merge_set
from src.firmware.mapping import BlockMeta, MappingState
from src.firmware.pal import ParallelismLayer
from src.models import FirmwarePolicy, HostRequest, IoOp, SubOp, SubRequest, Topology, TransactionRecord

logger = logging.getLogger(__name__)


def split_request(request: HostRequest, page_size: int, ids: Optional[Iterator[int]] = None) -> list[SubRequest]:
    """
    Cut a host request into one sub-request per touched logical page.

    A write that covers only part of a page becomes a Read of that page followed by its Write.
    Written pages carry the sub-request id as their data token.
    """
    ids = ids if ids is not None else itertools.count()
    sectors_per_page = page_size // constants.units.sector
    first = request.lba // sectors_per_page
    last = (request.end_lba - 1) // sectors_per_page

    subs = []
    for lpn in range(first, last + 1):
        if request.op is IoOp.READ:
            subs.append(SubRequest(id=next(ids), parent_id=request.id, op=SubOp.READ, lpn=lpn))
            continue

        page_start = lpn * sectors_per_page
        if request.lba > page_start or request.end_lba < page_start + sectors_per_page:
            subs.append(SubRequest(id=next(ids), parent_id=request.id, op=SubOp.READ, lpn=lpn))
        sub_id = next(ids)
        subs.append(SubRequest(id=sub_id, parent_id=request.id, op=SubOp.WRITE, lpn=lpn, token=sub_id))
    return subs


@dataclass(slots=True)
class FtlCounters:
    """Firmware activity since the device was created (or preconditioned)."""

    host_pages_written: int = 0
    gc_pages_moved: int = 0
    gc_invocations: int = 0
    merges: int = 0
    erases: int = 0


@dataclass(slots=True)
class RequestOutcome:
    """
    What serving one host request cost.

    Attributes:
        sub_requests (list[SubRequest]): Host sub-requests that reached flash.
        background (list[SubRequest]): GC and merge work charged to the request.
        transactions (list[TransactionRecord]): Every flash transaction, background ones first.
        finish_tick (int): Finish of the last host sub-request.
        background_end (int): Tick at which the request's own sub-requests could start.
        last_start (int): Start of the last-finishing host transaction.
    """

    sub_requests: list[SubRequest]
    background: list[SubRequest]
    transactions: list[TransactionRecord] = field(default_factory=list)
    finish_tick: int = 0
    background_end: int = 0
    last_start: int = 0


class FlashTranslationLayer:
    """Address translation, GC and wear-leveling over a `MappingState`, timed through the PAL."""

    def __init__(self, topology: Topology, policy: FirmwarePolicy, pal: ParallelismLayer):
        self.topology = topology
        self.policy = policy
        self.pal = pal
        self.state = MappingState(topology, policy)
        self.victim_policy = GC_POLICIES[policy.gc_policy]
        self.select_block = WEAR_LEVELING_POLICIES[policy.wear_leveling]
        self.counters = FtlCounters()
        self.sub_ids = itertools.count()
        self.program_ends: dict[int, int] = {}
        self._background: list[SubRequest] = []

    def ftl_mapping(self, sub: SubRequest) -> Optional[int]:
        """
        Translate one host sub-request.

        Reads return the current PPN. Writes go to the next page of their set's active block; when it is
        full a new block is opened, after a set merge or GC if needed. The generated background work is
        left in `self._background`. Returns None for a skipped read of an unmapped page.
        """
        state = self.state
        if sub.op.is_read:
            ppn = state.lookup(sub.lpn)
            if ppn is None:
                if self.policy.unmapped_read == "error":
                    raise UnmappedReadError(sub.lpn)
                logger.warning(f"Skipping read of unmapped LPN {sub.lpn}.")
                return None
            sub.token = state.token_at(ppn)
            return ppn

        set_id = state.set_of(sub.lpn)
        while not state.has_room(set_id):
            if state.at_cap(set_id):
                self._background.extend(self._count(merge_set(state, set_id, self.sub_ids, self.select_block,
                                                              sub.parent_id)))
                self.counters.merges += 1
            elif state.needs_gc():
                self._background.extend(self._count(self.garbage_collection(sub.parent_id)))
            else:
                allocate_block(state, set_id, self.select_block)

        self.counters.host_pages_written += 1
        return state.program(set_id, sub.lpn, sub.token)

    def garbage_collection(self, parent_id: Optional[int] = None) -> list[SubRequest]:
        """Run GC with the configured policies if the free pool is short."""
        subs = garbage_collection(self.state, self.sub_ids, self.victim_policy, self.select_block, parent_id)
        if subs:
            self.counters.gc_invocations += 1
            metrics.gc_invocations.inc()
        return subs

    def _count(self, subs: list[SubRequest]) -> list[SubRequest]:
        for sub in subs:
            if sub.op is SubOp.GC_WRITE:
                self.counters.gc_pages_moved += 1
            elif sub.op is SubOp.ERASE:
                self.counters.erases += 1
                metrics.block_erases.inc()
        return subs

    def handle(self, request: HostRequest, issue_tick: int) -> RequestOutcome:
        """
        Translate and time a host request dispatched at `issue_tick`.

        Background work triggered while translating runs first, victim after victim; the request's own
        sub-requests issue once it is done. The write of a partial page waits for the read of that page.
        """
        state = self.state
        pages_per_block = self.topology.pages_per_block
        outcome = RequestOutcome(sub_requests=[], background=[], background_end=issue_tick)
        rmw_reads: dict[int, int] = {}

        for sub in split_request(request, self.topology.page_size, self.sub_ids):
            if sub.op is SubOp.READ and request.op is IoOp.WRITE and state.lookup(sub.lpn) is None:
                continue

            self._background = []
            ppn = self.ftl_mapping(sub)
            if self._background:
                outcome.background_end = self._run_background(self._background, outcome.background_end,
                                                              outcome.transactions)
                outcome.background.extend(self._background)
            if ppn is None:
                continue

            sub.ppn = ppn
            block = state.blocks[ppn // pages_per_block]
            if sub.op is SubOp.WRITE:
                sub.issue_tick = max(outcome.background_end, rmw_reads.get(sub.lpn, 0), block.erased_at)
            else:
                sub.issue_tick = max(outcome.background_end, self.program_ends.get(ppn, 0))

            records = self.pal.schedule(sub)
            outcome.transactions.extend(records)
            outcome.sub_requests.append(sub)
            if sub.op is SubOp.WRITE:
                self._programmed(block, ppn, sub.finish_tick)
            else:
                block.read_until = max(block.read_until, sub.finish_tick)
                if request.op is IoOp.WRITE:
                    rmw_reads[sub.lpn] = sub.finish_tick

            last = max(records, key=lambda record: record.finish_tick)
            if last.finish_tick > outcome.finish_tick:
                outcome.finish_tick, outcome.last_start = last.finish_tick, last.start_tick

        if not outcome.sub_requests:
            outcome.finish_tick = outcome.last_start = outcome.background_end
        metrics.host_requests.labels(request.op.value).inc()
        return outcome

    def _run_background(self, subs: list[SubRequest], start: int, transactions: list[TransactionRecord]) -> int:
        """
        Time GC/merge work from `start`; every victim starts once the previous erase finished.

        A relocated page is read after its program finished. An erase waits for every program and every
        read of its block, including host reads reserved earlier that run later.
        """
        blocks, pages_per_block = self.state.blocks, self.topology.pages_per_block
        group_start = group_end = read_finish = start

        for sub in subs:
            block = blocks[sub.ppn // pages_per_block]
            if sub.op is SubOp.GC_READ:
                sub.issue_tick = max(group_start, self.program_ends.get(sub.ppn, 0))
            elif sub.op is SubOp.GC_WRITE:
                sub.issue_tick = max(read_finish, block.erased_at)
            else:
                sub.issue_tick = max(group_end, block.read_until, block.programmed_until)

            transactions.extend(self.pal.schedule(sub))
            group_end = max(group_end, sub.finish_tick)
            if sub.op is SubOp.GC_READ:
                read_finish = sub.finish_tick
                block.read_until = max(block.read_until, sub.finish_tick)
            elif sub.op is SubOp.GC_WRITE:
                self._programmed(block, sub.ppn, sub.finish_tick)
            else:
                block.erased_at = sub.finish_tick
                first = block.id * pages_per_block
                for ppn in range(first, first + pages_per_block):
                    self.program_ends.pop(ppn, None)
                group_start = group_end

        return group_end

    def _programmed(self, block: BlockMeta, ppn: int, finish_tick: int) -> None:
        self.program_ends[ppn] = finish_tick
        block.programmed_until = max(block.programmed_until, finish_tick)

    def precondition(self, lpns: range) -> None:
        """Write pages instantly, without flash timing, and start the counters afresh."""
        for lpn in lpns:
            sub_id = next(self.sub_ids)
            self._background = []
            self.ftl_mapping(SubRequest(id=sub_id, parent_id=None, op=SubOp.WRITE, lpn=lpn, token=sub_id))
        self._background = []
        self.counters = FtlCounters()
        logger.debug(f"Preconditioned {len(lpns)} pages")

    def read_token(self, lpn: int) -> Optional[int]:
        """Token of the current copy of an LPN, None if it was never written."""
        ppn = self.state.lookup(lpn)
        return None if ppn is None else self.state.token_at(ppn)
