import logging
from typing import Optional

from src import metrics
from src.core.constants import constants
from src.core.errors import OutOfRangeError
from src.firmware.timeline import Timeline, timeline_schedule
from src.models import PageType, PhysicalPageAddr, SubOp, SubRequest, TimingModel, Topology, TransactionPhases, \
    TransactionRecord

logger = logging.getLogger(__name__)

# Striping letter -> (address field, topology count).
_STRIPE_FIELDS = {
    "C": ("channel", "n_channel"),
    "W": ("package", "n_package"),
    "D": ("die", "n_die"),
    "P": ("plane", "n_plane"),
}


def ppn_disassemble(ppn: int, topology: Topology) -> PhysicalPageAddr:
    """
    Decompose a PPN into physical coordinates.

    Consecutive PPNs stripe over every plane of the device first (in `topology.order`, first letter
    fastest, channel-first by default), then advance the page, then the block.
    """
    if not 0 <= ppn < topology.total_pages:
        raise OutOfRangeError(f"PPN {ppn} is outside the {topology.total_pages} physical pages")

    unit, rest = ppn % topology.n_units, ppn // topology.n_units
    page, block = rest % topology.n_page, rest // topology.n_page

    coords = {}
    for letter in topology.order:
        field, count = _STRIPE_FIELDS[letter]
        radix = getattr(topology, count)
        coords[field] = unit % radix
        unit //= radix
    return PhysicalPageAddr(block=block, page=page, **coords)


def ppn_assemble(addr: PhysicalPageAddr, topology: Topology) -> int:
    """Inverse of `ppn_disassemble`."""
    unit, scale = 0, 1
    for letter in topology.order:
        field, count = _STRIPE_FIELDS[letter]
        radix = getattr(topology, count)
        index = getattr(addr, field)
        if not 0 <= index < radix:
            raise OutOfRangeError(f"{field} {index} is outside 0..{radix - 1}")
        unit += index * scale
        scale *= radix
    if not (0 <= addr.page < topology.n_page and 0 <= addr.block < topology.n_block):
        raise OutOfRangeError(f"page {addr.page} / block {addr.block} outside the topology")
    return (addr.block * topology.n_page + addr.page) * topology.n_units + unit


def classify_page(page_index: int, timing: TimingModel, topology: Topology) -> PageType:
    """
    Latency class of a page from its index inside the block.

    The first pages of a block are meta pages with LSB (then CSB) timing. The rest follow
    f = ((page - n_meta) // n_plane) mod n_state, where 0 is LSB, n_state - 1 is MSB and anything else CSB.
    """
    if not 0 <= page_index < topology.n_page:
        raise OutOfRangeError(f"page {page_index} is outside 0..{topology.n_page - 1}")

    n_meta = timing.n_meta
    if page_index < min(constants.timing.meta_lsb_pages, n_meta):
        return PageType.META_LSB
    if page_index < n_meta:
        return PageType.META_CSB

    f = ((page_index - n_meta) // topology.n_plane) % timing.n_state
    if f == 0:
        return PageType.LSB
    if f == timing.n_state - 1:
        return PageType.MSB
    return PageType.CSB


def transaction_latency(
    op: SubOp, page_type: Optional[PageType], timing: TimingModel, topology: Topology
) -> TransactionPhases:
    """Command, bus and cell durations of one transaction. Meta pages use the timings of their base type."""
    if op is SubOp.ERASE:
        return TransactionPhases(t_cmd=timing.t_cmd, t_bus=0, t_cell=timing.t_erase)
    if op.is_read:
        return TransactionPhases(t_cmd=timing.t_cmd, t_bus=topology.t_bus, t_cell=timing.read_latency(page_type))
    return TransactionPhases(t_cmd=timing.t_cmd, t_bus=topology.t_bus, t_cell=timing.prog_latency(page_type))


class ParallelismLayer:
    """Maps translated sub-requests onto channels and dies and times them on the shared timeline."""

    def __init__(self, topology: Topology, timing: TimingModel):
        self.topology = topology
        self.timing = timing
        self.timeline = Timeline(topology)
        self.page_types = [classify_page(page, timing, topology) for page in range(topology.n_page)]
        self._phases: dict[tuple[SubOp, Optional[PageType]], TransactionPhases] = {}

    def phases(self, op: SubOp, page_type: Optional[PageType]) -> TransactionPhases:
        key = (op, page_type)
        if key not in self._phases:
            self._phases[key] = transaction_latency(op, page_type, self.timing, self.topology)
        return self._phases[key]

    def schedule(self, sub: SubRequest) -> list[TransactionRecord]:
        """
        Time a translated sub-request from its issue tick and set its finish tick.

        An erase covers a whole FTL block, so it becomes one erase transaction per plane of the stripe.
        """
        if sub.ppn is None:
            raise ValueError(f"sub-request {sub.id} was not translated")

        if sub.op is SubOp.ERASE:
            first = sub.ppn - sub.ppn % self.topology.pages_per_block
            ppns = range(first, first + self.topology.n_units)
        else:
            ppns = (sub.ppn,)

        records = []
        for ppn in ppns:
            addr = ppn_disassemble(ppn, self.topology)
            page_type = None if sub.op is SubOp.ERASE else self.page_types[addr.page]
            records.append(timeline_schedule(sub, addr, self.phases(sub.op, page_type), self.timeline, page_type))

        sub.finish_tick = max(record.finish_tick for record in records)
        metrics.flash_transactions.labels(sub.op.value).inc(len(records))
        return records

    def advance(self, now: int) -> None:
        """Move the clock forward; nothing can be scheduled before `now` afterwards."""
        self.timeline.advance(now)
