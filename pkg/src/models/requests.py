from dataclasses import dataclass
from enum import Enum
from typing import Optional

from src.core.constants import constants
from src.models.geometry import PageType


class IoOp(Enum):
    READ = "R"
    WRITE = "W"


class SubOp(Enum):
    """Page-granularity flash work generated by the FTL."""

    READ = "Read"
    WRITE = "Write"
    GC_READ = "GcRead"
    GC_WRITE = "GcWrite"
    ERASE = "Erase"

    @property
    def is_read(self) -> bool:
        return self in (SubOp.READ, SubOp.GC_READ)

    @property
    def is_write(self) -> bool:
        return self in (SubOp.WRITE, SubOp.GC_WRITE)

    @property
    def is_gc(self) -> bool:
        return self in (SubOp.GC_READ, SubOp.GC_WRITE, SubOp.ERASE)


@dataclass(slots=True)
class HostRequest:
    """
    A host-issued read or write.

    Attributes:
        id (int): Unique request id.
        op (IoOp): Read or write.
        lba (int): First 512-byte sector.
        n_sector (int): Sector count.
        arrival_tick (int): Arrival time in ns.
    """

    id: int
    op: IoOp
    lba: int
    n_sector: int
    arrival_tick: int

    @property
    def n_bytes(self) -> int:
        return self.n_sector * constants.units.sector

    @property
    def end_lba(self) -> int:
        return self.lba + self.n_sector


@dataclass(slots=True)
class SubRequest:
    """One page of flash work. `ppn` is filled in by address translation."""

    id: int
    parent_id: Optional[int]
    op: SubOp
    lpn: Optional[int]
    ppn: Optional[int] = None
    issue_tick: int = 0
    finish_tick: int = 0
    token: int = 0


@dataclass(frozen=True, slots=True)
class LatencyBreakdown:
    """Where a request spent its device time, in ns. The three parts sum to the device latency."""

    queueing: int
    firmware: int
    flash: int


@dataclass(frozen=True, slots=True)
class CompletionRecord:
    request_id: int
    op: IoOp
    n_bytes: int
    arrival_tick: int
    finish_tick: int
    device_latency: int
    breakdown: LatencyBreakdown


@dataclass(frozen=True, slots=True)
class PhysicalPageAddr:
    channel: int
    package: int
    die: int
    plane: int
    block: int
    page: int


@dataclass(frozen=True, slots=True)
class TransactionPhases:
    """Durations of the command, bus (DMA) and cell phases of one flash transaction, in ns."""

    t_cmd: int
    t_bus: int
    t_cell: int

    @property
    def total(self) -> int:
        return self.t_cmd + self.t_bus + self.t_cell


@dataclass(frozen=True, slots=True)
class TransactionRecord:
    """
    A scheduled flash transaction.

    `die` is the device-wide die index ((channel * packages + package) * dies + die).
    """

    sub_request_id: int
    op: SubOp
    page_type: Optional[PageType]
    channel: int
    die: int
    start_tick: int
    cell_start: int
    bus_start: int
    finish_tick: int
    phases: TransactionPhases

    @property
    def cell_end(self) -> int:
        return self.cell_start + self.phases.t_cell

    @property
    def bus_end(self) -> int:
        return self.bus_start + self.phases.t_bus
