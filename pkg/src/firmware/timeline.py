import heapq
from bisect import bisect_right
from typing import Iterator, Optional

from src.models import PageType, PhysicalPageAddr, SubRequest, Topology, TransactionPhases, TransactionRecord


class ResourceCalendar:
    """
    Reservations of one flash resource (a channel or a die) as sorted, disjoint, half-open intervals.

    New reservations go into the first gap that fits, so a transaction issued later may still run
    before one that was reserved further in the future.
    """

    def __init__(self):
        self.starts: list[int] = []
        self.ends: list[int] = []
        self.busy_until = 0

    def __len__(self) -> int:
        return len(self.starts)

    def is_free(self, start: int, end: int) -> bool:
        """Whether no reservation intersects [start, end)."""
        if end <= start:
            return True
        i = bisect_right(self.ends, start)
        return i == len(self.starts) or self.starts[i] >= end

    def earliest_fit(self, after: int, duration: int) -> int:
        """The earliest tick >= `after` at which `duration` free ticks follow."""
        candidate = after
        for i in range(bisect_right(self.ends, after), len(self.starts)):
            if self.starts[i] >= candidate + duration:
                break
            candidate = max(candidate, self.ends[i])
        return candidate

    def ends_after(self, tick: int) -> Iterator[int]:
        """Reservation ends later than `tick`, ascending."""
        return iter(self.ends[bisect_right(self.ends, tick):])

    def reserve(self, start: int, end: int) -> None:
        """Reserve [start, end), coalescing with touching neighbours."""
        if end <= start:
            return
        i = bisect_right(self.ends, start)
        if i < len(self.starts) and self.starts[i] < end:
            raise ValueError(f"[{start}, {end}) overlaps reservation [{self.starts[i]}, {self.ends[i]})")

        if i > 0 and self.ends[i - 1] == start:
            i -= 1
            start = self.starts[i]
            del self.starts[i], self.ends[i]
        if i < len(self.starts) and self.starts[i] == end:
            end = self.ends[i]
            del self.starts[i], self.ends[i]

        self.starts.insert(i, start)
        self.ends.insert(i, end)
        self.busy_until = max(self.busy_until, end)

    def prune(self, before: int) -> None:
        """Forget reservations that ended by `before`; nothing may be scheduled earlier afterwards."""
        i = bisect_right(self.ends, before)
        if i:
            del self.starts[:i], self.ends[:i]


class Timeline:
    """Busy calendars of every channel and every die of the device."""

    def __init__(self, topology: Topology):
        self.topology = topology
        self.channels = [ResourceCalendar() for _ in range(topology.n_channel)]
        self.dies = [ResourceCalendar() for _ in range(topology.n_dies_total)]

    def die_index(self, addr: PhysicalPageAddr) -> int:
        """Device-wide die index of an address."""
        return (addr.channel * self.topology.n_package + addr.package) * self.topology.n_die + addr.die

    @property
    def channel_busy_until(self) -> list[int]:
        return [calendar.busy_until for calendar in self.channels]

    @property
    def die_busy_until(self) -> list[list[list[int]]]:
        """Busy-until ticks indexed [channel][package][die]."""
        n_package, n_die = self.topology.n_package, self.topology.n_die
        return [
            [
                [self.dies[(channel * n_package + package) * n_die + die].busy_until for die in range(n_die)]
                for package in range(n_package)
            ]
            for channel in range(self.topology.n_channel)
        ]

    def advance(self, now: int) -> None:
        for calendar in self.channels:
            calendar.prune(now)
        for calendar in self.dies:
            calendar.prune(now)


def _plan(
    op_is_read: bool, start: int, phases: TransactionPhases, channel: ResourceCalendar, die: ResourceCalendar
) -> Optional[tuple[int, int, int]]:
    """Place a transaction starting at `start`; return (cell_start, bus_start, die_end) or None if it cannot start."""
    t_cmd, t_bus, t_cell = phases.t_cmd, phases.t_bus, phases.t_cell

    if op_is_read:
        # cmd -> cell -> bus. The page register holds the data until the bus is granted.
        if not channel.is_free(start, start + t_cmd):
            return None
        cell_start = start + t_cmd
        bus_start = channel.earliest_fit(cell_start + t_cell, t_bus) if t_bus else cell_start + t_cell
        die_end = bus_start + t_bus
        if not die.is_free(start, die_end):
            return None
        return cell_start, bus_start, die_end

    # cmd -> bus -> cell, with cmd and bus back to back on the channel.
    bus_start = start + t_cmd
    cell_start = bus_start + t_bus
    if not channel.is_free(start, cell_start) or not die.is_free(start, cell_start + t_cell):
        return None
    return cell_start, bus_start, cell_start + t_cell


def timeline_schedule(
    sub: SubRequest,
    addr: PhysicalPageAddr,
    phases: TransactionPhases,
    timeline: Timeline,
    page_type: Optional[PageType] = None,
) -> TransactionRecord:
    """
    Schedule one flash transaction at the earliest tick >= `sub.issue_tick` its channel and die allow.

    The channel carries the command and data phases; the die is held from the command until its last
    phase ends. Cell phases of different dies overlap while their bus phases serialize on the channel.
    """
    channel = timeline.channels[addr.channel]
    die_id = timeline.die_index(addr)
    die = timeline.dies[die_id]
    op_is_read = sub.op.is_read
    issue = sub.issue_tick

    # The earliest feasible start is the issue tick or the end of some reservation.
    candidates = heapq.merge(channel.ends_after(issue), die.ends_after(issue))
    start, plan = issue, _plan(op_is_read, issue, phases, channel, die)
    while plan is None:
        start = next(candidates)
        plan = _plan(op_is_read, start, phases, channel, die)
    cell_start, bus_start, die_end = plan

    if op_is_read:
        channel.reserve(start, start + phases.t_cmd)
        channel.reserve(bus_start, bus_start + phases.t_bus)
    else:
        channel.reserve(start, cell_start)
    die.reserve(start, die_end)

    return TransactionRecord(
        sub_request_id=sub.id,
        op=sub.op,
        page_type=page_type,
        channel=addr.channel,
        die=die_id,
        start_tick=start,
        cell_start=cell_start,
        bus_start=bus_start,
        finish_tick=die_end,
        phases=phases,
    )
