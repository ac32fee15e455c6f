from __future__ import annotations

import csv
import io
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Optional

from src.core.config import parse_config
from src.models import SimulationConfig

# 1 channel x 1 package x 1 die x 1 plane, 64 blocks of 16 pages.
SMALL_TOPOLOGY = {
    "channels": 1,
    "packages": 1,
    "dies": 1,
    "planes": 1,
    "blocks": 64,
    "pages": 16,
}


def make_config(
    topology: Optional[dict] = None,
    timing: Optional[dict] = None,
    firmware: Optional[dict] = None,
    workload: Optional[dict] = None,
) -> SimulationConfig:
    """Build a validated configuration from file-style sections; missing keys take their defaults."""
    raw = {
        "topology": {**SMALL_TOPOLOGY, **(topology or {})},
        "timing": timing or {},
        "firmware": firmware or {},
        "workload": workload or {},
    }
    return parse_config(raw)


@dataclass(frozen=True)
class OracleTransaction:
    """A transaction as seen by the brute-force scheduler."""

    op: str  # "read", "write" or "erase"
    channel: int
    die: int
    issue: int
    t_cmd: int
    t_bus: int
    t_cell: int


class BruteForceScheduler:
    """
    Earliest-feasible-start scheduling by exhaustive tick enumeration.

    Every channel and die keeps the set of ticks it is busy for. A transaction tries every start tick
    from its issue tick on and takes the first one whose phases fit.
    """

    def __init__(self):
        self.channels: dict[int, set[int]] = defaultdict(set)
        self.dies: dict[int, set[int]] = defaultdict(set)

    @staticmethod
    def _free(busy: set[int], start: int, end: int) -> bool:
        return not any(tick in busy for tick in range(start, end))

    def schedule(self, txn: OracleTransaction) -> tuple[int, int]:
        """Return (start, finish) and reserve the resources."""
        channel, die = self.channels[txn.channel], self.dies[txn.die]
        start = txn.issue
        while True:
            if txn.op == "read":
                cmd_end = start + txn.t_cmd
                bus = cmd_end + txn.t_cell
                while not self._free(channel, bus, bus + txn.t_bus):
                    bus += 1
                finish = bus + txn.t_bus
                if self._free(channel, start, cmd_end) and self._free(die, start, finish):
                    channel.update(range(start, cmd_end), range(bus, finish))
                    die.update(range(start, finish))
                    return start, finish
            else:
                transfer_end = start + txn.t_cmd + txn.t_bus
                finish = transfer_end + txn.t_cell
                if self._free(channel, start, transfer_end) and self._free(die, start, finish):
                    channel.update(range(start, transfer_end))
                    die.update(range(start, finish))
                    return start, finish
            start += 1


def overlapping(intervals: Iterable[tuple[int, int]]) -> list[tuple[tuple[int, int], tuple[int, int]]]:
    """Pairs of consecutive half-open intervals that overlap, found by a sweep over sorted starts."""
    ordered = sorted((start, end) for start, end in intervals if end > start)
    return [(a, b) for a, b in zip(ordered, ordered[1:]) if b[0] < a[1]]


def read_transaction_log(text: str) -> list[dict[str, str]]:
    """Rows of a transaction log CSV."""
    return list(csv.DictReader(io.StringIO(text)))
