import random
from typing import Iterator, Optional

from src.core.constants import constants
from src.models import SweepSpec, TraceEvent


def request_count(spec: SweepSpec, request_size: int) -> int:
    """Requests issued by one sweep point."""
    return max(1, spec.total_bytes // request_size)


def generate_sweep(spec: SweepSpec, request_size: Optional[int] = None) -> Iterator[TraceEvent]:
    """
    Synthesize the requests of a sweep, point after point (or of the single point `request_size`).

    Sequential points walk the span from LBA 0 and wrap at its end; random points draw size-aligned
    offsets inside the span from an RNG seeded with `spec.seed`, so each point is reproducible on its
    own. Events carry tick 0: sweeps run closed-loop and issue on completions.
    """
    sizes = spec.request_sizes if request_size is None else [request_size]
    sector = constants.units.sector

    for size in sizes:
        size_sectors = size // sector
        slots = spec.span_bytes // size
        rng = random.Random(spec.seed)
        for i in range(request_count(spec, size)):
            slot = rng.randrange(slots) if spec.pattern == "random" else i % slots
            yield TraceEvent(tick=0, op=spec.io_op, lba=slot * size_sectors, n_sector=size_sectors)
