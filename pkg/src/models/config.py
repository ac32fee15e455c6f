import math

from pydantic import Field, root_validator

from src.core.constants import constants
from src.models.geometry import FirmwarePolicy, Section, TimingModel, Topology, total_logical_pages
from src.models.workload import SweepSpec


class SimulationConfig(Section):
    """Every section of a configuration file. Immutable once loaded."""

    topology: Topology = Field(default_factory=Topology, alias="topology")
    timing: TimingModel = Field(default_factory=TimingModel, alias="timing")
    firmware: FirmwarePolicy = Field(default_factory=FirmwarePolicy, alias="firmware")
    workload: SweepSpec = Field(default_factory=SweepSpec, alias="workload")

    @root_validator(skip_on_failure=True)
    def check_sections(cls, values: dict) -> dict:
        """Cross-section invariants."""
        topology: Topology = values["topology"]
        timing: TimingModel = values["timing"]
        firmware: FirmwarePolicy = values["firmware"]

        if timing.n_meta >= topology.n_page:
            raise ValueError(f"timing.n_meta ({timing.n_meta}) must be below topology.pages ({topology.n_page})")

        logical_pages = total_logical_pages(topology, firmware)
        if logical_pages < 1:
            raise ValueError("firmware.op_ratio leaves no exported capacity")

        # Fully valid data fills at most `logical_blocks` blocks, so GC always finds a victim.
        logical_blocks = math.ceil(logical_pages / topology.pages_per_block)
        reserve = max(math.ceil(firmware.gc_threshold * topology.n_block), constants.firmware.min_free_blocks)
        if logical_blocks + reserve > topology.n_block:
            raise ValueError(
                f"firmware.op_ratio: {logical_blocks} logical blocks plus a {reserve}-block GC reserve "
                f"do not fit in {topology.n_block} blocks; the simulator keeps max(ceil(gc_threshold * blocks), "
                f"{constants.firmware.min_free_blocks}) blocks free so GC can always relocate valid pages"
            )
        return values
