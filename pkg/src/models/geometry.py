# flake8: noqa: D101
import math
from decimal import Decimal
from enum import Enum
from typing import Literal, Optional

from pydantic import BaseModel, Extra, Field, root_validator, validator

from src.core.constants import constants

STRIPE_LETTERS = "CWDP"


class PageType(Enum):
    """Latency class of a page within a block."""

    LSB = "LSB"
    CSB = "CSB"
    MSB = "MSB"
    META_LSB = "MetaLsb"
    META_CSB = "MetaCsb"

    @property
    def base(self) -> "PageType":
        """The page type whose timings this page uses."""
        if self is PageType.META_LSB:
            return PageType.LSB
        if self is PageType.META_CSB:
            return PageType.CSB
        return self


class Section(BaseModel):
    """Base class of a configuration file section: aliases are the file keys."""

    class Config:
        """The Pydantic model configuration."""

        allow_population_by_field_name = True
        extra = Extra.forbid
        frozen = True


class Topology(Section):
    """
    Physical organisation of the SSD.

    Attributes:
        n_channel (int): Channels (shared data buses).
        n_package (int): Flash packages per channel.
        n_die (int): Dies per package.
        n_plane (int): Planes per die.
        n_block (int): Blocks per plane.
        n_page (int): Pages per block.
        page_size (int): Page size in bytes.
        dma_mhz (int): Bus transfers per microsecond.
        dma_width (int): Bytes moved per bus transfer.
        order (str): PPN striping order, first letter varies fastest
            (C=channel, W=package/way, D=die, P=plane).
    """

    n_channel: int = Field(constants.topology.channels, alias="channels")
    n_package: int = Field(constants.topology.packages, alias="packages")
    n_die: int = Field(constants.topology.dies, alias="dies")
    n_plane: int = Field(constants.topology.planes, alias="planes")
    n_block: int = Field(constants.topology.blocks, alias="blocks")
    n_page: int = Field(constants.topology.pages, alias="pages")
    page_size: int = Field(constants.topology.page_size, alias="page_size")
    dma_mhz: int = Field(constants.topology.dma_mhz, alias="dma_mhz")
    dma_width: int = Field(constants.topology.dma_width, alias="dma_width")
    order: str = Field(constants.topology.order, alias="order")

    @validator("n_channel", "n_package", "n_die", "n_plane", "n_block", "n_page", "dma_mhz", "dma_width")
    def check_count(cls, v: int) -> int:
        """Counts and rates are positive."""
        if v < 1:
            raise ValueError("must be >= 1")
        return v

    @validator("page_size")
    def check_page_size(cls, v: int) -> int:
        """Pages are a power of two of at least one sector."""
        if v < constants.units.sector or v & (v - 1):
            raise ValueError(f"must be a power of two >= {constants.units.sector}")
        return v

    @validator("order")
    def check_order(cls, v: str) -> str:
        """The striping order is a permutation of CWDP."""
        v = v.upper()
        if sorted(v) != sorted(STRIPE_LETTERS):
            raise ValueError(f"must be a permutation of {STRIPE_LETTERS}")
        return v

    @root_validator(skip_on_failure=True)
    def check_ppn_width(cls, values: dict) -> dict:
        """The physical page space fits the PPN width."""
        total = 1
        for key in ("n_channel", "n_package", "n_die", "n_plane", "n_block", "n_page"):
            total *= values[key]
        if total >= 2 ** constants.topology.ppn_bits:
            raise ValueError(f"{total} physical pages exceed the {constants.topology.ppn_bits}-bit PPN width")
        return values

    @property
    def n_units(self) -> int:
        """Planes in the whole device, i.e. the width of one FTL block stripe."""
        return self.n_channel * self.n_package * self.n_die * self.n_plane

    @property
    def n_dies_total(self) -> int:
        return self.n_channel * self.n_package * self.n_die

    @property
    def pages_per_block(self) -> int:
        """Pages in one FTL block (one block index across every plane)."""
        return self.n_page * self.n_units

    @property
    def total_pages(self) -> int:
        return self.pages_per_block * self.n_block

    @property
    def sectors_per_page(self) -> int:
        return self.page_size // constants.units.sector

    @property
    def t_bus(self) -> int:
        """Time to move one page over the channel, in ns."""
        return round(self.page_size * constants.units.ns_per_us / (self.dma_mhz * self.dma_width))


class TimingModel(Section):
    """
    Flash cell timings. Latency keys left out take the defaults of the `n_state` technology preset.

    Attributes:
        n_state (int): Bits per cell (1=SLC, 2=MLC, 3=TLC).
        n_meta (int): Meta pages at the start of every block.
        t_cmd (int): Command and address cycles, in ns.
        t_read_* / t_prog_* (int): Cell read and program time per page type, in ns.
        t_erase (int): Block erase time, in ns.
    """

    n_state: int = Field(3, alias="n_state")
    n_meta: Optional[int] = Field(None, alias="n_meta")
    t_cmd: int = Field(constants.timing.t_cmd, alias="t_cmd_ns")
    t_read_lsb: Optional[int] = Field(None, alias="t_read_lsb_ns")
    t_read_csb: Optional[int] = Field(None, alias="t_read_csb_ns")
    t_read_msb: Optional[int] = Field(None, alias="t_read_msb_ns")
    t_prog_lsb: Optional[int] = Field(None, alias="t_prog_lsb_ns")
    t_prog_csb: Optional[int] = Field(None, alias="t_prog_csb_ns")
    t_prog_msb: Optional[int] = Field(None, alias="t_prog_msb_ns")
    t_erase: Optional[int] = Field(None, alias="t_erase_ns")

    @validator("n_state")
    def check_n_state(cls, v: int) -> int:
        if v not in (1, 2, 3):
            raise ValueError("must be 1 (SLC), 2 (MLC) or 3 (TLC)")
        return v

    @validator("t_cmd", "t_read_lsb", "t_read_csb", "t_read_msb", "t_prog_lsb", "t_prog_csb", "t_prog_msb", "t_erase")
    def check_latency(cls, v: Optional[int]) -> Optional[int]:
        if v is not None and v < 0:
            raise ValueError("latencies cannot be negative")
        return v

    @root_validator(skip_on_failure=True)
    def fill_preset(cls, values: dict) -> dict:
        """Complete the latency table from the technology preset."""
        n_state = values["n_state"]
        preset = constants.timing.preset(n_state)
        names = _PAGE_NAMES[n_state]
        for index, name in enumerate(names):
            if values.get(f"t_read_{name}") is None:
                values[f"t_read_{name}"] = preset.t_read[index]
            if values.get(f"t_prog_{name}") is None:
                values[f"t_prog_{name}"] = preset.t_prog[index]
        if values.get("t_erase") is None:
            values["t_erase"] = preset.t_erase
        if values.get("n_meta") is None:
            values["n_meta"] = preset.n_meta
        if values["n_meta"] < 0:
            raise ValueError("n_meta cannot be negative")
        if n_state < 3 and values["n_meta"] > constants.timing.meta_lsb_pages:
            raise ValueError(
                f"n_meta above {constants.timing.meta_lsb_pages} needs CSB timings, which only TLC (n_state=3) has"
            )
        return values

    @property
    def page_types(self) -> tuple[PageType, ...]:
        """The non-meta page types of this technology, fastest first."""
        return tuple(PageType[name.upper()] for name in _PAGE_NAMES[self.n_state])

    def read_latencies(self) -> tuple[int, ...]:
        """Cell read time of every page type (exactly n_state entries)."""
        return tuple(self.read_latency(page_type) for page_type in self.page_types)

    def prog_latencies(self) -> tuple[int, ...]:
        """Program time of every page type (exactly n_state entries)."""
        return tuple(self.prog_latency(page_type) for page_type in self.page_types)

    def read_latency(self, page_type: PageType) -> int:
        return getattr(self, f"t_read_{page_type.base.value.lower()}")

    def prog_latency(self, page_type: PageType) -> int:
        return getattr(self, f"t_prog_{page_type.base.value.lower()}")


_PAGE_NAMES = {1: ("lsb",), 2: ("lsb", "msb"), 3: ("lsb", "csb", "msb")}


class FirmwarePolicy(Section):
    """
    FTL and HIL policy knobs.

    Attributes:
        op_ratio (float): Fraction of physical pages hidden from the host.
        gc_threshold (float): Free block fraction below which GC runs.
        log_blocks_per_set (int): Blocks a set may hold beyond its data blocks.
        blocks_per_set (int): Logical blocks grouped into one mapping set.
        queue_depth (int): Capacity of the HIL device queue.
    """

    op_ratio: float = Field(constants.firmware.op_ratio, alias="op_ratio")
    gc_threshold: float = Field(constants.firmware.gc_threshold, alias="gc_threshold")
    log_blocks_per_set: int = Field(constants.firmware.log_blocks_per_set, alias="log_blocks_per_set")
    blocks_per_set: int = Field(constants.firmware.blocks_per_set, alias="blocks_per_set")
    queue_depth: int = Field(constants.firmware.queue_depth, alias="queue_depth")
    gc_policy: str = Field(constants.firmware.gc_policy, alias="gc_policy")
    wear_leveling: str = Field(constants.firmware.wear_leveling, alias="wear_leveling")
    scheduler: str = Field(constants.firmware.scheduler, alias="scheduler")
    unmapped_read: Literal["error", "skip"] = Field(constants.firmware.unmapped_read, alias="unmapped_read")

    @validator("op_ratio")
    def check_op_ratio(cls, v: float) -> float:
        if not 0 <= v < 1:
            raise ValueError("must satisfy 0 <= op_ratio < 1")
        return v

    @validator("log_blocks_per_set", "blocks_per_set", "queue_depth")
    def check_positive(cls, v: int) -> int:
        if v < 1:
            raise ValueError("must be >= 1")
        return v

    @validator("gc_threshold")
    def check_gc_threshold(cls, v: float, values: dict) -> float:
        """GC must trigger before the over-provisioned space runs out."""
        op_ratio = values.get("op_ratio")
        if op_ratio is None:
            return v
        if not 0 < v < op_ratio:
            raise ValueError(f"must satisfy 0 < gc_threshold < op_ratio ({op_ratio})")
        return v


def total_logical_pages(topology: Topology, policy: FirmwarePolicy) -> int:
    """Pages exported to the host: floor(total physical pages * (1 - op_ratio)). Bounds the valid LPN range."""
    return math.floor(Decimal(topology.total_pages) * (1 - Decimal(str(policy.op_ratio))))
