# flake8: noqa: D101
from dataclasses import dataclass
from typing import Literal

from pydantic import Field, validator

from src.core.constants import constants
from src.helpers.size import validate_size
from src.models.geometry import Section
from src.models.requests import IoOp


@dataclass(frozen=True, slots=True)
class TraceEvent:
    """One trace line: arrival tick (ns), op, first sector and sector count."""

    tick: int
    op: IoOp
    lba: int
    n_sector: int


class SweepSpec(Section):
    """
    A request size sweep. Sizes accept human strings ("8KB", "32MB").

    Attributes:
        pattern (str): "sequential" walks the span from LBA 0, "random" draws size-aligned offsets.
        op (str): "read" or "write".
        request_sizes (list[int]): Request sizes in bytes, one sweep point each.
        total_bytes (int): Bytes issued per sweep point.
        span_bytes (int): Address range the requests fall in.
        queue_depth (int): Outstanding requests of the closed loop.
        seed (int): RNG seed of the random pattern.
        precondition (bool): Write the span before a read sweep point is measured.
    """

    pattern: Literal["sequential", "random"] = Field(constants.workload.pattern, alias="pattern")
    op: Literal["read", "write"] = Field(constants.workload.op, alias="op")
    request_sizes: list[int] = Field(constants.workload.request_sizes, alias="request_sizes")
    total_bytes: int = Field(constants.workload.total_bytes, alias="total_bytes")
    span_bytes: int = Field(constants.workload.span_bytes, alias="span_bytes")
    queue_depth: int = Field(constants.workload.queue_depth, alias="queue_depth")
    seed: int = Field(constants.workload.seed, alias="seed")
    precondition: bool = Field(constants.workload.precondition, alias="precondition")

    @validator("request_sizes", "total_bytes", "span_bytes", pre=True, each_item=True)
    def check_size(cls, v: str | int) -> int:
        """Sizes are positive multiples of a sector."""
        value, reason = validate_size(v, multiple_of=constants.units.sector)
        if reason:
            raise ValueError(reason)
        return value

    @validator("request_sizes")
    def check_not_empty(cls, v: list[int]) -> list[int]:
        if not v:
            raise ValueError("at least one request size is required")
        return v

    @validator("queue_depth")
    def check_queue_depth(cls, v: int) -> int:
        if v < 1:
            raise ValueError("must be >= 1")
        return v

    @validator("span_bytes")
    def check_span(cls, v: int, values: dict) -> int:
        sizes = values.get("request_sizes") or []
        if sizes and v < max(sizes):
            raise ValueError("must cover the largest request size")
        return v

    @property
    def io_op(self) -> IoOp:
        return IoOp.READ if self.op == "read" else IoOp.WRITE
