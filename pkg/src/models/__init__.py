from src.models.config import SimulationConfig
from src.models.geometry import FirmwarePolicy, PageType, TimingModel, Topology, total_logical_pages
from src.models.manifest import RunManifest
from src.models.requests import (
    CompletionRecord,
    HostRequest,
    IoOp,
    LatencyBreakdown,
    PhysicalPageAddr,
    SubOp,
    SubRequest,
    TransactionPhases,
    TransactionRecord,
)
from src.models.workload import SweepSpec, TraceEvent

__all__ = [
    "CompletionRecord",
    "FirmwarePolicy",
    "HostRequest",
    "IoOp",
    "LatencyBreakdown",
    "PageType",
    "PhysicalPageAddr",
    "RunManifest",
    "SimulationConfig",
    "SubOp",
    "SubRequest",
    "SweepSpec",
    "TimingModel",
    "Topology",
    "TraceEvent",
    "TransactionPhases",
    "TransactionRecord",
    "total_logical_pages",
]
