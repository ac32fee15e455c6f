# flake8: noqa: D101
from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, root_validator, validator


class RunManifest(BaseModel):
    """
    Everything that determines one simulator run.

    Attributes:
        config (Path | None): Configuration file; None runs the built-in defaults.
        trace (Path | None): Trace to replay.
        sweep (bool): Run the [workload] sweep of the configuration instead of a trace.
        out (Path): Output directory for reports.
        seed (int | None): Overrides workload.seed.
        txn_log (bool): Also write the per-transaction log.
        jobs (int): Worker processes for independent sweep points.
        format (str): Report format printed to stdout.
        metrics_file (Path | None): Prometheus text exposition output.
    """

    config: Optional[Path] = None
    trace: Optional[Path] = None
    sweep: bool = False
    out: Path = Path("out")
    seed: Optional[int] = None
    txn_log: bool = False
    jobs: int = 1
    format: Literal["csv", "human"] = "human"
    metrics_file: Optional[Path] = None

    @validator("jobs")
    def check_jobs(cls, v: int) -> int:
        if v < 1:
            raise ValueError("must be >= 1")
        return v

    @root_validator(skip_on_failure=True)
    def check_single_source(cls, values: dict) -> dict:
        """Exactly one workload source per run."""
        if (values["trace"] is not None) == values["sweep"]:
            raise ValueError("exactly one of --trace or --sweep is required")
        return values
