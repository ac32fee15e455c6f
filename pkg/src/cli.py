import argparse
import logging
import sys
from pathlib import Path
from typing import NoReturn, Optional, Sequence

import sentry_sdk
from pydantic import ValidationError

from src import metrics
from src.core import settings
from src.core.config import dump_config, load_config
from src.core.constants import constants
from src.core.errors import SimulatorError, UsageError
from src.models import RunManifest, SimulationConfig, total_logical_pages
from src.simulator import Simulator, run_sweep
from src.telemetry.report import TransactionLog, render_wear_csv, report, write_reports
from src.telemetry.stats import StatsCollector, StatsReport
from src.utils.formatters import format_value
from src.workload.trace import parse_trace

logger = logging.getLogger(__name__)


class ArgumentParser(argparse.ArgumentParser):
    """Argument parser whose usage errors become `UsageError` (exit code 1)."""

    def error(self, message: str) -> NoReturn:
        """Raise instead of exiting."""
        self.print_usage(sys.stderr)
        raise UsageError(message)


def build_parser() -> ArgumentParser:
    """The command line of the simulator."""
    parser = ArgumentParser(
        prog=settings.NAME,
        description="Deterministic discrete-event SSD simulator (HIL -> FTL -> PAL).",
    )
    parser.add_argument("--config", type=Path, help="TOML configuration file; built-in defaults if omitted.")
    parser.add_argument("--trace", type=Path, help="Trace CSV (tick,op,lba,n_sector) replayed open-loop.")
    parser.add_argument("--sweep", action="store_true", help="Run the request size sweep of the [workload] section.")
    parser.add_argument("--seed", type=int, help="Override workload.seed.")
    parser.add_argument("--out", type=Path, default=Path("out"), help="Directory for the report files.")
    parser.add_argument("--txn-log", action="store_true", help="Also write the per-transaction CSV log.")
    parser.add_argument("--validate", action="store_true", help="Print the effective configuration and exit.")
    parser.add_argument("--jobs", type=int, default=1, help="Worker processes for independent sweep points.")
    parser.add_argument("--format", choices=("csv", "human"), default="human", help="Report printed to stdout.")
    parser.add_argument("--metrics-file", type=Path, help="Write Prometheus counters to this file.")
    return parser


def describe(config: SimulationConfig) -> str:
    """The effective configuration as TOML followed by derived quantities."""
    topology = config.topology
    logical_pages = total_logical_pages(topology, config.firmware)
    # Bytes per ns to MB/s.
    channel_bound = topology.page_size * 1e9 / topology.t_bus / constants.units.bytes_per_mb

    derived = {
        "physical_pages": topology.total_pages,
        "exported_pages": logical_pages,
        "exported_bytes": logical_pages * topology.page_size,
        "t_bus_ns": topology.t_bus,
        "channel_bandwidth_bound_mbps": channel_bound,
        "device_bandwidth_bound_mbps": channel_bound * topology.n_channel,
    }
    lines = [dump_config(config).rstrip(), "", "[derived]"]
    lines.extend(f"{key} = {format_value(value)}" for key, value in derived.items())
    return "\n".join(lines) + "\n"


def validate(config_path: Optional[Path]) -> str:
    """Load a configuration and describe it."""
    return describe(load_config(config_path))


def _run_trace(config: SimulationConfig, manifest: RunManifest) -> StatsCollector:
    collector = StatsCollector(config.topology, seed=config.workload.seed)
    log_stream = (manifest.out / "transactions.csv").open("w", newline="", encoding="utf-8") \
        if manifest.txn_log else None
    try:
        simulator = Simulator(config, collector, TransactionLog(log_stream) if log_stream else None)
        simulator.run(parse_trace(manifest.trace))
        simulator.finish()
    finally:
        if log_stream:
            log_stream.close()

    (manifest.out / "wear.csv").write_text(render_wear_csv(simulator.ftl.state.snapshot()), encoding="utf-8")
    logger.info(f"Trace replayed: {simulator.completed} requests, {simulator.rejections} queue rejections")
    return collector


def _run_sweep(config: SimulationConfig, manifest: RunManifest) -> StatsCollector:
    collector = StatsCollector(config.topology, seed=config.workload.seed)
    for result in run_sweep(config, manifest.jobs, manifest.txn_log):
        collector.merge(result.collector)
        suffix = f"{config.workload.op}_{result.request_size}"
        (manifest.out / f"wear_{suffix}.csv").write_text(render_wear_csv(result.wear), encoding="utf-8")
        if result.transactions is not None:
            (manifest.out / f"transactions_{suffix}.csv").write_text(result.transactions, encoding="utf-8")
    return collector


def run(manifest: RunManifest) -> StatsReport:
    """
    Execute a run: load the configuration, replay the workload and write the report files.

    Raises:
        SimulatorError: Configuration, workload or internal invariant failures.
    """
    config = load_config(manifest.config)
    if manifest.seed is not None:
        config = config.copy(update={"workload": config.workload.copy(update={"seed": manifest.seed})})

    manifest.out.mkdir(parents=True, exist_ok=True)
    if manifest.trace is not None:
        collector = _run_trace(config, manifest)
    else:
        collector = _run_sweep(config, manifest)

    stats = collector.report()
    write_reports(stats, manifest.out)
    return stats


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Entry point; returns the process exit code."""
    try:
        args = build_parser().parse_args(argv)
        if args.validate:
            sys.stdout.write(validate(args.config))
            return 0

        try:
            manifest = RunManifest(
                config=args.config,
                trace=args.trace,
                sweep=args.sweep,
                out=args.out,
                seed=args.seed,
                txn_log=args.txn_log,
                jobs=args.jobs,
                format=args.format,
                metrics_file=args.metrics_file,
            )
        except ValidationError as exc:
            raise UsageError(exc.errors()[0]["msg"]) from exc

        stats = run(manifest)
        sys.stdout.write(report(stats, manifest.format))
        if manifest.metrics_file is not None:
            metrics.write_metrics(str(manifest.metrics_file))
        return 0
    except SimulatorError as exc:
        logger.error(f"{type(exc).__name__}: {exc}")
        return exc.exit_code
    except Exception as exc:
        logger.exception("Unexpected failure")
        sentry_sdk.capture_exception(exc)
        return 3
