"""Simulator exceptions. Every error carries the process exit code of its category."""


class SimulatorError(Exception):
    """Base exception class for the simulator."""

    exit_code = 3


class ConfigError(SimulatorError):
    """The configuration could not be used."""

    exit_code = 1


class ConfigParseError(ConfigError):
    """The configuration file is not valid TOML."""


class UsageError(ConfigError):
    """The command line is invalid."""


class ConfigValidationError(ConfigError):
    """A configuration value violates an invariant."""

    def __init__(self, key: str, reason: str):
        super().__init__(f"{key}: {reason}")
        self.key = key
        self.reason = reason


class WorkloadError(SimulatorError):
    """The workload cannot be replayed."""

    exit_code = 2


class TraceParseError(WorkloadError):
    """A trace line is malformed."""

    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line


class TraceOrderError(TraceParseError):
    """Trace ticks go backwards."""


class OutOfRangeError(WorkloadError):
    """An address lies beyond the exported capacity or the physical page space."""


class UnmappedReadError(WorkloadError):
    """A read targets a logical page that was never written."""

    def __init__(self, lpn: int):
        super().__init__(f"read of unmapped LPN {lpn}")
        self.lpn = lpn


class InvariantError(SimulatorError):
    """Internal state became inconsistent. Always fatal."""

    exit_code = 3


class DeviceFullError(InvariantError):
    """No free block is left to place a write."""


class NoVictimError(InvariantError):
    """GC is required but no block holds an invalid page."""


class EmptyPoolError(InvariantError):
    """Wear-leveling was asked to pick from an empty free pool."""


class UnknownRequestError(InvariantError):
    """A completion was polled for a request the host interface never accepted."""

    def __init__(self, request_id: int):
        super().__init__(f"unknown request {request_id}")
        self.request_id = request_id
