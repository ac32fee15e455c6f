import logging
import re

logger = logging.getLogger(__name__)

_SIZE = re.compile(r"(\d+)\s*([a-z]*)", re.IGNORECASE)


def parse_size_str(size: str | int) -> int | None:
    """
    Converts a human size to bytes. Units are binary: 1 KB = 1024 B.

    Example: "8KB" to 8192, "32 MiB" to 33554432, "1g" to 1073741824. Integers pass through unchanged.
    """
    if isinstance(size, int):
        return size

    units = {"": 1, "b": 1}
    units["k"] = units["kb"] = units["kib"] = units["b"] * 1024
    units["m"] = units["mb"] = units["mib"] = units["k"] * 1024
    units["g"] = units["gb"] = units["gib"] = units["m"] * 1024
    units["t"] = units["tb"] = units["tib"] = units["g"] * 1024

    m = _SIZE.fullmatch(size.strip())
    if not m:
        return None
    unit = units.get(m.group(2).lower())
    if unit is None:
        return None
    return int(m.group(1)) * unit


def validate_size(size: str | int, multiple_of: int = 1) -> tuple[int, str]:
    """Validate a size string and convert it to bytes. Returns (0, reason) when invalid."""
    value = parse_size_str(size)
    if value is None:
        return 0, f"Invalid size {size!r}: could not parse."
    if value <= 0:
        return 0, f"Invalid size {size!r}: must be positive."
    if value % multiple_of:
        return 0, f"Invalid size {size!r}: must be a multiple of {multiple_of} bytes."
    return value, ""


def format_size(n_bytes: int) -> str:
    """The shortest exact binary-unit spelling of a byte count (8192 -> '8KB')."""
    for suffix, scale in (("GB", 2 ** 30), ("MB", 2 ** 20), ("KB", 2 ** 10)):
        if n_bytes >= scale and n_bytes % scale == 0:
            return f"{n_bytes // scale}{suffix}"
    return f"{n_bytes}B"
