import logging
import os
from pathlib import Path
from typing import Optional

import toml
from pydantic import BaseSettings, ValidationError, validator

from src.core.errors import ConfigParseError, ConfigValidationError
from src.models import SimulationConfig, total_logical_pages  # noqa: F401

logger = logging.getLogger(__name__)


class Settings(BaseSettings):
    """The process settings. Simulation parameters live in the configuration file instead."""

    NAME: str = "ssdsim"
    ENVIRONMENT: str = "development"
    LOG: str | int = "INFO"
    LOG_DIR: Optional[Path] = None
    SENTRY_DSN: str | None = None
    DEBUG: bool = False
    VERSION: str = "unknown"

    @validator("LOG")
    def check_log_level(cls, v: str | int) -> str | int:
        """Accept logging level names in any case, or numeric levels."""
        if isinstance(v, int) or str(v).isdigit():
            return int(v)
        level = str(v).upper()
        if not isinstance(logging.getLevelName(level), int):
            raise ValueError(f"Unknown log level {v!r}.")
        return level

    class Config:
        """The Pydantic settings configuration."""

        env_file = ".env"
        env_prefix = "SIMPLE_SSD_"


def load_settings(env_file: str | None = None) -> Settings:
    return Settings(_env_file=env_file)


def load_config(path: str | Path | None) -> SimulationConfig:
    """
    Load and validate a configuration file.

    Missing keys and sections take their documented defaults; `None` loads the defaults alone.

    Raises:
        ConfigParseError: The file cannot be read or is not valid TOML.
        ConfigValidationError: A value violates an invariant; the error names the offending key.
    """
    if path is None:
        return parse_config({})

    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigParseError(f"Cannot read configuration {path}: {exc.strerror}") from exc

    try:
        raw = toml.loads(text)
    except toml.TomlDecodeError as exc:
        raise ConfigParseError(f"Malformed configuration {path}: {exc}") from exc

    config = parse_config(raw)
    logger.info(f"Loaded configuration from {path}")
    return config


def parse_config(raw: dict) -> SimulationConfig:
    """Validate an already decoded configuration mapping."""
    try:
        config = SimulationConfig.parse_obj(raw)
    except ValidationError as exc:
        error = exc.errors()[0]
        key = ".".join(str(part) for part in error["loc"] if part != "__root__") or "config"
        raise ConfigValidationError(key, error["msg"]) from exc

    _check_policies(config)
    return config


def _check_policies(config: SimulationConfig) -> None:
    from src.firmware.gc import GC_POLICIES, WEAR_LEVELING_POLICIES
    from src.firmware.hil import SCHEDULERS

    for key, name, registry in (
        ("firmware.gc_policy", config.firmware.gc_policy, GC_POLICIES),
        ("firmware.wear_leveling", config.firmware.wear_leveling, WEAR_LEVELING_POLICIES),
        ("firmware.scheduler", config.firmware.scheduler, SCHEDULERS),
    ):
        if name not in registry:
            raise ConfigValidationError(key, f"unknown policy {name!r}, expected one of {sorted(registry)}")


def dump_config(config: SimulationConfig) -> str:
    """Serialise a configuration with its file keys; loading the result yields an equal configuration."""
    return toml.dumps(config.dict(by_alias=True, exclude_none=True))


settings = load_settings(os.environ.get("SIMPLE_SSD_ENV_FILE", ".env"))
