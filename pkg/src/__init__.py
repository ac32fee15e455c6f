import logging.handlers
import os
from pathlib import Path

import arrow
import sentry_sdk

from src.core import settings

# Set timestamp of when execution started.
start_time = arrow.utcnow()

# Relative log directories resolve against the project root.
root = Path(__file__).parent.parent

# Console handler prints to terminal.
console_handler = logging.StreamHandler()
console_handler.setLevel(logging.DEBUG if settings.DEBUG else settings.LOG)
handlers: list[logging.Handler] = [console_handler]

# Format configuration.
fmt = "%(asctime)s - %(name)s %(levelname)s: %(message)s"
datefmt = "%H:%M:%S"

# File logging only when a log directory is configured; rotates every 5 MB.
if settings.LOG_DIR:
    log_dir = settings.LOG_DIR if settings.LOG_DIR.is_absolute() else root / settings.LOG_DIR
    os.makedirs(log_dir, exist_ok=True)
    log_file = log_dir / f"{settings.NAME.lower()}_{start_time.format('DD-MM-YYYY')}.log"
    file_handler = logging.handlers.RotatingFileHandler(
        log_file, maxBytes=5 * (2 ** 20), backupCount=10, encoding="utf-8", )
    file_handler.setLevel(logging.DEBUG)
    file_handler.setFormatter(logging.Formatter(fmt=fmt, datefmt=datefmt))
    handlers.append(file_handler)

# Add colors for logging if available.
try:
    from colorlog import ColoredFormatter

    console_handler.setFormatter(
        ColoredFormatter(fmt=f"%(log_color)s{fmt}", datefmt=datefmt)
    )
except ModuleNotFoundError:
    pass

# Remove old loggers, if any.
root_logger = logging.getLogger()
if root_logger.handlers:
    for handler in list(root_logger.handlers):
        root_logger.removeHandler(handler)

# Setup new logging configuration.
logging.basicConfig(format=fmt, datefmt=datefmt, level=logging.DEBUG, handlers=handlers)

if settings.SENTRY_DSN and not settings.DEBUG:
    sentry_sdk.init(
        dsn=settings.SENTRY_DSN,
        release=settings.VERSION,
        environment=settings.ENVIRONMENT if settings.ENVIRONMENT else "local",
    )
