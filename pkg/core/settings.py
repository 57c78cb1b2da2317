"""
Settings Module

Environment-driven configuration and logging setup.

Recognised variables (read from the process environment or a ``.env`` file):

    NNTS_THREADS     worker-count hint for bootstrap and simulation loops
    NNTS_LOG_LEVEL   default log level for the command-line interface
"""

import os
import sys

from dotenv import load_dotenv
from loguru import logger

load_dotenv()

DEFAULT_THREADS = 1
DEFAULT_LOG_LEVEL = "INFO"

LOG_FORMAT = (
    "<green>{time:YYYY-MM-DD HH:mm:ss}</green> | <level>{level: <8}</level> | "
    "<cyan>{name}</cyan> - <level>{message}</level>"
)


def worker_count() -> int:
    """
    Number of worker threads requested through NNTS_THREADS.

    Returns:
        Positive worker count (1 when unset or invalid)
    """
    raw = os.getenv("NNTS_THREADS")
    if raw is None or raw.strip() == "":
        return DEFAULT_THREADS

    try:
        threads = int(raw)
    except ValueError:
        logger.warning(f"Ignoring non-integer NNTS_THREADS={raw!r}")
        return DEFAULT_THREADS

    if threads < 1:
        logger.warning(f"Ignoring NNTS_THREADS={threads}; must be at least 1")
        return DEFAULT_THREADS
    return threads


def default_log_level() -> str:
    """Log level from NNTS_LOG_LEVEL, falling back to INFO."""
    return os.getenv("NNTS_LOG_LEVEL", DEFAULT_LOG_LEVEL).upper()


def configure_logging(level: str = None):
    """
    Install a single stderr sink at the given level.

    Args:
        level: Loguru level name (default: NNTS_LOG_LEVEL or INFO)
    """
    logger.remove()
    logger.add(sys.stderr, level=(level or default_log_level()).upper(), format=LOG_FORMAT)
