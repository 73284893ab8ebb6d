"""Environment-driven settings and logging setup."""

import logging
import os
from pathlib import Path
from typing import Optional, Union

from .errors import ConfigError

VERSION = "0.1.0"

OUT_ENV = "LIQUIDGAMES_OUT"
LOG_LEVEL_ENV = "LIQUIDGAMES_LOG_LEVEL"

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def default_output_dir() -> Path:
    """Directory used by the CLI when `--out` is not given."""
    return Path(os.environ.get(OUT_ENV, "out"))


def default_log_level() -> str:
    """Log level name used by the CLI when `--log-level` is not given."""
    return os.environ.get(LOG_LEVEL_ENV, "INFO").upper()


def configure_logging(level: Optional[Union[str, int]] = None) -> None:
    """Install a single stream handler on the package logger.

    Library modules only create loggers; this is called once by the CLI.

    Args:
    ----
        level: Level name or number. Falls back to the environment.

    """
    if level is None:
        level = default_log_level()
    if isinstance(level, str):
        level = level.upper()
    logger = logging.getLogger("liquidgames")
    try:
        logger.setLevel(level)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad log level {level!r}") from exc
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
    handler = logging.StreamHandler()
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    logger.addHandler(handler)
    logger.propagate = False
