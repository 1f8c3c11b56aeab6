#!/usr/bin/env python
"""
Logging setup shared by the command-line entry point.
"""

import logging
import sys
from pathlib import Path
from typing import Optional, Union

LOG_FORMAT = "[%(asctime)s] %(levelname)s %(message)s"
LOG_DATEFMT = "%m/%d/%y %H:%M:%S"
LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


def _resolve_level(level: Union[int, str]) -> int:
    if isinstance(level, int):
        return level
    name = level.upper()
    if name not in LEVELS:
        raise ValueError(f"Unknown log level: {level}")
    return getattr(logging, name)


def setup_file_logging(
    logging_level: int, log_file_path: Union[str, Path]
) -> Optional[logging.FileHandler]:
    """
    Attach a file handler to the root logger.

    Args:
        logging_level: Level for the file handler
        log_file_path: Destination file; parent directories are created

    Returns:
        The installed handler, or None if the file could not be opened
    """
    try:
        log_path = Path(log_file_path)
        log_path.parent.mkdir(parents=True, exist_ok=True)

        file_handler = logging.FileHandler(str(log_path))
        file_handler.setLevel(logging_level)
        file_handler.setFormatter(logging.Formatter(LOG_FORMAT, datefmt=LOG_DATEFMT))
        logging.getLogger().addHandler(file_handler)
        logging.info(f"Logging to file: {log_path}")
        return file_handler
    except OSError as e:
        logging.error(f"Failed to set up file logging: {e}")
        return None


def setup_logging(
    level: Union[int, str] = "WARNING",
    log_file_path: Optional[Union[str, Path]] = None,
) -> logging.Logger:
    """
    Configure the root logger with a stderr handler and an optional file handler.

    Calling this again replaces the handlers installed by the previous call.

    Args:
        level: Level name or number
        log_file_path: Optional log file

    Returns:
        The root logger

    Raises:
        ValueError: If the level name is unknown
    """
    logging_level = _resolve_level(level)
    root = logging.getLogger()
    for handler in list(root.handlers):
        if getattr(handler, "_nmk_handler", False):
            root.removeHandler(handler)
            handler.close()

    console = logging.StreamHandler(sys.stderr)
    console.setLevel(logging_level)
    console.setFormatter(logging.Formatter(LOG_FORMAT, datefmt=LOG_DATEFMT))
    console._nmk_handler = True  # type: ignore[attr-defined]
    root.addHandler(console)
    root.setLevel(logging_level)

    if log_file_path:
        file_handler = setup_file_logging(logging_level, log_file_path)
        if file_handler is not None:
            file_handler._nmk_handler = True  # type: ignore[attr-defined]
    return root
