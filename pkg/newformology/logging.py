"""Logging utilities."""

import logging
import sys
from typing import Any

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


class NullLogger(logging.Logger):
    """Dummy logger to allow null routing all logging messages."""

    def __init__(self, name: str = "newformology.null") -> None:
        """Initialize the logger with a default name so it can be created without arguments."""
        super().__init__(name)

    def __getattribute__(self, name: str) -> Any:
        """Null route all attribute requests."""
        if name != "_null_route":
            return self._null_route
        return super().__getattribute__(name)

    def _null_route(self, *args: Any, **kwargs: Any) -> None:
        """Null route any callable action."""


def configure_logging(level: int | str = logging.INFO, log_file: str | None = None) -> logging.Logger:
    """Attach a single stream (and optional file) handler to the package logger.

    Repeated calls replace the previous handlers instead of stacking them.

    Args:
        level: Minimum level to emit.
        log_file: Optional path to also write the log to.

    Returns:
        The configured package logger.
    """
    logger = logging.getLogger("newformology")
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
        handler.close()
    handlers: list[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if log_file:
        handlers.append(logging.FileHandler(log_file, encoding="utf-8"))
    for handler in handlers:
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        logger.addHandler(handler)
    logger.setLevel(level)
    logger.propagate = False
    return logger


def get_logger(logger: logging.Logger | None) -> logging.Logger:
    """Return the logger provided, or a null logger when none is provided."""
    return logger if logger is not None else NullLogger()
