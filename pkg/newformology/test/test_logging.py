"""Unit tests for logging module."""

import logging
from pathlib import Path

from newformology import logging as nfy_logging


def test_null_logger() -> None:
    """Test that every logging call on the null logger is discarded."""
    logger = nfy_logging.get_logger(None)
    assert isinstance(logger, nfy_logging.NullLogger)
    assert logger.info("dropped") is None
    assert logger.exception("dropped") is None
    real = logging.getLogger("newformology.test")
    assert nfy_logging.get_logger(real) is real


def test_configure_logging(tmp_path: Path) -> None:
    """Test that repeated configuration replaces handlers and writes the optional file."""
    log_file = tmp_path / "run.log"
    logger = nfy_logging.configure_logging("DEBUG", str(log_file))
    assert len(logger.handlers) == 2
    logger.debug("first message")
    logger = nfy_logging.configure_logging(logging.WARNING)
    assert len(logger.handlers) == 1
    assert logger.level == logging.WARNING
    assert not logger.propagate
    assert "DEBUG newformology: first message" in log_file.read_text(encoding="utf-8")
    nfy_logging.configure_logging()
