import logging
import sys
from typing import Optional

from core.config import CONFIG

_configured = False


class _StderrHandler(logging.StreamHandler):
    """Writes to whatever ``sys.stderr`` is at emit time, so swapped streams (click's test runner) are followed."""

    @property
    def stream(self):
        return sys.stderr

    @stream.setter
    def stream(self, value):
        pass


def setup_logging(level: Optional[str] = None) -> None:
    """Attach one stderr handler to the ``exex`` logger; later calls only adjust the level."""
    global _configured
    root = logging.getLogger("exex")
    if not _configured:
        handler = _StderrHandler()
        handler.setFormatter(logging.Formatter(CONFIG.LOGGING.FORMAT))
        root.addHandler(handler)
        _configured = True
    root.setLevel((level or CONFIG.LOGGING.LEVEL).upper())


def get_logger(name: str) -> logging.Logger:
    # everything hangs below "exex" so one handler serves the library and the CLI
    return logging.getLogger(f"exex.{name}")
