"""
Logging setup. All modules log through ``logging.getLogger(__name__)``;
this module installs a single rich handler for the process.
"""

import logging
from typing import Optional

from rich.console import Console
from rich.logging import RichHandler

_CONFIGURED = False

# Human-readable output (logs, tables) goes to stderr so stdout stays machine-readable.
stderr_console = Console(stderr=True)


def setup_logging(level: Optional[str] = None) -> None:
    """
    Configure the root logger with a RichHandler.

    Args:
        level: Log level name; defaults to the configured ``log_level``
    """
    global _CONFIGURED
    if level is None:
        from src.config import get_settings

        level = get_settings().log_level

    root = logging.getLogger()
    root.setLevel(level.upper())
    if _CONFIGURED:
        return

    handler = RichHandler(console=stderr_console, show_path=False, rich_tracebacks=True)
    handler.setFormatter(logging.Formatter("%(name)s: %(message)s"))
    root.addHandler(handler)
    _CONFIGURED = True
