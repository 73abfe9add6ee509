"""Console logging setup."""

import logging

from rich.logging import RichHandler

_CONFIGURED = False


def configure_logging(level: str = "INFO", rich_output: bool = True) -> None:
    """
    Install a single root handler for the toolkit.

    Args:
        level: Logging level name
        rich_output: Use a rich handler instead of a plain stream handler
    """
    global _CONFIGURED

    root = logging.getLogger()
    root.setLevel(level.upper())
    if _CONFIGURED:
        return

    if rich_output:
        handler = RichHandler(rich_tracebacks=True, show_path=False, markup=False)
        handler.setFormatter(logging.Formatter("%(message)s", datefmt="[%X]"))
    else:
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(name)s: %(message)s"))

    root.addHandler(handler)
    _CONFIGURED = True
