import logging
import sys

from tsrl.core.settings import TSRL_LOG_LEVEL

LOG_FORMAT = "%(asctime)s %(levelname)-7s %(name)s: %(message)s"


def configure_logging(level: str | int | None = None) -> logging.Logger:
    """Attach one stream handler to the package logger.

    Safe to call repeatedly; later calls re-point the handler at the current
    stderr and adjust the level.
    """
    root = logging.getLogger("tsrl")
    root.setLevel(level.upper() if isinstance(level, str) else level or TSRL_LOG_LEVEL)
    handler = next((h for h in root.handlers if getattr(h, "_tsrl_handler", False)), None)
    if handler is None:
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        handler._tsrl_handler = True
        root.addHandler(handler)
    else:
        handler.setStream(sys.stderr)
    return root
