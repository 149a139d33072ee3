import logging
import sys
from typing import Dict

LOG_FORMAT = "%(asctime)s - %(levelname)s - %(module)s - %(message)s"

RESET = "\x1b[0m"
# ERROR and CRITICAL records are colored as a whole, others only on the
# level name
LEVEL_COLORS: Dict[int, str] = {
    logging.DEBUG: "\x1b[34m",
    logging.INFO: "\x1b[32m",
    logging.WARNING: "\x1b[33;20m",
    logging.ERROR: "\x1b[31;20m",
    logging.CRITICAL: "\x1b[31;1m",
}


def _colored_fmt(level: int) -> str:
    color = LEVEL_COLORS[level]
    if level >= logging.ERROR:
        return f"{color}{LOG_FORMAT}{RESET}"
    return LOG_FORMAT.replace("%(levelname)s", f"{color}%(levelname)s{RESET}")


class DotMatFormatter(logging.Formatter):
    """Tags every record with the module that emitted it (parsers, trainer,
    grid, ...). Colors are only used on terminal streams so that log files
    stay plain text"""

    def __init__(self, colored: bool = True) -> None:
        super().__init__(LOG_FORMAT)
        self.colored = colored
        self._by_level: Dict[int, logging.Formatter] = (
            {lvl: logging.Formatter(_colored_fmt(lvl)) for lvl in LEVEL_COLORS}
            if colored
            else {}
        )

    def format(self, record: logging.LogRecord) -> str:
        formatter = self._by_level.get(record.levelno)
        if formatter is None:
            return super().format(record)
        return formatter.format(record)


handler: logging.Handler = logging.StreamHandler(sys.stderr)
logger = logging.getLogger("dotmat")
logger.setLevel(logging.DEBUG)
logger.propagate = False  # Keep pandas/numpy warnings out of our stream


def init_logging(f: str = "stdout", level: int = logging.INFO) -> None:
    """Initialize dotmat's logger, replacing any previous handler

    :param f: file where to write the logs. If 'stdout' or 'stderr', logs
    are written to the corresponding standard stream
    :param level: threshold of the handler
    """
    global handler
    logger.handlers = []
    logger.setLevel(logging.DEBUG)
    if f in ("stdout", "stderr"):
        handler = logging.StreamHandler(getattr(sys, f))
        handler.setFormatter(DotMatFormatter(colored=True))
    else:
        handler = logging.FileHandler(f)
        handler.setFormatter(DotMatFormatter(colored=False))
    handler.setLevel(level)
    logger.addHandler(handler)


def disable_logging() -> None:
    """Disable dotmat's logger"""
    logger.handlers = []
    logger.setLevel(logging.CRITICAL)
