import sys

from loguru import logger

LOG_FORMAT = "<green>{time:HH:mm:ss}</green> | <level>{level: <7}</level> | {extra[agent]} | {message}"


def configure_logging(level: str = "INFO") -> None:
    """Replace loguru's default sink with a single stderr sink at `level`."""
    logger.remove()
    logger.configure(extra={"agent": "cpath"})
    logger.add(sys.stderr, level=level.upper(), format=LOG_FORMAT, colorize=None)
