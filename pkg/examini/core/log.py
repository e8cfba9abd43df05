"""
Logging setup (loguru sinks)
"""

import sys
from typing import Optional

from loguru import logger

from .config import settings

_FORMAT = "<green>{time:HH:mm:ss.SSS}</green> | <level>{level: <8}</level> | {name}:{line} - {message}"


def configure_logging(level: Optional[str] = None, log_file: Optional[str] = None) -> None:
    """Install the stderr sink and the optional rotating file sink"""
    level = (level or settings.LOG_LEVEL).upper()
    log_file = log_file or settings.LOG_FILE

    logger.remove()
    logger.add(sys.stderr, level=level, format=_FORMAT)
    if log_file:
        logger.add(log_file, level=level, rotation="10 MB", retention=5, enqueue=True)
