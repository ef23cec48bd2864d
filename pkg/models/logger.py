"""
logger.py - Provides function to maintain the loci logger to record progress, warnings and errors.
"""

import logging
import sys
from logging.handlers import RotatingFileHandler

from config import LOG_FILE_PATH, LOG_LEVEL_STR

LOGGER_NAME = "loci_logger"


def setup_logger():
    """Set up the logger for the toolkit."""
    logger = logging.getLogger(LOGGER_NAME)

    # Convert string level to logging level constant
    log_level = getattr(logging, LOG_LEVEL_STR, logging.WARNING)

    logger.setLevel(log_level)

    if not logger.handlers:
        formatter = logging.Formatter("[%(asctime)s] %(levelname)s in %(funcName)s: %(message)s")

        handler = RotatingFileHandler(
            LOG_FILE_PATH, maxBytes=1_000_000, backupCount=5, encoding="utf-8"
        )
        handler.setFormatter(formatter)
        logger.addHandler(handler)

        # Reports own stdout; everything the user should see goes to stderr
        console = logging.StreamHandler(sys.stderr)
        console.setFormatter(logging.Formatter("%(levelname)s: %(message)s"))
        console.setLevel(max(log_level, logging.WARNING))
        logger.addHandler(console)

    return logger
