import logging
import os
from datetime import datetime

from src.utils.config import LOG_LEVEL, LOG_PATH, LOG_TO_FILE


def get_logger(name="hotspots"):
    logger = logging.getLogger(name)
    if logger.handlers:
        return logger

    logger.setLevel(getattr(logging, LOG_LEVEL, logging.INFO))

    formatter = logging.Formatter(
        "%(asctime)s [%(levelname)s] %(name)s: %(message)s"
    )

    # File handler
    if LOG_TO_FILE:
        os.makedirs(LOG_PATH, exist_ok=True)
        logfile = os.path.join(LOG_PATH, datetime.now().strftime("%Y%m%d") + ".log")
        fh = logging.FileHandler(logfile)
        fh.setFormatter(formatter)
        logger.addHandler(fh)

    # Console handler (stderr; stdout carries JSON)
    ch = logging.StreamHandler()
    ch.setFormatter(formatter)
    logger.addHandler(ch)

    logger.propagate = False

    return logger
