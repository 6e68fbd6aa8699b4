# core/logger.py

import logging
import os
from typing import Optional

from core.config import settings


def get_surgery_logger(name: str = "surgerykit", component: str = "CORE",
                       log_dir: Optional[str] = None, file_name: Optional[str] = None) -> logging.Logger:
    """Return a component logger writing to the shared log file."""
    logger = logging.getLogger(name)
    logger.setLevel(logging.DEBUG)
    if not logger.handlers:
        log_dir = log_dir or settings.logging.log_dir
        os.makedirs(log_dir, exist_ok=True)
        fh = logging.FileHandler(os.path.join(log_dir, file_name or settings.logging.file_name))
        fh.setFormatter(logging.Formatter(f"%(asctime)s | {component} | %(levelname)s | %(message)s"))
        logger.addHandler(fh)
    return logger
