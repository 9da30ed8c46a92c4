import logging
import os

logging.basicConfig(level=logging.INFO)

_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(filename)s:%(lineno)d - %(message)s'
_LOG_DIR = os.getenv("XMLTAPE_LOG_DIR", os.path.dirname(os.path.dirname(os.path.abspath(__file__))))


def _file_handler(filename: str, level: int):
    # read-only checkouts still get console logging
    try:
        handler = logging.FileHandler(os.path.join(_LOG_DIR, filename))
    except OSError:
        return None
    handler.setLevel(level)
    handler.setFormatter(logging.Formatter(_FORMAT))
    return handler


logger = logging.getLogger("xmltape")
logger.setLevel(logging.INFO)
file_handler = _file_handler("xmltape.log", logging.INFO)
if file_handler is not None:
    logger.addHandler(file_handler)

# === access_logger ===

access_logger = logging.getLogger("access_logger")
access_logger.setLevel(logging.INFO)
access_file_handler = _file_handler("access.log", logging.INFO)
if access_file_handler is not None:
    access_logger.addHandler(access_file_handler)


def set_log_level(level: str) -> None:
    """
    Set the level of both repository loggers.

    Args:
        level (str): A logging level name such as "DEBUG" or "WARNING".
    """
    numeric = logging.getLevelName(level.upper())
    if not isinstance(numeric, int):
        raise ValueError(f"Unknown log level: {level}")
    logger.setLevel(numeric)
    access_logger.setLevel(numeric)
