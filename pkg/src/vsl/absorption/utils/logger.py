import logging
import sys
from typing import Union


LOG_FORMAT = '%(asctime)s : %(name)s : %(message)s'


def fn() -> str:
    """Name of the calling function, used as log line prefix."""
    return sys._getframe(1).f_code.co_name


def setup_logger(logger_name, level=logging.INFO) -> logging.Logger:
    logger = logging.getLogger(logger_name)
    logger.setLevel(level)
    # repeated CLI invocations in one process must not stack handlers
    if not any(getattr(h, "_vsl_stream", False) for h in logger.handlers):
        stream_handler = logging.StreamHandler(sys.stderr)
        stream_handler.setFormatter(logging.Formatter(LOG_FORMAT))
        stream_handler._vsl_stream = True
        logger.addHandler(stream_handler)
    return logger


def set_file_logging_handler(logger_or_name: Union[str, logging.Logger], log_file) -> logging.Logger:
    if isinstance(logger_or_name, str):
        logger = logging.getLogger(logger_or_name)
    else:
        logger = logger_or_name
    file_handler = logging.FileHandler(log_file, mode='w')
    file_handler.setFormatter(logging.Formatter(LOG_FORMAT))
    logger.addHandler(file_handler)
    return logger
