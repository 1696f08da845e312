"""Run logging for fracmin: loguru when installed, stdlib logging otherwise.

Log records go to stderr only; stdout carries the CLI's data output.
"""
import sys
from pathlib import Path
from typing import Optional, Union

STDERR_FORMAT = "{time:HH:mm:ss.SSS} | {level: <7} | {name}:{function} - {message}"
FILE_FORMAT = "{time:YYYY-MM-DD HH:mm:ss.SSS} | {level: <7} | {process} | {name}:{line} - {message}"

try:
    from loguru import logger as _loguru_logger

    class Logger:
        """Thin facade over the loguru singleton"""
        def __init__(self):
            self.logger = _loguru_logger

        def add(self, sink, level: str = "INFO", **kwargs):
            return self.logger.add(sink, level=level, **kwargs)

        def remove(self, handler_id: Optional[int] = None):
            return self.logger.remove(handler_id)

        def debug(self, message: str):
            return self.logger.opt(depth=1).debug(message)

        def info(self, message: str):
            return self.logger.opt(depth=1).info(message)

        def success(self, message: str):
            return self.logger.opt(depth=1).success(message)

        def warning(self, message: str):
            return self.logger.opt(depth=1).warning(message)

        def error(self, message: str):
            return self.logger.opt(depth=1).error(message)

    logger = Logger()
    LOGURU_AVAILABLE = True

except ImportError:
    import logging

    _STD_FORMAT = "%(asctime)s | %(levelname)-7s | %(module)s:%(funcName)s - %(message)s"

    class Logger:
        """Same surface on a 'fracmin' stdlib logger; SUCCESS maps to INFO"""
        def __init__(self):
            self.logger = logging.getLogger("fracmin")
            self.logger.propagate = False
            self.logger.setLevel(logging.DEBUG)

        def add(self, sink, level: str = "INFO", **kwargs):
            """Stream or file sink; loguru-only options (rotation, retention) are ignored"""
            if isinstance(sink, (str, Path)):
                path = Path(str(sink).replace("{time}", "run"))
                try:
                    path.parent.mkdir(parents=True, exist_ok=True)
                    handler = logging.FileHandler(path, encoding="utf-8")
                except OSError:
                    return None
            else:
                handler = logging.StreamHandler(sink)
            handler.setFormatter(logging.Formatter(_STD_FORMAT))
            handler.setLevel(getattr(logging, str(level).upper(), logging.INFO))
            self.logger.addHandler(handler)
            return handler

        def remove(self, handler_id=None):
            for handler in [handler_id] if handler_id is not None else list(self.logger.handlers):
                self.logger.removeHandler(handler)

        def debug(self, message: str):
            return self.logger.debug(message, stacklevel=2)

        def info(self, message: str):
            return self.logger.info(message, stacklevel=2)

        def success(self, message: str):
            return self.logger.info(message, stacklevel=2)

        def warning(self, message: str):
            return self.logger.warning(message, stacklevel=2)

        def error(self, message: str):
            return self.logger.error(message, stacklevel=2)

    logger = Logger()
    logger.add(sys.stderr)
    LOGURU_AVAILABLE = False


def configure_logging(level: str = "INFO", log_file: Optional[Union[str, Path]] = None) -> None:
    """Replace all sinks with stderr at ``level`` and, optionally, a file sink.

    The file sink rotates at 10 MB and keeps 10 days under loguru.
    """
    logger.remove()
    if LOGURU_AVAILABLE:
        logger.add(sys.stderr, level=level, format=STDERR_FORMAT)
        if log_file is not None:
            logger.add(str(log_file), level=level, format=FILE_FORMAT, rotation="10 MB", retention="10 days",
                       enqueue=False)
    else:
        logger.add(sys.stderr, level=level)
        if log_file is not None:
            logger.add(log_file, level=level)
