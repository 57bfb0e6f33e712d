"""Provides loggers for use across the application.
"""

import logging
from pathlib import Path
from typing import Union

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


class LoggerFactory:
    """
    A simple factory for configuring standard loggers.
    """

    @staticmethod
    def get(name: str, level: int=logging.INFO) -> logging.Logger:
        """
        Creates a new logger with the given name and
        level and then attaches a stream handler. Loggers
        requested again by name are given the new level
        but keep their single console handler.

        Parameters:
            name (str): The logger name.

            level (int): The initial level. Defaults
                to 20 ("INFO").

        Returns:
            (`logging.Logger`): The logger.
        """
        # Create logger and set level
        logger = logging.getLogger(name)
        logger.setLevel(level)
        logger.propagate = False

        # Reuse an existing console handler
        consoles = [h for h in logger.handlers if not isinstance(h, logging.FileHandler)]
        if consoles:
            for handler in consoles:
                handler.setLevel(level)
            return logger

        # Create console handler and set level
        ch = logging.StreamHandler()
        ch.setLevel(level)
        ch.setFormatter(logging.Formatter(LOG_FORMAT))

        # Add handler to logger
        logger.addHandler(ch)

        return logger


    @staticmethod
    def attach_file(logger: logging.Logger, fpath: Union[str, Path]) -> logging.FileHandler:
        """
        Mirrors every record of a logger into a file, at
        the logger's current level, until `detach_file`
        is called with the returned handler.

        Parameters:
            logger (`logging.Logger`): The logger.

            fpath (str or `Path`): The log file. Appended
                to when it already exists.

        Returns:
            (`logging.FileHandler`): The new handler.
        """
        fh = logging.FileHandler(fpath, mode="a", encoding="utf-8")
        fh.setLevel(logger.level)
        fh.setFormatter(logging.Formatter(LOG_FORMAT))
        logger.addHandler(fh)
        return fh


    @staticmethod
    def detach_file(logger: logging.Logger, handler: logging.FileHandler) -> None:
        """
        Removes and closes a handler from `attach_file`.
        """
        logger.removeHandler(handler)
        handler.close()
