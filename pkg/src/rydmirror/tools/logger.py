"""
Module: tools.logger
--------------------
Module loggers and the CLI logging setup.

Functions
---------
- `get_logger`:
    Returns the package-scoped logger for a module
- `configure_logging`:
    Sets level and format for the whole package, once per process
"""

import logging

from beartype.typing import Optional

_PACKAGE = "rydmirror"
_FORMAT = "%(asctime)s %(levelname)-7s %(name)s: %(message)s"


def get_logger(name: str) -> logging.Logger:
    """
    Description
    -----------
    Return a logger that lives under the package namespace, so a single
    `configure_logging` call controls every module.

    Parameters
    ----------
    - `name` (str):
        Usually `__name__` of the calling module

    Returns
    -------
    - `logger` (logging.Logger):
        The module logger
    """
    if not name.startswith(_PACKAGE):
        name = f"{_PACKAGE}.{name}"
    return logging.getLogger(name)


def configure_logging(level: str = "INFO", logfile: Optional[str] = None) -> None:
    """
    Description
    -----------
    Configure the package logger hierarchy. Handlers go to stderr and,
    optionally, to a log file next to the results.

    Parameters
    ----------
    - `level` (str):
        Logging level name. Default is "INFO".
    - `logfile` (str, optional):
        Path of an additional log file
    """
    numeric = logging.getLevelName(level.upper())
    if not isinstance(numeric, int):
        raise ValueError(f"Unknown log level: {level}")
    handlers: list[logging.Handler] = [logging.StreamHandler()]
    if logfile is not None:
        handlers.append(logging.FileHandler(logfile))
    logging.basicConfig(level=numeric, format=_FORMAT, handlers=handlers, force=True)
    logging.getLogger(_PACKAGE).setLevel(numeric)
