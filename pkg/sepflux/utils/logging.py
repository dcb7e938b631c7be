"""
Logging setup for the command-line entry points.

Library modules only create module-level loggers; handlers are installed
once here, with the same console handler and formatter as the migration
environment's alembic.ini.
"""

import logging.config

GENERIC_FORMAT = "%(levelname)-5.5s [%(name)s] %(message)s"
DATE_FORMAT = "%H:%M:%S"


def _level(verbosity: int) -> str:
    if verbosity >= 2:
        return "DEBUG"
    if verbosity == 1:
        return "INFO"
    return "WARNING"


def logging_config(verbosity: int = 0) -> dict:
    return {
        "version": 1,
        "disable_existing_loggers": False,
        "formatters": {
            "generic": {"format": GENERIC_FORMAT, "datefmt": DATE_FORMAT},
        },
        "handlers": {
            "console": {
                "class": "logging.StreamHandler",
                "stream": "ext://sys.stderr",
                "formatter": "generic",
                "level": "NOTSET",
            },
        },
        "loggers": {
            "sepflux": {"level": _level(verbosity), "handlers": ["console"], "propagate": False},
            "sqlalchemy.engine": {"level": "WARNING"},
            "alembic": {"level": "INFO"},
            "numba": {"level": "WARNING"},
        },
        "root": {"level": "WARNING", "handlers": ["console"]},
    }


def configure_logging(verbosity: int = 0) -> None:
    """Install the console handler; 0 = warnings, 1 = info, 2+ = debug."""
    logging.config.dictConfig(logging_config(verbosity))
