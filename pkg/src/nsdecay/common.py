"""Shared helpers for the nsdecay app."""

from __future__ import annotations

import logging
import os
import sys
from pathlib import Path

_LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
_VERBOSITY_LEVELS = (logging.WARNING, logging.INFO, logging.DEBUG)


def load_dotenv_if_available() -> None:
    """Load NSDECAY_* defaults from the nearest .env when python-dotenv is installed.

    Variables already set in the environment win over the file.
    """
    try:
        from dotenv import find_dotenv, load_dotenv
    except ImportError:
        return
    env_file = find_dotenv(usecwd=True)
    if env_file:
        load_dotenv(env_file, override=False)


def get_version() -> str:
    """Get installed ns-decay-lab version."""
    try:
        from importlib.metadata import version

        return version("ns-decay-lab")
    except Exception:
        return "unknown"


def default_output_dir() -> Path:
    """Output directory from NSDECAY_OUTPUT_DIR, falling back to ./runs."""
    return Path(os.environ.get("NSDECAY_OUTPUT_DIR", "runs"))


def configure_logging(verbosity: int = 0) -> None:
    """Install the single stderr handler used by the CLI.

    An explicit ``-v`` count wins over ``NSDECAY_LOG_LEVEL``.
    """
    if verbosity > 0:
        level = _VERBOSITY_LEVELS[min(verbosity, len(_VERBOSITY_LEVELS) - 1)]
    else:
        name = os.environ.get("NSDECAY_LOG_LEVEL", "WARNING").upper().strip()
        level = logging.getLevelName(name)
        if not isinstance(level, int):
            level = logging.WARNING
    logging.basicConfig(level=level, format=_LOG_FORMAT, stream=sys.stderr, force=True)
