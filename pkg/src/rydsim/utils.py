"""Utility & helper functions."""

from __future__ import annotations

import hashlib
import json
import logging
import os
import subprocess
from functools import lru_cache
from importlib import metadata
from pathlib import Path
from typing import Any, Optional

from dotenv import load_dotenv
from rich.console import Console
from rich.logging import RichHandler

SEED_ENV_VAR = "RYDSIM_SEED"

console = Console(stderr=True)
"""Diagnostics, logs and result tables."""
listing_console = Console()
"""Primary output of listing commands (stdout)."""


def configure_logging(verbosity: int = 0) -> None:
    """Route every ``rydsim`` logger through a rich handler.

    Args:
        verbosity (int): 0 for warnings, 1 for info, 2 or more for debug.
    """
    level = {0: logging.WARNING, 1: logging.INFO}.get(verbosity, logging.DEBUG)
    logger = logging.getLogger("rydsim")
    logger.setLevel(level)
    if not any(isinstance(h, RichHandler) for h in logger.handlers):
        logger.addHandler(
            RichHandler(console=console, show_path=False, rich_tracebacks=True)
        )
    logger.propagate = False


def resolve_seed(explicit: Optional[int], fallback: int) -> int:
    """Pick the run seed: ``--seed`` first, then ``RYDSIM_SEED`` (``.env`` aware), then the fallback."""
    if explicit is not None:
        return int(explicit)
    load_dotenv()
    env = os.environ.get(SEED_ENV_VAR)
    if env not in (None, ""):
        try:
            return int(env)
        except ValueError:
            logging.getLogger(__name__).warning(
                "ignoring non-integer %s=%r", SEED_ENV_VAR, env
            )
    return int(fallback)


def canonical_json(document: Any) -> str:
    """Serialize a JSON document with sorted keys and no whitespace."""
    return json.dumps(document, sort_keys=True, separators=(",", ":"))


def digest(document: Any) -> str:
    """Get the sha256 hex digest of the canonical JSON form of a document."""
    return hashlib.sha256(canonical_json(document).encode()).hexdigest()


@lru_cache(maxsize=1)
def code_version() -> str:
    """Describe the running code: ``git describe`` when inside a checkout, else the package version."""
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty", "--tags"],
            capture_output=True,
            text=True,
            check=True,
            cwd=Path(__file__).resolve().parent,
            timeout=5,
        )
        described = out.stdout.strip()
        if described:
            return described
    except (OSError, subprocess.SubprocessError):
        pass
    try:
        return metadata.version("rydsim")
    except metadata.PackageNotFoundError:
        return "unknown"
