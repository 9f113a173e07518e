"""Locations of the data files bundled with the package."""

from __future__ import annotations

from importlib import resources
from pathlib import Path


def asset_path(*parts: str) -> Path:
    """Return the on-disk path of a bundled data file, e.g. asset_path("rules.tsv")."""
    root = resources.files("greenlex").joinpath("data")
    return Path(str(root.joinpath(*parts)))
