"""Paths to the bundled example networks.

See data/PROVENANCE.md for where each file comes from.  Only networks
with public-domain, redistributable edge lists ship with the package.
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path

__all__ = ["karate_paths", "data_dir"]


def data_dir() -> Path:
    return Path(resources.files("prefmix") / "data")


def karate_paths() -> tuple[Path, Path]:
    """(edges, labels) for the Zachary karate club with faction labels."""
    d = data_dir()
    return d / "karate_edges.tsv", d / "karate_labels.tsv"
