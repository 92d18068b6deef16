"""Upper bounds on facet numbers of Dirichlet stereohedra for the quarter cubic groups."""
from __future__ import annotations

__version__ = "0.1.0"

from .geometry import Isometry, compose, inverse  # noqa: E402
from .catalog import group, groups  # noqa: E402

__all__ = ["Isometry", "compose", "inverse", "group", "groups", "__version__"]
