"""Walks in dynamic random conductance environments.

Environments are plain dicts in the config format, e.g.
``{"kind": "dynamical_percolation", "p": 0.5, "mu": 1.0}``.
Reports come back as dicts matching reports.json.
"""

from ._core import *  # noqa: F401,F403
from ._core import ConfigError, Lattice, Trajectory, __version__  # noqa: F401
