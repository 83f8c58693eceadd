"""Chain-level detection of generic and dense distributional chaos on
finite discretizations of dynamical systems."""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .symbolic import SymbolicPoint, SkewState, format_point, parse_point, shift, sym_distance  # noqa: E402
from .system import FiniteSystem, make_finite_system, discretize_interval_map, discretize_subshift  # noqa: E402
