"""Bounds and checks for percolation of shielded vertices on Z^d."""

from .bounds import (PC_BOND, bound_report, pshield_lower_bound, table1, table2,
                     theorem2_check, upper_bound_pshield)
from .collision import collision_bounds
from .errors import ConvergenceError, DomainError, ResourceLimitError

__version__ = "0.1.0"

__all__ = [
    "PC_BOND", "bound_report", "collision_bounds", "pshield_lower_bound", "table1",
    "table2", "theorem2_check", "upper_bound_pshield",
    "ConvergenceError", "DomainError", "ResourceLimitError",
]
