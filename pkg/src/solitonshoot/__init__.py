"""Shooting and continuation toolkit for cohomogeneity-one steady solitons."""

from .state_core import (  # noqa: F401
    CompactState,
    ConservedReport,
    PrimalState,
    ShootParams,
    conserved_quantities,
    rhs_biaxial_compact,
    rhs_biaxial_primal,
    rhs_compact,
    rhs_primal,
)
from .startup import launch, launch_biaxial, launch_triaxial  # noqa: F401
from .integrator import Trajectory, integrate, continue_trajectory  # noqa: F401

__version__ = "0.1.0"
