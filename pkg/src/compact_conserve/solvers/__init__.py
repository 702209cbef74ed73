"""Method-of-lines PDE benchmarks driven by the compact operators."""

from .advection import AdvectionRun, advect_1d, advect_2d_varcoeff
from .conservation import ConservationHistory, conservation_monitor, identity_residual
from .convergence import OrderEstimate, error_and_order
from .euler import (
    GAMMA,
    EulerRun,
    EulerState,
    VortexConfig,
    euler_rhs,
    euler_vortex_2d,
    vortex_state,
    vorticity,
)
from .timestepping import TimeIntegrationConfig, complex_step_time_derivative, rk4_step

__all__ = [
    "AdvectionRun",
    "advect_1d",
    "advect_2d_varcoeff",
    "ConservationHistory",
    "conservation_monitor",
    "identity_residual",
    "OrderEstimate",
    "error_and_order",
    "GAMMA",
    "EulerRun",
    "EulerState",
    "VortexConfig",
    "euler_rhs",
    "euler_vortex_2d",
    "vortex_state",
    "vorticity",
    "TimeIntegrationConfig",
    "complex_step_time_derivative",
    "rk4_step",
]
