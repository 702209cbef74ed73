"""Classical fourth-order Runge-Kutta stepping."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ..errors import NonFiniteState

__all__ = ["TimeIntegrationConfig", "rk4_step", "complex_step_time_derivative"]


@dataclass(frozen=True)
class TimeIntegrationConfig:
    """Step size and horizon; when ``cfl`` is set, ``dt = cfl * h / speed``."""

    t_final: float
    dt: Optional[float] = None
    cfl: Optional[float] = None

    def __post_init__(self):
        if not self.t_final > 0:
            raise ValueError("t_final must be positive")
        if (self.dt is None) == (self.cfl is None):
            raise ValueError("give exactly one of dt and cfl")
        if self.dt is not None and not 0 < self.dt <= self.t_final:
            raise ValueError("need 0 < dt <= t_final")
        if self.cfl is not None and not self.cfl > 0:
            raise ValueError("cfl must be positive")

    def steps(self, h: float = 1.0, speed: float = 1.0):
        """Number of steps and the uniform ``dt`` landing exactly on ``t_final``."""
        dt = self.dt if self.dt is not None else self.cfl * h / speed
        n = max(1, int(np.ceil(self.t_final / dt - 1e-9)))
        return n, self.t_final / n


def rk4_step(rhs: Callable, u, t: float, dt: float, constrain: Optional[Callable] = None):
    """One classical RK4 step of ``du/dt = rhs(u, t)``.

    ``constrain(u, t)``, when given, is applied to every stage state and to
    the result (strong injection of boundary values).
    """
    fix = constrain or (lambda v, _t: v)
    k1 = rhs(u, t)
    k2 = rhs(fix(u + 0.5 * dt * k1, t + 0.5 * dt), t + 0.5 * dt)
    k3 = rhs(fix(u + 0.5 * dt * k2, t + 0.5 * dt), t + 0.5 * dt)
    k4 = rhs(fix(u + dt * k3, t + dt), t + dt)
    out = fix(u + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4), t + dt)
    if not np.all(np.isfinite(out)):
        raise NonFiniteState(f"non-finite state after step to t = {t + dt:.6g}", t=t + dt)
    return out


_CSTEP = 1e-30


def complex_step_time_derivative(func: Callable, t: float):
    """``d func / dt`` at real ``t`` by the complex-step formula (exact to roundoff).

    ``func`` must be written with complex-analytic numpy operations.
    """
    return np.imag(func(t + 1j * _CSTEP)) / _CSTEP
