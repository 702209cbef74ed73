"""Linear advection benchmarks in one and two dimensions.

Inflow nodes carry Dirichlet data.  By default ("derivative" mode) every
Runge-Kutta stage evolves an inflow node with the exact time derivative of
its data and the node is reset to the data at the end of the step; this
keeps the stage values consistent with the data to O(dt^5) and avoids the
order loss caused by overwriting stage values.  ``boundary_mode="stage"``
overwrites the inflow values after every stage instead.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ..operator import apply_along_axis, build_operator
from ..scheme import Grid, SchemeMatrices, assemble_matrices
from ..schemefile import resolve_scheme
from .timestepping import TimeIntegrationConfig, complex_step_time_derivative, rk4_step

__all__ = ["AdvectionRun", "advect_1d", "advect_2d_varcoeff"]

_BOUNDARY_MODES = ("derivative", "stage")


@dataclass
class AdvectionRun:
    scheme_id: str
    n: int
    h: float
    dt: float
    times: np.ndarray
    errors: np.ndarray
    solution: np.ndarray
    matrices: Optional[SchemeMatrices] = None
    # 1D only: h * sum(w_i u_i) per recorded time and RK4-weighted (f_0 - f_N) per step
    mass: Optional[np.ndarray] = None
    flux_avg: Optional[np.ndarray] = None
    snapshots: list = field(default_factory=list)

    @property
    def max_error(self) -> float:
        return float(np.max(self.errors))

    def error_at(self, t: float) -> float:
        """Largest error recorded up to time ``t``."""
        return float(np.max(self.errors[self.times <= t + 1e-12]))


def _check_mode(mode):
    if mode not in _BOUNDARY_MODES:
        raise ValueError(f"boundary_mode must be one of {_BOUNDARY_MODES}, got {mode!r}")


def advect_1d(
    scheme,
    n: int,
    t_final: float = 10.0,
    cfl: float = 0.5,
    *,
    length: float = 2.0 * np.pi,
    profile: Callable = np.sin,
    literal_inflow: bool = False,
    boundary_mode: str = "derivative",
    snapshot_count: int = 20,
) -> AdvectionRun:
    """Solve ``u_t + u_x = 0`` on ``[0, length]`` with ``n`` grid points.

    The exact solution is ``profile(x - t)`` and the inflow datum at ``x = 0``
    is ``profile(-t)``; ``literal_inflow=True`` imposes ``sin(t)`` instead.
    ``dt = cfl * h`` (rounded down to land on ``t_final``).  The L-infinity
    error is recorded after every step.
    """
    _check_mode(boundary_mode)
    scheme = resolve_scheme(scheme)
    grid = Grid(n - 1, length)
    x, h = grid.nodes, grid.spacing
    m = assemble_matrices(scheme, grid)
    op = build_operator(m, h)
    inflow = np.sin if literal_inflow else (lambda t: profile(-t))
    steps, dt = TimeIntegrationConfig(t_final, cfl=cfl).steps(h)
    weights = m.w_vector

    stage_flux = []

    def rhs(u, t):
        du = -op.apply(u)
        stage_flux.append(u[0] - u[-1])
        du[0] = complex_step_time_derivative(inflow, t) if boundary_mode == "derivative" else 0.0
        return du

    def inject(u, t):
        u = u.copy()
        u[0] = inflow(t)
        return u

    constrain = inject if boundary_mode == "stage" else None
    u = profile(x).astype(float)
    times = np.arange(steps + 1) * dt
    errors = np.zeros(steps + 1)
    mass = np.zeros(steps + 1)
    flux_avg = np.zeros(steps)
    mass[0] = h * weights @ u
    errors[0] = np.max(np.abs(u - profile(x)))
    snap_at = set(np.linspace(0, steps, max(snapshot_count, 2)).round().astype(int).tolist())
    snapshots = [(0.0, u.copy())]
    for k in range(steps):
        t = k * dt
        stage_flux.clear()
        u = rk4_step(rhs, u, t, dt, constrain)
        u[0] = inflow(times[k + 1])
        g = stage_flux
        flux_avg[k] = (g[0] + 2 * g[1] + 2 * g[2] + g[3]) / 6.0
        mass[k + 1] = h * weights @ u
        errors[k + 1] = np.max(np.abs(u - profile(x - times[k + 1])))
        if k + 1 in snap_at:
            snapshots.append((float(times[k + 1]), u.copy()))
    return AdvectionRun(
        scheme_id=scheme.scheme_id,
        n=n,
        h=h,
        dt=dt,
        times=times,
        errors=errors,
        solution=u,
        matrices=m,
        mass=mass,
        flux_avg=flux_avg,
        snapshots=snapshots,
    )


def advect_2d_varcoeff(
    scheme,
    n: int,
    dt: float = 0.001,
    t_final: float = 1.0,
    *,
    length: float = np.sqrt(2.0),
    boundary_mode: str = "derivative",
    record_every: int = 1,
) -> AdvectionRun:
    """Solve ``u_t + c_x u_x + c_y u_y = 0`` on ``[0, length]^2`` with ``n`` points per axis.

    ``(c_x, c_y)`` is the gradient of ``psi = |(x, y) + (0.25, 0.25)|`` and
    the exact solution is ``sin(2 pi (psi - t))``; data are imposed on the
    inflow faces ``x = 0`` and ``y = 0``.
    """
    _check_mode(boundary_mode)
    scheme = resolve_scheme(scheme)
    grid = Grid(n - 1, length)
    x, h = grid.nodes, grid.spacing
    m = assemble_matrices(scheme, grid)
    op = build_operator(m, h)
    X, Y = np.meshgrid(x, x)
    psi = np.hypot(X + 0.25, Y + 0.25)
    cx, cy = (X + 0.25) / psi, (Y + 0.25) / psi
    inflow_mask = np.zeros_like(psi, dtype=bool)
    inflow_mask[:, 0] = True
    inflow_mask[0, :] = True
    psi_in = psi[inflow_mask]

    def exact(t):
        return np.sin(2.0 * np.pi * (psi - t))

    def inflow(t):
        return np.sin(2.0 * np.pi * (psi_in - t))

    def rhs(u, t):
        du = -(cx * apply_along_axis(op, op, u, "x") + cy * apply_along_axis(op, op, u, "y"))
        du[inflow_mask] = complex_step_time_derivative(inflow, t) if boundary_mode == "derivative" else 0.0
        return du

    def inject(u, t):
        u = u.copy()
        u[inflow_mask] = inflow(t)
        return u

    constrain = inject if boundary_mode == "stage" else None
    steps, dt = TimeIntegrationConfig(t_final, dt=dt).steps()
    u = exact(0.0)
    times, errors = [0.0], [0.0]
    for k in range(steps):
        t_next = (k + 1) * dt
        u = rk4_step(rhs, u, k * dt, dt, constrain)
        u[inflow_mask] = inflow(t_next)
        if (k + 1) % record_every == 0 or k + 1 == steps:
            times.append(t_next)
            errors.append(float(np.max(np.abs(u - exact(t_next)))))
    return AdvectionRun(
        scheme_id=scheme.scheme_id,
        n=n,
        h=h,
        dt=dt,
        times=np.array(times),
        errors=np.array(errors),
        solution=u,
        matrices=m,
    )
