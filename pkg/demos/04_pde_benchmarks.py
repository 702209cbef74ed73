"""Advection and vortex benchmarks with RK4 time stepping.

Run with ``python3 demos/04_pde_benchmarks.py`` (about half a minute).
"""

from compact_conserve.solvers import (
    VortexConfig,
    advect_1d,
    advect_2d_varcoeff,
    conservation_monitor,
    error_and_order,
    euler_vortex_2d,
)

# %% 1D: u_t + u_x = 0 with sin data, fourth-order convergence.
runs = [advect_1d("P2", n, t_final=10.0) for n in (65, 129, 257, 513)]
for r in runs:
    print(f"n = {r.n:4d}  max error {r.max_error:.3e}")
print("order:", round(error_and_order([(r.h, r.max_error) for r in runs]).slope, 3))

# the weighted total changes only through the boundary fluxes
hist = conservation_monitor("P2", runs[1])
print(f"per-step mass balance mismatch {hist.max_step_mismatch:.1e}, identity {hist.max_identity_residual:.1e}")

# %% 2D variable-coefficient advection on [0, sqrt 2]^2.
runs = [advect_2d_varcoeff("P3", n, dt=0.001, t_final=1.0, record_every=100) for n in (21, 41, 61, 81)]
print("\n2D order:", round(error_and_order([(r.h, r.max_error) for r in runs]).slope, 3))

# %% Isentropic vortex in a Mach 1.5 stream.
for n in (30, 60, 90):
    run = euler_vortex_2d("P1", VortexConfig(epsilon=0.1, n_x=n, t_final=2.0))
    print(f"{n} x {n}: max pressure error {run.max_pressure_error:.3e}")
