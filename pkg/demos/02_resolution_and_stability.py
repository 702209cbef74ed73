"""Fourier resolution of the boundary rows and the spectrum of the semi-discrete operator.

Run with ``python3 demos/02_resolution_and_stability.py``.
"""

import numpy as np

from compact_conserve import average_resolution, bundled_scheme, modified_wavenumber, stability_spectrum
from compact_conserve.analysis import omega_grid

# %% Modified wavenumber of the interior stencil vs the first boundary row of P3.
p3 = bundled_scheme("P3")
for w in (0.25, 0.5, 1.0, 1.5, 2.0):
    inner = modified_wavenumber(p3, "interior", w)
    edge = modified_wavenumber(p3, 0, w)
    print(f"omega {w:4.2f}  interior {inner.real:7.4f}   x0 {edge.real:7.4f} {edge.imag:+8.4f}i")

# %% Critical frequencies: the first grid point where the relative error
# reaches sigma_i (0.003, 0.002, 0.001 for rows 0, 1, 2).
for sid in ("P1", "P2", "P3"):
    rep = average_resolution(bundled_scheme(sid))
    nodes = "  ".join(
        f"x{n.node_index}: R {n.critical.omega_r:.2f} I {n.critical.omega_i:.2f}" for n in rep.per_node
    )
    print(f"{sid}  omega_f = {rep.omega_f:.4f}   {nodes}")

print(f"(grid: {omega_grid().size} points, delta = 0.01)")

# %% Stability: with the inflow node removed, every eigenvalue of -A^{-1}B
# sits in the left half plane.
for sid in ("P1", "P2", "P3"):
    worst = [stability_spectrum(bundled_scheme(sid), n).max_real_part for n in (50, 100, 200)]
    print(f"{sid}  max Re(lambda) at n = 50, 100, 200:", np.array2string(np.array(worst), precision=2))
