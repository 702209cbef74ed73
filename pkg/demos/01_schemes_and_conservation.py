"""Building the three closures and checking that they conserve.

Run with ``python3 demos/01_schemes_and_conservation.py``.
"""

import numpy as np

from compact_conserve import (
    assemble_matrices,
    bundled_scheme,
    close_scheme,
    verify_conservation_identities,
    verify_order_conditions,
)
from compact_conserve.analysis import measured_precision

# %% Each closure is fixed by a few free parameters; everything else follows.
for sid in ("P1", "P2", "P3"):
    table = bundled_scheme(sid)
    rebuilt = close_scheme(sid, table.free_params)
    drift = max(abs(rebuilt.all_values()[k] - v) for k, v in table.all_values().items())
    print(f"{sid}: free {list(table.free_params)}  rebuilt vs table {drift:.1e}")

# %% Third-order boundary rows, fourth-order interior.
p3 = bundled_scheme("P3")
report = verify_order_conditions(p3)
print("\nP3 Taylor residuals (largest):", f"{report.max_residual:.2e}")

# %% The weights W and W' turn the scheme into a telescoping sum:
# W'A = W and W'B = [-1, 0, ..., 0, 1].
m = assemble_matrices(p3, 40)
cons = verify_conservation_identities(m)
print(f"W'A - W: {cons.wa_residual:.1e}   W'B - e: {cons.wb_residual:.1e}")
print("W' near the boundary:", np.round(m.wprime_vector[:4], 3))

# any grid function: sum_i w'_i (B f)_i equals f_N - f_0
f = np.random.default_rng(0).standard_normal(41)
print("W'Bf =", m.wprime_vector @ (m.b_matrix @ f), " f_N - f_0 =", f[-1] - f[0])

# %% The induced quadrature rule integrates cubics exactly (not quartics).
for sid in ("P1", "P2", "P3"):
    print(f"{sid} quadrature degree: {measured_precision(bundled_scheme(sid))}")
