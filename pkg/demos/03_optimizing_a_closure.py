"""Searching the free parameters for resolution under a stability constraint.

The objective is -omega_f for stable, well-posed schemes and 0 otherwise,
so differential evolution drives it toward high boundary resolution.

Run with ``python3 demos/03_optimizing_a_closure.py``.
"""

import numpy as np

from compact_conserve import DEConfig, OptimizationProblem, bundled_scheme, objective, optimize

# %% The objective over a slice of the P1 family.
problem = OptimizationProblem("P1")
for w0 in np.linspace(0.2, 0.6, 9):
    print(f"w0 = {w0:.3f}  objective = {objective(problem, [w0]):+.3f}")

# published table point, for reference
print("table point:", objective(problem, bundled_scheme("P1").free_params))

# %% A short seeded run; identical seeds give identical trajectories.
result = optimize(OptimizationProblem("P1", seed=7), DEConfig(max_generations=60))
print(f"\nbest w0 = {result.best_params['w0']:.6f}  objective {result.best_objective:.4f}"
      f"  after {result.generations} generations ({result.evaluations} evaluations)")

# %% P2 has three free parameters; a longer run is needed to settle.
result = optimize(OptimizationProblem("P2", seed=1), DEConfig(max_generations=40, workers=4))
print("P2 best:", {k: round(v, 4) for k, v in result.best_params.items()}, f"objective {result.best_objective:.4f}")
