"""Resolution/stability objective and a differential-evolution search.

The objective returns ``-omega_f`` for a feasible parameter set and the
penalty ``0`` for every failure mode (non-positive weights, singular closure,
singular ``A``, unstable reduced spectrum, missing critical frequency), so
minimizing it maximizes the boundary resolution subject to stability.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Sequence

import numpy as np

from .analysis import SIGMAS, average_resolution, reduced_spectrum
from .errors import CompactSchemeError, NoFeasiblePoint
from .scheme import FREE_PARAM_NAMES, SCHEME_IDS, SchemeDefinition, assemble_matrices, close_scheme, derived_weights

__all__ = [
    "PENALTY",
    "OptimizationProblem",
    "DEConfig",
    "OptimizationResult",
    "default_bounds",
    "objective",
    "optimize",
]

log = logging.getLogger(__name__)

PENALTY = 0.0
_OPEN_SHRINK = 1e-9


def default_bounds(scheme_id: str) -> tuple:
    """Search box per free parameter: ``w0`` in (0, 10), the rest in (-10, 10).

    Open intervals are shrunk by 1e-9 to closed boxes.
    """
    out = []
    for name in FREE_PARAM_NAMES[scheme_id]:
        lo = 0.0 if name == "w0" else -10.0
        out.append((lo + _OPEN_SHRINK, 10.0 - _OPEN_SHRINK))
    return tuple(out)


@dataclass(frozen=True)
class OptimizationProblem:
    scheme_id: str
    bounds: Optional[Sequence] = None
    n_for_stability: int = 100
    sigmas: tuple = SIGMAS
    seed: int = 0
    # reproduce Q = D(2:N, 2:N) without the minus sign
    literal_sign: bool = False

    def __post_init__(self):
        if self.scheme_id not in SCHEME_IDS:
            raise ValueError(f"unknown scheme id {self.scheme_id!r}")
        bounds = default_bounds(self.scheme_id) if self.bounds is None else self.bounds
        bounds = tuple((float(lo), float(hi)) for lo, hi in bounds)
        if len(bounds) != len(FREE_PARAM_NAMES[self.scheme_id]):
            raise ValueError(
                f"{self.scheme_id} has {len(FREE_PARAM_NAMES[self.scheme_id])} free parameters, "
                f"got {len(bounds)} bounds"
            )
        if any(lo > hi for lo, hi in bounds):
            raise ValueError("every bound needs lo <= hi")
        object.__setattr__(self, "bounds", bounds)

    @property
    def param_names(self) -> tuple:
        return FREE_PARAM_NAMES[self.scheme_id]

    @property
    def dimension(self) -> int:
        return len(self.param_names)


def objective(problem: OptimizationProblem, free_params) -> float:
    """``-omega_f`` of the closed scheme, or ``0`` if it is infeasible."""
    values = np.asarray(
        [free_params[n] for n in problem.param_names] if isinstance(free_params, Mapping) else free_params,
        dtype=float,
    )
    if not np.all(np.isfinite(values)):
        return PENALTY
    w = derived_weights(values[problem.param_names.index("w0")])
    if min(w.w1, w.w2, w.w3) <= 0:
        return PENALTY
    try:
        scheme = close_scheme(problem.scheme_id, values)
        m = assemble_matrices(scheme, problem.n_for_stability)
        with np.errstate(all="ignore"):
            ev = reduced_spectrum(m.a_matrix, m.b_matrix, negate=not problem.literal_sign)
    except (CompactSchemeError, np.linalg.LinAlgError, ValueError):
        return PENALTY
    if not np.all(np.isfinite(ev)) or np.max(ev.real) > 0:
        return PENALTY
    report = average_resolution(scheme, problem.sigmas)
    if not report.feasible:
        return PENALTY
    return -report.omega_f


@dataclass(frozen=True)
class DEConfig:
    """DE/rand/1/bin settings; ``population_size=None`` means 15 x dimension."""

    population_size: Optional[int] = None
    mutation_factor: tuple = (0.5, 1.0)
    crossover_rate: float = 0.7
    max_generations: int = 500
    tolerance: float = 1e-10
    # None defers to OptimizationProblem.seed
    rng_seed: Optional[int] = None
    workers: int = 1

    def __post_init__(self):
        if self.population_size is not None and self.population_size < 4:
            raise ValueError("DE/rand/1 needs a population of at least 4")
        lo, hi = (
            (self.mutation_factor, self.mutation_factor)
            if np.isscalar(self.mutation_factor)
            else self.mutation_factor
        )
        if not (0 < lo <= hi < 2):
            raise ValueError("mutation factor must lie in (0, 2)")
        if not 0 <= self.crossover_rate <= 1:
            raise ValueError("crossover rate must lie in [0, 1]")
        if self.max_generations < 0:
            raise ValueError("max_generations must be non-negative")


@dataclass
class OptimizationResult:
    best_params: dict
    best_objective: float
    scheme: SchemeDefinition
    generations: int
    history: list = field(default_factory=list)
    evaluations: int = 0


def _evaluate(problem, population, pool):
    if pool is None:
        return np.array([objective(problem, x) for x in population])
    return np.array(list(pool.map(lambda x: objective(problem, x), population)))


def optimize(
    problem: OptimizationProblem,
    config: DEConfig = DEConfig(),
    initial: Optional[Sequence] = None,
    progress: Optional[Callable[[int, float, float], None]] = None,
) -> OptimizationResult:
    """Minimize :func:`objective` over the problem's box with DE/rand/1/bin.

    Each generation draws one mutation factor uniformly from
    ``config.mutation_factor`` (dither), builds ``a + F (b - c)`` from three
    distinct other members, applies binomial crossover with one forced
    component, clips to the box and keeps the trial when it is no worse.
    The run stops after ``max_generations`` or once the standard deviation
    of the population's objective values drops below ``tolerance`` with a
    feasible best member.

    Parameters
    ----------
    initial : sequence of parameter vectors, optional
        Members placed at the start of the random initial population.
    progress : callable, optional
        Called as ``progress(generation, best_objective, spread)``.

    Raises
    ------
    NoFeasiblePoint
        If no evaluated member ever beat the penalty value.
    """
    dim = problem.dimension
    size = config.population_size or 15 * dim
    rng = np.random.default_rng(problem.seed if config.rng_seed is None else config.rng_seed)
    lo, hi = np.array(problem.bounds).T
    pop = lo + rng.random((size, dim)) * (hi - lo)
    if initial is not None:
        seeds = np.atleast_2d(np.asarray(initial, dtype=float))[:size]
        pop[: len(seeds)] = np.clip(seeds, lo, hi)

    pool = ThreadPoolExecutor(config.workers) if config.workers > 1 else None
    try:
        energies = _evaluate(problem, pop, pool)
        nfev = size
        best = int(np.argmin(energies))
        history = [float(energies[best])]
        if progress:
            progress(0, history[-1], float(np.std(energies)))
        generation = 0
        f_lo, f_hi = (
            (config.mutation_factor, config.mutation_factor)
            if np.isscalar(config.mutation_factor)
            else config.mutation_factor
        )
        while generation < config.max_generations:
            if energies[best] < PENALTY and np.std(energies) < config.tolerance:
                break
            generation += 1
            scale = rng.uniform(f_lo, f_hi)
            trials = np.empty_like(pop)
            for i in range(size):
                others = rng.choice(size - 1, 3, replace=False)
                others[others >= i] += 1
                r1, r2, r3 = others
                mutant = pop[r1] + scale * (pop[r2] - pop[r3])
                cross = rng.random(dim) < config.crossover_rate
                cross[rng.integers(dim)] = True
                trials[i] = np.clip(np.where(cross, mutant, pop[i]), lo, hi)
            trial_energies = _evaluate(problem, trials, pool)
            nfev += size
            keep = trial_energies <= energies
            pop[keep] = trials[keep]
            energies[keep] = trial_energies[keep]
            best = int(np.argmin(energies))
            history.append(float(energies[best]))
            if progress:
                progress(generation, history[-1], float(np.std(energies)))
    finally:
        if pool is not None:
            pool.shutdown()

    if not energies[best] < PENALTY:
        raise NoFeasiblePoint(
            f"no feasible {problem.scheme_id} parameters found in {generation} generations"
        )
    params = dict(zip(problem.param_names, (float(v) for v in pop[best])))
    log.info("DE finished after %d generations: objective %.6f", generation, energies[best])
    return OptimizationResult(
        best_params=params,
        best_objective=float(energies[best]),
        scheme=close_scheme(problem.scheme_id, params),
        generations=generation,
        history=history,
        evaluations=nfev,
    )
