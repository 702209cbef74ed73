"""Globally conservative fourth-order compact finite-difference schemes.

Three closure families are provided.  P1, P2 and P3 modify one, two and three
boundary rows respectively, and each is fixed by a handful of free
parameters.  Modules:

``scheme``      coefficient closures, matrix assembly and algebraic checks
``schemefile``  JSON scheme format and the bundled tables
``operator``    factored derivative operators (banded and cyclic)
``analysis``    modified wavenumbers, stability spectra and quadrature degree
``optimizer``   resolution/stability objective and differential evolution
``solvers``     RK4 advection and Euler vortex benchmarks
``cli``         the ``compact-conserve`` command
"""

from .errors import *  # noqa: F401,F403
from .scheme import (
    FREE_PARAM_NAMES,
    SCHEME_IDS,
    Grid,
    SchemeDefinition,
    SchemeMatrices,
    assemble_matrices,
    close_scheme,
    derived_weights,
    interior_stencil,
    verify_conservation_identities,
    verify_order_conditions,
)
from .schemefile import bundled_scheme, load_scheme, resolve_scheme, save_scheme
from .operator import apply, apply_along_axis, build_operator, build_periodic_operator, scheme_operator
from .analysis import (
    average_resolution,
    critical_frequency,
    modified_wavenumber,
    quadrature_precision,
    stability_spectrum,
)
from .optimizer import DEConfig, OptimizationProblem, objective, optimize

__version__ = "0.1.0"
