r"""
Fourier resolution, asymptotic stability and quadrature precision.

For a boundary row ``i`` the modified (pseudo-) wavenumber of a Fourier mode
``exp(i omega x / h)`` is

.. math::

    \bar\omega = \frac{\sum_j b_{ij} e^{\mathrm{i}\omega (j - i)}}
                      {\mathrm{i} \sum_j a_{ij} e^{\mathrm{i}\omega (j - i)}},

whose real part carries the dispersive error and imaginary part the
dissipative error.  Critical frequencies are located by scanning the grid
``omega = delta, 2 delta, ..., <= pi`` with ``delta = 0.01`` for the first
point where the relative error reaches a threshold.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np
import scipy.linalg

from .errors import DenominatorVanishes, NoCrossing, SingularA
from .scheme import (
    STENCIL_WIDTH,
    SchemeDefinition,
    WeightFamily,
    assemble_matrices,
    quadrature_weight_vector,
)
from .schemefile import atomic_write_text

__all__ = [
    "SIGMAS",
    "DELTA",
    "omega_grid",
    "WavenumberResponse",
    "CriticalFrequency",
    "NodeResolution",
    "ResolutionReport",
    "StabilityReport",
    "modified_wavenumber",
    "interior_modified_wavenumber",
    "wavenumber_response",
    "resolution_errors",
    "critical_frequency",
    "average_resolution",
    "reduced_spectrum",
    "stability_spectrum",
    "quadrature_rule",
    "quadrature_precision",
    "measured_precision",
    "write_response_csv",
    "write_spectrum_csv",
]

SIGMAS = (0.003, 0.002, 0.001)
DELTA = 0.01
_DENOM_TOL = 1e-14


def omega_grid(delta: float = DELTA) -> np.ndarray:
    """``delta, 2 delta, ...`` up to and including the last point ``<= pi``."""
    count = int(np.floor(np.pi / delta + 1e-12))
    return delta * np.arange(1, count + 1)


def interior_modified_wavenumber(omega):
    omega = np.asarray(omega, dtype=float)
    return 3.0 * np.sin(omega) / (2.0 + np.cos(omega))


def modified_wavenumber(scheme: SchemeDefinition, node_index, omega):
    """Pseudo-wavenumber of one boundary row, or of the interior stencil.

    Parameters
    ----------
    node_index : int or "interior"
        Boundary row ``0 <= node_index < scheme.depth``.
    omega : float or array
        Frequencies in ``(0, pi]``.

    Raises
    ------
    DenominatorVanishes
        If ``|C + iD| < 1e-14`` at any requested frequency.
    """
    scalar = np.ndim(omega) == 0
    om = np.atleast_1d(np.asarray(omega, dtype=float))
    if np.any(om <= 0) or np.any(om > np.pi + 1e-12):
        raise ValueError("omega must lie in (0, pi]")
    if node_index == "interior":
        out = interior_modified_wavenumber(om).astype(complex)
    else:
        if not (isinstance(node_index, (int, np.integer)) and 0 <= node_index < scheme.depth):
            raise ValueError(
                f"node_index must be 'interior' or in 0..{scheme.depth - 1}, got {node_index!r}"
            )
        offsets = np.arange(STENCIL_WIDTH) - node_index
        phase = np.exp(1j * np.outer(om, offsets))
        numer = phase @ scheme.boundary.b[node_index]
        denom = phase @ scheme.boundary.a[node_index]
        bad = np.abs(denom) < _DENOM_TOL
        if np.any(bad):
            raise DenominatorVanishes(
                f"row {node_index}: C + iD vanishes at omega = {om[bad].tolist()}"
            )
        out = numer / (1j * denom)
    return out[0] if scalar else out


@dataclass(frozen=True)
class WavenumberResponse:
    node_index: Union[int, str]
    omega_grid: np.ndarray
    omega_bar: np.ndarray


def wavenumber_response(scheme, node_index, grid=None) -> WavenumberResponse:
    grid = omega_grid() if grid is None else np.asarray(grid, dtype=float)
    return WavenumberResponse(node_index, grid, modified_wavenumber(scheme, node_index, grid))


def resolution_errors(response: WavenumberResponse):
    """Relative dispersive and dissipative errors ``(eps_R, eps_I)``."""
    om = response.omega_grid
    eps_r = np.abs(response.omega_bar.real - om) / om
    eps_i = np.abs(response.omega_bar.imag) / om
    return eps_r, eps_i


@dataclass(frozen=True)
class CriticalFrequency:
    omega_r: float
    omega_i: float

    @property
    def omega(self) -> float:
        return 0.5 * (self.omega_r + self.omega_i)


def _first_crossing(eps, sigma, grid, refine, label):
    hits = np.flatnonzero(eps >= sigma)
    if hits.size == 0:
        raise NoCrossing(f"{label} error never reaches sigma = {sigma}")
    k = hits[0]
    if not refine or k == 0:
        return float(grid[k])
    # linear interpolation of the equality point inside the bracketing interval
    e0, e1 = eps[k - 1], eps[k]
    return float(grid[k - 1] + (sigma - e0) / (e1 - e0) * (grid[k] - grid[k - 1]))


def critical_frequency(eps_pair, sigma: float, grid=None, refine: bool = False) -> CriticalFrequency:
    """First grid frequency where each error curve reaches ``sigma``.

    Parameters
    ----------
    eps_pair : (eps_R, eps_I)
        Error curves sampled on ``grid`` (default: the ``delta = 0.01`` grid).
    refine : bool
        Interpolate linearly to the equality point instead of returning the
        first grid point with ``eps >= sigma``.

    Raises
    ------
    NoCrossing
    """
    eps_r, eps_i = (np.asarray(e, dtype=float) for e in eps_pair)
    grid = omega_grid() if grid is None else np.asarray(grid, dtype=float)
    if eps_r.shape != grid.shape or eps_i.shape != grid.shape:
        raise ValueError("error curves must be sampled on the frequency grid")
    return CriticalFrequency(
        _first_crossing(eps_r, sigma, grid, refine, "dispersive"),
        _first_crossing(eps_i, sigma, grid, refine, "dissipative"),
    )


@dataclass(frozen=True)
class NodeResolution:
    node_index: int
    sigma: float
    response: WavenumberResponse
    eps_r: np.ndarray
    eps_i: np.ndarray
    critical: Optional[CriticalFrequency]


@dataclass(frozen=True)
class ResolutionReport:
    per_node: list
    omega_f: Optional[float]
    sigmas: tuple = SIGMAS
    failure: Optional[str] = None

    @property
    def feasible(self) -> bool:
        return self.omega_f is not None


def average_resolution(scheme: SchemeDefinition, sigmas=SIGMAS, grid=None, refine=False) -> ResolutionReport:
    """Average critical frequency ``omega_f`` over the scheme's boundary rows.

    Row ``i`` is paired with ``sigmas[i]``.  A row without a crossing (or
    with a pole on the grid) makes the report infeasible (``omega_f is None``) instead of raising.
    """
    grid = omega_grid() if grid is None else np.asarray(grid, dtype=float)
    per_node = []
    failure = None
    for i in range(scheme.depth):
        try:
            response = wavenumber_response(scheme, i, grid)
        except DenominatorVanishes as exc:
            return ResolutionReport(per_node, None, tuple(sigmas), f"node {i}: {exc}")
        eps_r, eps_i = resolution_errors(response)
        try:
            crit = critical_frequency((eps_r, eps_i), sigmas[i], grid, refine=refine)
        except NoCrossing as exc:
            crit = None
            failure = failure or f"node {i}: {exc}"
        per_node.append(NodeResolution(i, sigmas[i], response, eps_r, eps_i, crit))
    if failure:
        return ResolutionReport(per_node, None, tuple(sigmas), failure)
    omega_f = float(np.mean([n.critical.omega for n in per_node]))
    return ResolutionReport(per_node, omega_f, tuple(sigmas))


@dataclass(frozen=True)
class StabilityReport:
    n: int
    eigenvalues: np.ndarray
    max_real_part: float

    @property
    def stable(self) -> bool:
        return self.max_real_part <= 0.0


def reduced_spectrum(a_matrix, b_matrix, negate: bool = True) -> np.ndarray:
    """Eigenvalues of ``-(A^{-1} B)`` with the first row and column removed.

    ``negate=False`` drops the minus sign (``Q = D(2:N, 2:N)`` literally).
    """
    a_matrix = np.asarray(a_matrix, dtype=float)
    try:
        lu = scipy.linalg.lu_factor(a_matrix, check_finite=True)
    except (ValueError, np.linalg.LinAlgError) as exc:
        raise SingularA(str(exc)) from exc
    diag = np.abs(np.diag(lu[0]))
    if diag.min() <= 1e-13 * diag.max():
        raise SingularA("A is singular to working precision")
    d = scipy.linalg.lu_solve(lu, np.asarray(b_matrix, dtype=float))
    q = d[1:, 1:]
    if negate:
        q = -q
    return scipy.linalg.eigvals(q)


def stability_spectrum(scheme: SchemeDefinition, n: int, negate: bool = True) -> StabilityReport:
    """Spectrum of the inflow-reduced semi-discrete operator at ``h = 1``.

    ``n`` is the number of grid intervals; the reduced operator is ``n x n``.
    """
    m = assemble_matrices(scheme, n)
    ev = reduced_spectrum(m.a_matrix, m.b_matrix, negate=negate)
    return StabilityReport(n, ev, float(np.max(ev.real)))


def _end_weights(weights) -> np.ndarray:
    if isinstance(weights, SchemeDefinition):
        return weights.weights.as_array()
    if isinstance(weights, WeightFamily):
        return weights.as_array()
    return np.asarray(weights, dtype=float)


def quadrature_rule(weights, n: int, length: float = 1.0):
    """Nodes and weights ``h * w_i`` of the induced composite rule on ``[0, length]``."""
    h = length / n
    nodes = np.arange(n + 1) * h
    return nodes, h * quadrature_weight_vector(_end_weights(weights), n)


def quadrature_precision(weights, n: int, tol: float = 1e-10, max_degree: int = 12) -> int:
    """Largest ``p`` such that every monomial of degree ``<= p`` integrates exactly on ``[0, 1]``.

    Returns ``-1`` when even constants fail.  ``weights`` may be a scheme, a
    :class:`WeightFamily` or four raw end weights.
    """
    if n < 8:
        raise ValueError("quadrature precision needs n >= 8")
    nodes, w = quadrature_rule(weights, n)
    degree = -1
    for p in range(max_degree + 1):
        if abs(w @ nodes**p - 1.0 / (p + 1)) > tol:
            break
        degree = p
    return degree


def measured_precision(weights, ns: Sequence[int] = (20, 31), tol: float = 1e-10) -> int:
    """Exact degree common to several grid sizes, excluding accidental exactness."""
    return min(quadrature_precision(weights, n, tol) for n in ns)


def write_response_csv(path, report: ResolutionReport) -> None:
    fh = io.StringIO()
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["node", "omega", "re_omega_bar", "im_omega_bar", "eps_R", "eps_I"])
    for node in report.per_node:
        r = node.response
        for row in zip(r.omega_grid, r.omega_bar.real, r.omega_bar.imag, node.eps_r, node.eps_i):
            writer.writerow([node.node_index, *(repr(float(v)) for v in row)])
    atomic_write_text(path, fh.getvalue())


def write_spectrum_csv(path, report: StabilityReport) -> None:
    fh = io.StringIO()
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["re_lambda", "im_lambda", "n"])
    for lam in report.eigenvalues:
        writer.writerow([repr(float(lam.real)), repr(float(lam.imag)), report.n])
    atomic_write_text(path, fh.getvalue())
