r"""
Coefficient mathematics for globally conservative compact schemes.

The first derivative on a uniform grid :math:`x_i = ih`, :math:`i = 0..N`, is
approximated implicitly by

.. math::

    A F' = \frac{1}{h} B F,

with the fourth-order tridiagonal stencil
:math:`\tfrac16 f'_{i-1} + \tfrac23 f'_i + \tfrac16 f'_{i+1} = (f_{i+1} - f_{i-1})/2h`
in the interior and third-order four-point closures in the first ``l`` rows
(``l = 1, 2, 3`` for P1, P2, P3).  The last ``l`` rows are the mirror images
``a[N-i, N-j] = a[i, j]``, ``b[N-i, N-j] = -b[i, j]``.

Global conservation holds when the quadrature weights ``W`` and the auxiliary
row weights ``W'`` satisfy

.. math::

    W' A = W, \qquad W' B = [-1, 0, \dots, 0, 1],

so that :math:`\frac{d}{dt} h \sum_i w_i u_i = f_0 - f_N` for the
semi-discrete conservation law.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from typing import Mapping, Sequence

import numpy as np

from .errors import GridTooSmall, InvalidParamCount, SingularClosure

__all__ = [
    "SCHEME_IDS",
    "FREE_PARAM_NAMES",
    "SCHEME_DEPTH",
    "WEIGHT_RELATION_MATRIX",
    "Grid",
    "StencilSpec",
    "BoundaryBlock",
    "WeightFamily",
    "SchemeDefinition",
    "SchemeMatrices",
    "OrderReport",
    "ConservationReport",
    "interior_stencil",
    "derived_weights",
    "close_scheme",
    "assemble_matrices",
    "quadrature_weight_vector",
    "taylor_condition_matrices",
    "verify_order_conditions",
    "verify_conservation_identities",
]

SCHEME_IDS = ("P1", "P2", "P3")
SCHEME_DEPTH = {"P1": 1, "P2": 2, "P3": 3}
FREE_PARAM_NAMES = {
    "P1": ("w0",),
    "P2": ("a03", "b03", "w0"),
    "P3": ("a03", "b03", "a13", "b13", "wp0", "w0"),
}

#: Boundary stencil width (columns 0..3) shared by all closures.
STENCIL_WIDTH = 4

#: Condition number above which a closure's 2x2 system counts as singular.
SINGULAR_COND = 1e12
_SMALL_PIVOT = 1e-12

_F = Fraction
#: ``B_i^{-1} A_i`` for the Taylor condition matrices of every boundary row.
WEIGHT_RELATION_MATRIX = np.array(
    [
        [_F(-11, 6), _F(-1, 3), _F(1, 6), _F(-1, 3)],
        [_F(3), _F(-1, 2), _F(-1), _F(3, 2)],
        [_F(-3, 2), _F(1), _F(1, 2), _F(-3)],
        [_F(1, 3), _F(-1, 6), _F(1, 3), _F(11, 6)],
    ],
    dtype=object,
)


def _frozen(array) -> np.ndarray:
    out = np.array(array, dtype=float)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class Grid:
    """Uniform grid ``x_i = i L / N`` on ``[0, L]``."""

    n_intervals: int
    length: float = 1.0

    def __post_init__(self):
        if int(self.n_intervals) != self.n_intervals or self.n_intervals < 1:
            raise ValueError(f"n_intervals must be a positive integer, got {self.n_intervals}")
        if not self.length > 0:
            raise ValueError(f"length must be positive, got {self.length}")
        object.__setattr__(self, "n_intervals", int(self.n_intervals))

    @property
    def spacing(self) -> float:
        return self.length / self.n_intervals

    @property
    def nodes(self) -> np.ndarray:
        x = np.arange(self.n_intervals + 1) * self.spacing
        x[-1] = self.length
        return x


@dataclass(frozen=True)
class StencilSpec:
    """Implicit stencil ``sum c_m f'_{i+m} = (1/h) sum d_n f_{i+n}``."""

    lhs_coeffs: Mapping[int, float]
    rhs_coeffs: Mapping[int, float]
    order: int

    def order_residuals(self) -> np.ndarray:
        """Residuals of ``sum m^(j-1) c_m - (1/j) sum n^j d_n`` for ``j = 1..order``.

        Rational coefficients are summed exactly before the conversion to float.
        """
        res = []
        for j in range(1, self.order + 1):
            lhs = sum(_F(m) ** (j - 1) * c for m, c in self.lhs_coeffs.items())
            rhs = sum(_F(n) ** j * d for n, d in self.rhs_coeffs.items()) / j
            res.append(float(lhs - rhs))
        return np.array(res)


def interior_stencil() -> StencilSpec:
    """The fourth-order tridiagonal compact stencil used at every interior node."""
    return StencilSpec(
        lhs_coeffs={-1: _F(1, 6), 0: _F(2, 3), 1: _F(1, 6)},
        rhs_coeffs={-1: _F(-1, 2), 1: _F(1, 2)},
        order=4,
    )


@dataclass(frozen=True)
class BoundaryBlock:
    """Left-boundary coefficients ``a[i, j]``, ``b[i, j]`` for rows ``i < depth``.

    Rows at or beyond ``depth`` are unused and must be zero.
    """

    a: np.ndarray
    b: np.ndarray
    depth: int

    def __post_init__(self):
        a = np.zeros((3, STENCIL_WIDTH))
        b = np.zeros((3, STENCIL_WIDTH))
        a_in = np.atleast_2d(np.asarray(self.a, dtype=float))
        b_in = np.atleast_2d(np.asarray(self.b, dtype=float))
        if a_in.shape[1] != STENCIL_WIDTH or b_in.shape[1] != STENCIL_WIDTH:
            raise ValueError("boundary rows must have four entries")
        if self.depth not in (1, 2, 3):
            raise ValueError(f"depth must be 1, 2 or 3, got {self.depth}")
        a[: a_in.shape[0]] = a_in
        b[: b_in.shape[0]] = b_in
        if np.any(a[self.depth :]) or np.any(b[self.depth :]):
            raise ValueError("rows beyond the closure depth must be zero")
        row_sums = np.abs(b[: self.depth].sum(axis=1))
        if np.any(row_sums > 1e-12):
            raise ValueError(
                f"zeroth Taylor condition violated: b row sums {row_sums.tolist()}"
            )
        object.__setattr__(self, "a", _frozen(a))
        object.__setattr__(self, "b", _frozen(b))


@dataclass(frozen=True)
class WeightFamily:
    """End quadrature weights ``w0..w3``; the interior weights are 1."""

    w0: float
    w1: float
    w2: float
    w3: float

    def as_array(self) -> np.ndarray:
        return np.array([self.w0, self.w1, self.w2, self.w3])

    def is_consistent(self, tol: float = 1e-14) -> bool:
        ref = derived_weights(self.w0).as_array()
        return bool(np.all(np.abs(ref - self.as_array()) <= tol * max(1.0, abs(self.w0))))


def derived_weights(w0: float) -> WeightFamily:
    """One-parameter weight family forced by the conservation constraints.

    ``w0 = 3/8`` recovers the Gregory end correction (3/8, 7/6, 23/24, 1).
    """
    w0 = float(w0)
    return WeightFamily(w0, -3.0 * w0 + 55.0 / 24.0, 3.0 * w0 - 1.0 / 6.0, -w0 + 11.0 / 8.0)


@dataclass(frozen=True)
class SchemeDefinition:
    scheme_id: str
    boundary: BoundaryBlock
    weights: WeightFamily
    aux_weights: tuple
    interior: StencilSpec = field(default_factory=interior_stencil)
    free_params: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.scheme_id in SCHEME_DEPTH and SCHEME_DEPTH[self.scheme_id] != self.boundary.depth:
            raise ValueError(
                f"{self.scheme_id} requires depth {SCHEME_DEPTH[self.scheme_id]}, "
                f"got {self.boundary.depth}"
            )
        aux = tuple(float(v) for v in self.aux_weights)
        if len(aux) != self.boundary.depth:
            raise ValueError(f"expected {self.boundary.depth} auxiliary weights, got {len(aux)}")
        object.__setattr__(self, "aux_weights", aux)
        object.__setattr__(self, "free_params", dict(self.free_params))

    @property
    def depth(self) -> int:
        return self.boundary.depth

    def coefficients(self) -> dict:
        """Named boundary coefficients ``a{i}{j}``, ``b{i}{j}`` of the used rows."""
        out = {}
        for i in range(self.depth):
            for j in range(STENCIL_WIDTH):
                out[f"a{i}{j}"] = float(self.boundary.a[i, j])
            for j in range(STENCIL_WIDTH):
                out[f"b{i}{j}"] = float(self.boundary.b[i, j])
        return out

    def all_values(self) -> dict:
        """Every named coefficient and weight, the layout of the published tables."""
        out = self.coefficients()
        out.update({f"w{k}": float(v) for k, v in enumerate(self.weights.as_array())})
        out.update({f"wp{k}": v for k, v in enumerate(self.aux_weights)})
        return out


def _as_param_list(scheme_id, free_params) -> list:
    names = FREE_PARAM_NAMES[scheme_id]
    if isinstance(free_params, Mapping):
        missing = set(names) - set(free_params)
        extra = set(free_params) - set(names)
        if missing or extra:
            raise InvalidParamCount(
                f"{scheme_id} takes parameters {names}; missing {sorted(missing)}, "
                f"unexpected {sorted(extra)}"
            )
        return [float(free_params[n]) for n in names]
    values = [float(v) for v in np.atleast_1d(np.asarray(free_params, dtype=float))]
    if len(values) != len(names):
        raise InvalidParamCount(f"{scheme_id} takes {len(names)} parameters {names}, got {len(values)}")
    return values


def _solve_2x2(matrix, rhs) -> np.ndarray:
    matrix = np.asarray(matrix, dtype=float)
    if not np.all(np.isfinite(matrix)) or np.linalg.cond(matrix) > SINGULAR_COND:
        raise SingularClosure(f"closure system is singular: {matrix.tolist()}")
    return np.linalg.solve(matrix, rhs)


def _check_divisor(value, name):
    if abs(value) < _SMALL_PIVOT:
        raise SingularClosure(f"{name} = {value!r} vanishes; the closure is undefined")


def _first_row(a00, b00, a03, b03):
    # Third-order Taylor conditions at x0 with a00, b00, a03, b03 given.
    return (
        [a00, 2 * b03 - 5 * a03 - 4 * b00 - 8 * a00, 4 * b03 - 8 * a03 - 2 * b00 - 5 * a00, a03],
        [
            b00,
            12 * a00 + 12 * a03 + 4 * b00 - 5 * b03,
            4 * b03 - 12 * a03 - 5 * b00 - 12 * a00,
            b03,
        ],
    )


def _second_row(a11, b11, a13, b13):
    a10 = 0.25 * a11 - 1.75 * a13 + 0.25 * b11 + 0.75 * b13
    a12 = 0.25 * a11 - 3.75 * a13 - 0.25 * b11 + 2.25 * b13
    b10 = 2.25 * a13 - 0.75 * a11 - 0.5 * b11 - b13
    b12 = 0.75 * a11 - 2.25 * a13 - 0.5 * b11
    return [a10, a11, a12, a13], [b10, b11, b12, b13]


def _third_row(a22, b22, a23, b23):
    a20 = 2 * b22 - 16 * a23 - 5 * a22 + 12 * b23
    a21 = 4 * b22 - 21 * a23 - 8 * a22 + 18 * b23
    b20 = 12 * a22 + 36 * a23 - 5 * b22 - 28 * b23
    b21 = 4 * b22 - 36 * a23 - 12 * a22 + 27 * b23
    return [a20, a21, a22, a23], [b20, b21, b22, b23]


def _close_p1(w0):
    a00 = 1.0
    w = derived_weights(w0)
    wp0 = -(4.0 / 3.0 - 8.0 * w0) / (8.0 * a00)
    _check_divisor(wp0, "w0'")
    b00 = -1.0 / (2.0 * wp0)
    a03 = -a00 - 5.0 / 12.0 * b00
    a01 = -5.0 * a03 - 4.0 * b00 - 8.0 * a00
    a02 = -8.0 * a03 - 2.0 * b00 - 5.0 * a00
    a = [[a00, a01, a02, a03]]
    b = [[b00, -b00, 0.0, 0.0]]
    return BoundaryBlock(a, b, 1), w, (wp0,)


def _close_p2(a03, b03, w0):
    a00 = a11 = 1.0
    b00 = b11 = 0.0
    w = derived_weights(w0)
    system = [
        [b00 - 2.25 * a03 + b03, -0.75 * a11 - 0.5 * b11],
        [12 * a00 + 12 * a03 + 4 * b00 - 5 * b03, b11],
    ]
    wp0, wp1 = _solve_2x2(system, [1.25 - 2.25 * w.w3, 0.5])
    _check_divisor(wp1, "w1'")
    a13 = (w.w3 - 1.0 - wp0 * a03) / wp1
    b13 = -wp0 * b03 / wp1
    row0 = _first_row(a00, b00, a03, b03)
    row1 = _second_row(a11, b11, a13, b13)
    return BoundaryBlock([row0[0], row1[0]], [row0[1], row1[1]], 2), w, (wp0, wp1)


def _close_p3(a03, b03, a13, b13, wp0, w0):
    a00 = a11 = a22 = 1.0
    b00 = b11 = b22 = 0.0
    w = derived_weights(w0)
    system = [
        [
            0.25 * a11 + 0.25 * b11 + 57 / 4 * a13 - 45 / 4 * b13,
            2 * b22 - 5 * a22,
        ],
        [
            0.25 * a11 - 3.75 * a13 - 0.25 * b11 + 2.25 * b13,
            a22,
        ],
    ]
    rhs = [
        w.w0 + 16 * w.w3 - 58 / 3 - wp0 * (a00 + 16 * a03 - 12 * b03),
        w.w2 - 1 / 6 - wp0 * (4 * b03 - 8 * a03 - 2 * b00 - 5 * a00),
    ]
    wp1, wp2 = _solve_2x2(system, rhs)
    _check_divisor(wp2, "w2'")
    a23 = (w.w3 - 5 / 6 - wp0 * a03 - wp1 * a13) / wp2
    b23 = (0.5 - wp0 * b03 - wp1 * b13) / wp2
    row0 = _first_row(a00, b00, a03, b03)
    row1 = _second_row(a11, b11, a13, b13)
    row2 = _third_row(a22, b22, a23, b23)
    block = BoundaryBlock(
        [row0[0], row1[0], row2[0]], [row0[1], row1[1], row2[1]], 3
    )
    return block, w, (wp0, wp1, wp2)


_CLOSURES = {"P1": _close_p1, "P2": _close_p2, "P3": _close_p3}


def close_scheme(scheme_id: str, free_params) -> SchemeDefinition:
    """Build a full scheme from its free parameters.

    Parameters
    ----------
    scheme_id : {"P1", "P2", "P3"}
    free_params : mapping or sequence
        P1: ``(w0,)``; P2: ``(a03, b03, w0)``; P3: ``(a03, b03, a13, b13, wp0, w0)``.
        A mapping must use exactly these names.  The diagonal coefficients
        ``a_ii = 1`` and ``b_ii = 0`` are fixed.

    Raises
    ------
    SingularClosure
        If the 2x2 system for the auxiliary weights is singular or a
        required divisor vanishes.
    InvalidParamCount
        If the parameters do not match the scheme.
    """
    if scheme_id not in _CLOSURES:
        raise ValueError(f"unknown scheme id {scheme_id!r}; expected one of {SCHEME_IDS}")
    values = _as_param_list(scheme_id, free_params)
    with np.errstate(all="raise"):
        try:
            block, weights, aux = _CLOSURES[scheme_id](*values)
        except FloatingPointError as exc:
            raise SingularClosure(str(exc)) from exc
    if not (np.all(np.isfinite(block.a)) and np.all(np.isfinite(block.b))):
        raise SingularClosure("closure produced non-finite coefficients")
    return SchemeDefinition(
        scheme_id=scheme_id,
        boundary=block,
        weights=weights,
        aux_weights=aux,
        free_params=dict(zip(FREE_PARAM_NAMES[scheme_id], values)),
    )


def quadrature_weight_vector(end_weights, n_intervals: int) -> np.ndarray:
    """Length ``N + 1`` weight vector with ``end_weights`` mirrored at both ends."""
    end = np.asarray(end_weights, dtype=float)
    k = end.size
    if n_intervals + 1 < 2 * k:
        raise GridTooSmall(f"{n_intervals} intervals cannot hold {k} end weights per side")
    w = np.ones(n_intervals + 1)
    w[:k] = end
    w[n_intervals + 1 - k :] = end[::-1]
    return w


@dataclass(frozen=True)
class SchemeMatrices:
    a_matrix: np.ndarray
    b_matrix: np.ndarray
    w_vector: np.ndarray
    wprime_vector: np.ndarray
    depth: int

    def __post_init__(self):
        for name in ("a_matrix", "b_matrix", "w_vector", "wprime_vector"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))

    @property
    def n_intervals(self) -> int:
        return self.a_matrix.shape[0] - 1


def assemble_matrices(scheme: SchemeDefinition, grid) -> SchemeMatrices:
    """Assemble ``A``, ``B``, ``W`` and ``W'`` on a grid.

    ``grid`` may be a :class:`Grid` or the number of intervals ``N``.  The
    right-boundary rows are generated by mirroring the left block.
    """
    n = grid.n_intervals if isinstance(grid, Grid) else int(grid)
    depth = scheme.depth
    if n < 2 * depth + 5:
        raise GridTooSmall(f"N = {n} < {2 * depth + 5} for a depth-{depth} closure")
    size = n + 1
    a = np.zeros((size, size))
    b = np.zeros((size, size))
    rows = np.arange(depth, n - depth + 1)
    a[rows, rows - 1] = 1.0 / 6.0
    a[rows, rows] = 2.0 / 3.0
    a[rows, rows + 1] = 1.0 / 6.0
    b[rows, rows - 1] = -0.5
    b[rows, rows + 1] = 0.5
    cols = np.arange(STENCIL_WIDTH)
    for i in range(depth):
        a[i, cols] = scheme.boundary.a[i]
        b[i, cols] = scheme.boundary.b[i]
        a[n - i, n - cols] = scheme.boundary.a[i]
        b[n - i, n - cols] = -scheme.boundary.b[i]
    return SchemeMatrices(
        a_matrix=a,
        b_matrix=b,
        w_vector=quadrature_weight_vector(scheme.weights.as_array(), n),
        wprime_vector=quadrature_weight_vector(scheme.aux_weights, n),
        depth=depth,
    )


def taylor_condition_matrices(row: int, exact: bool = False):
    """Matrices ``(A_i, B_i)`` with ``A_i a_i = B_i b_i`` the Taylor conditions at ``x_row``.

    Row ``p`` of the system reads
    ``sum_j a_ij s_j^(p-1)/(p-1)! = sum_j b_ij s_j^p/p!`` with ``s_j = j - row``.
    With ``exact=True`` the entries are :class:`fractions.Fraction` objects.
    """
    offsets = [j - row for j in range(STENCIL_WIDTH)]
    lhs = [[_F(0)] * STENCIL_WIDTH]
    rhs = [[_F(1)] * STENCIL_WIDTH]
    for p in range(1, STENCIL_WIDTH):
        lhs.append([_F(s) ** (p - 1) / factorial(p - 1) for s in offsets])
        rhs.append([_F(s) ** p / factorial(p) for s in offsets])
    lhs = np.array(lhs, dtype=object)
    rhs = np.array(rhs, dtype=object)
    if exact:
        return lhs, rhs
    return lhs.astype(float), rhs.astype(float)


@dataclass(frozen=True)
class OrderReport:
    """Named residuals of the boundary Taylor conditions and interior order relations."""

    residuals: Mapping[str, float]

    @property
    def max_residual(self) -> float:
        return max(abs(v) for v in self.residuals.values())

    def passed(self, threshold: float = 1e-10) -> bool:
        return self.max_residual <= threshold

    def failures(self, threshold: float = 1e-10) -> list:
        return [k for k, v in self.residuals.items() if abs(v) > threshold]


def verify_order_conditions(scheme: SchemeDefinition) -> OrderReport:
    residuals = {}
    for i in range(scheme.depth):
        lhs, rhs = taylor_condition_matrices(i)
        r = lhs @ scheme.boundary.a[i] - rhs @ scheme.boundary.b[i]
        for p, value in enumerate(r):
            residuals[f"x{i}.taylor{p}"] = float(value)
    for j, value in enumerate(scheme.interior.order_residuals(), start=1):
        residuals[f"interior.order{j}"] = float(value)
    return OrderReport(residuals)


@dataclass(frozen=True)
class ConservationReport:
    wa_residual: float
    wb_residual: float

    @property
    def max_residual(self) -> float:
        return max(self.wa_residual, self.wb_residual)

    def passed(self, threshold: float = 1e-10) -> bool:
        return self.max_residual <= threshold


def verify_conservation_identities(m: SchemeMatrices) -> ConservationReport:
    """Return ``||W'A - W||_inf`` and ``||W'B - [-1, 0, ..., 0, 1]||_inf``."""
    target = np.zeros(m.n_intervals + 1)
    target[0], target[-1] = -1.0, 1.0
    wa = np.max(np.abs(m.wprime_vector @ m.a_matrix - m.w_vector))
    wb = np.max(np.abs(m.wprime_vector @ m.b_matrix - target))
    return ConservationReport(float(wa), float(wb))
