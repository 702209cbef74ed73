"""Application of the compact first derivative ``F' = A^{-1} B F / h``.

``A`` is factored once with a sparse LU (SuperLU) and reused for every
application, so each derivative costs O(N).  Two-dimensional fields are
stored ``field[j, i]`` with ``i`` (x) the fastest axis.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import LengthMismatch, ShapeMismatch, SingularA
from .scheme import Grid, SchemeDefinition, SchemeMatrices, assemble_matrices

__all__ = [
    "DerivativeOperator",
    "build_operator",
    "build_periodic_operator",
    "scheme_operator",
    "apply",
    "apply_along_axis",
]

_PIVOT_RTOL = 1e-13


@dataclass(frozen=True, eq=False)
class DerivativeOperator:
    a_sparse: sp.csc_matrix
    b_sparse: sp.csr_matrix
    spacing: float
    factorization: object = field(repr=False)
    matrices: Optional[SchemeMatrices] = None
    periodic: bool = False

    @property
    def size(self) -> int:
        return self.a_sparse.shape[0]

    def apply(self, f) -> np.ndarray:
        """Derivative of nodal values ``f`` (1D, or 2D with nodes along axis 0)."""
        f = np.asarray(f, dtype=float)
        if f.shape[0] != self.size:
            raise LengthMismatch(f"expected {self.size} nodal values, got {f.shape[0]}")
        rhs = self.b_sparse @ f
        return self.factorization.solve(rhs) / self.spacing

    def solve_a(self, y) -> np.ndarray:
        return self.factorization.solve(np.asarray(y, dtype=float))

    __call__ = apply


def _factor(a_sparse):
    try:
        lu = spla.splu(a_sparse)
    except RuntimeError as exc:
        raise SingularA(f"A is singular: {exc}") from exc
    diag = np.abs(lu.U.diagonal())
    if not np.all(np.isfinite(diag)) or diag.min() <= _PIVOT_RTOL * diag.max():
        raise SingularA("A is singular to working precision")
    return lu


def _build(a, b, h, matrices=None, periodic=False) -> DerivativeOperator:
    if not h > 0:
        raise ValueError(f"spacing must be positive, got {h}")
    a_sparse = sp.csc_matrix(a)
    b_sparse = sp.csr_matrix(b)
    return DerivativeOperator(
        a_sparse=a_sparse,
        b_sparse=b_sparse,
        spacing=float(h),
        factorization=_factor(a_sparse),
        matrices=matrices,
        periodic=periodic,
    )


def build_operator(m: SchemeMatrices, h: float) -> DerivativeOperator:
    """Factor ``A`` of assembled scheme matrices for grid spacing ``h``.

    Raises
    ------
    SingularA
        If ``A`` cannot be inverted to working precision.
    """
    return _build(m.a_matrix, m.b_matrix, h, matrices=m)


def scheme_operator(scheme: SchemeDefinition, n_intervals: int, length: float) -> DerivativeOperator:
    grid = Grid(n_intervals, length)
    return build_operator(assemble_matrices(scheme, grid), grid.spacing)


def build_periodic_operator(n_points: int, h: float) -> DerivativeOperator:
    """Interior fourth-order stencil with cyclic wrap on ``n_points`` distinct nodes."""
    if n_points < 3:
        raise ValueError("a periodic operator needs at least 3 nodes")
    idx = np.arange(n_points)
    lo, hi = (idx - 1) % n_points, (idx + 1) % n_points
    a = sp.coo_matrix(
        (
            np.concatenate([np.full(n_points, 2 / 3), np.full(n_points, 1 / 6), np.full(n_points, 1 / 6)]),
            (np.concatenate([idx, idx, idx]), np.concatenate([idx, lo, hi])),
        ),
        shape=(n_points, n_points),
    )
    b = sp.coo_matrix(
        (
            np.concatenate([np.full(n_points, -0.5), np.full(n_points, 0.5)]),
            (np.concatenate([idx, idx]), np.concatenate([lo, hi])),
        ),
        shape=(n_points, n_points),
    )
    return _build(a, b, h, periodic=True)


def apply(op: DerivativeOperator, f) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    if f.ndim != 1:
        raise LengthMismatch("apply expects a 1D vector; use apply_along_axis for fields")
    return op.apply(f)


def apply_along_axis(op_x: DerivativeOperator, op_y: DerivativeOperator, field, axis) -> np.ndarray:
    """Differentiate a 2D field ``field[j, i]`` along ``"x"`` (axis 1) or ``"y"`` (axis 0).

    Each grid line along the chosen axis is differentiated independently.
    """
    field = np.asarray(field, dtype=float)
    if field.ndim != 2 or field.shape != (op_y.size, op_x.size):
        raise ShapeMismatch(
            f"field shape {field.shape} does not match operators (ny, nx) = ({op_y.size}, {op_x.size})"
        )
    if axis in ("y", 0):
        return op_y.apply(field)
    if axis in ("x", 1, -1):
        return op_x.apply(field.T).T
    raise ValueError(f"axis must be 'x' or 'y', got {axis!r}")
