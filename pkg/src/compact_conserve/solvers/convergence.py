"""Observed order of accuracy from a grid refinement study."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateErrors

__all__ = ["OrderEstimate", "error_and_order"]

_ERROR_FLOOR = 1e-14


@dataclass(frozen=True)
class OrderEstimate:
    h: np.ndarray
    errors: np.ndarray
    slope: float
    # log(e_i / e_{i+1}) / log(h_i / h_{i+1}) for consecutive grids (log2 ratio when dyadic)
    pairwise: np.ndarray


def error_and_order(runs) -> OrderEstimate:
    """Least-squares slope of ``log(error)`` against ``log(h)``.

    Parameters
    ----------
    runs : iterable of (h, error)
        At least two runs with distinct spacings, in any order.

    Raises
    ------
    DegenerateErrors
        If any error is ``<= 1e-14`` or non-finite, or fewer than two distinct ``h``.
    """
    data = sorted(((float(h), float(e)) for h, e in runs), reverse=True)
    h = np.array([d[0] for d in data])
    e = np.array([d[1] for d in data])
    if len(np.unique(h)) < 2 or len(h) != len(np.unique(h)):
        raise DegenerateErrors("need at least two runs with distinct spacings")
    if not np.all(np.isfinite(e)) or np.any(e <= _ERROR_FLOOR):
        raise DegenerateErrors(f"errors at or below {_ERROR_FLOOR} make the slope meaningless: {e.tolist()}")
    slope = float(np.polyfit(np.log(h), np.log(e), 1)[0])
    pairwise = np.log(e[:-1] / e[1:]) / np.log(h[:-1] / h[1:])
    return OrderEstimate(h, e, slope, pairwise)
