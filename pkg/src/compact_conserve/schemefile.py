"""Reading and writing the JSON scheme format.

Numbers are stored as decimal strings so published tables keep every digit.
Only the left-boundary rows are serialized; the right boundary is always
regenerated by mirroring.
"""

from __future__ import annotations

import json
import os
import tempfile
from decimal import Decimal, InvalidOperation
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import SchemeFormatError
from .scheme import (
    FREE_PARAM_NAMES,
    SCHEME_DEPTH,
    SCHEME_IDS,
    STENCIL_WIDTH,
    BoundaryBlock,
    SchemeDefinition,
    WeightFamily,
)

__all__ = [
    "bundled_scheme",
    "bundled_document",
    "load_scheme",
    "parse_scheme",
    "scheme_to_document",
    "save_scheme",
    "resolve_scheme",
    "atomic_write_text",
]


def _num(value, where):
    try:
        out = float(Decimal(str(value)))
    except (InvalidOperation, ValueError, TypeError) as exc:
        raise SchemeFormatError(f"{where}: not a decimal number: {value!r}") from exc
    if not np.isfinite(out):
        raise SchemeFormatError(f"{where}: non-finite value {value!r}")
    return out


def _section(doc, key):
    try:
        section = doc[key]
    except KeyError as exc:
        raise SchemeFormatError(f"missing section {key!r}") from exc
    if not isinstance(section, dict):
        raise SchemeFormatError(f"section {key!r} must be an object")
    return section


def parse_scheme(doc: dict) -> SchemeDefinition:
    """Build a :class:`SchemeDefinition` from a decoded scheme document."""
    if not isinstance(doc, dict):
        raise SchemeFormatError("scheme document must be a JSON object")
    scheme_id = doc.get("scheme_id")
    if scheme_id not in SCHEME_IDS:
        raise SchemeFormatError(f"scheme_id must be one of {SCHEME_IDS}, got {scheme_id!r}")
    depth = SCHEME_DEPTH[scheme_id]
    coeffs = _section(doc, "coefficients")
    a = np.zeros((depth, STENCIL_WIDTH))
    b = np.zeros((depth, STENCIL_WIDTH))
    for i in range(depth):
        for j in range(STENCIL_WIDTH):
            for name, target in ((f"a{i}{j}", a), (f"b{i}{j}", b)):
                if name not in coeffs:
                    raise SchemeFormatError(f"missing coefficient {name}")
                target[i, j] = _num(coeffs[name], name)
    weights = _section(doc, "weights")
    try:
        w = WeightFamily(*(_num(weights[f"w{k}"], f"w{k}") for k in range(4)))
    except KeyError as exc:
        raise SchemeFormatError(f"missing weight {exc}") from exc
    if not w.is_consistent(tol=1e-12):
        raise SchemeFormatError("weights do not follow the one-parameter family of w0")
    aux = _section(doc, "aux_weights")
    try:
        wp = tuple(_num(aux[f"wp{k}"], f"wp{k}") for k in range(depth))
    except KeyError as exc:
        raise SchemeFormatError(f"missing auxiliary weight {exc}") from exc
    free = doc.get("free_params", {}) or {}
    free = {k: _num(v, k) for k, v in free.items() if k in FREE_PARAM_NAMES[scheme_id]}
    try:
        block = BoundaryBlock(a, b, depth)
        return SchemeDefinition(scheme_id, block, w, wp, free_params=free)
    except ValueError as exc:
        raise SchemeFormatError(str(exc)) from exc


def load_scheme(path) -> SchemeDefinition:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise SchemeFormatError(f"cannot read scheme file {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemeFormatError(f"{path}: invalid JSON: {exc}") from exc
    return parse_scheme(doc)


def bundled_document(scheme_id: str) -> dict:
    if scheme_id not in SCHEME_IDS:
        raise SchemeFormatError(f"no bundled scheme {scheme_id!r}; choose from {SCHEME_IDS}")
    text = resources.files("compact_conserve").joinpath("data", f"{scheme_id}.json").read_text()
    return json.loads(text)


def bundled_scheme(scheme_id: str) -> SchemeDefinition:
    """The published coefficient table for ``P1``, ``P2`` or ``P3``."""
    return parse_scheme(bundled_document(scheme_id))


def resolve_scheme(source) -> SchemeDefinition:
    """Accept a bundled id (``"P1"``..``"P3"``), a path, or a ready scheme."""
    if isinstance(source, SchemeDefinition):
        return source
    if isinstance(source, str) and source in SCHEME_IDS:
        return bundled_scheme(source)
    return load_scheme(source)


def _dec(x: float) -> str:
    return repr(float(x))


def scheme_to_document(scheme: SchemeDefinition, provenance="optimized", meta=None) -> dict:
    return {
        "scheme_id": scheme.scheme_id,
        "free_params": {k: _dec(v) for k, v in scheme.free_params.items()},
        "coefficients": {k: _dec(v) for k, v in scheme.coefficients().items()},
        "weights": {f"w{k}": _dec(v) for k, v in enumerate(scheme.weights.as_array())},
        "aux_weights": {f"wp{k}": _dec(v) for k, v in enumerate(scheme.aux_weights)},
        "provenance": provenance,
        "meta": dict(meta or {}),
    }


def atomic_write_text(path, text: str) -> None:
    """Write via a temporary file in the same directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_scheme(path, scheme: SchemeDefinition, provenance="optimized", meta=None) -> None:
    doc = scheme_to_document(scheme, provenance=provenance, meta=meta)
    atomic_write_text(path, json.dumps(doc, indent=2) + "\n")
