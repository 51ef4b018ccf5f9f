"""JSON file format for crossed modules.

::

    {
      "name": "example",
      "h": {"basis": ["a0", "a1"], "brackets": [[i, j, k, value], ...]},
      "g": {"basis": [...], "brackets": [...]},
      "phi": [[...], ...],              # dim g rows, dim h columns
      "rho": [[x, a, b, value], ...]    # e_x . e_a has e_b-coefficient value
    }

Bracket entries are 0-based ``(i, j, k, value)`` with ``[e_i, e_j]`` having
``e_k``-coefficient ``value``; entries with ``i < j`` suffice.
"""

import json

import numpy as np

from .crossed_module import CrossedModule
from .lie_core import DimensionError, LieAlgebra


class SchemaError(ValueError):
    """The document does not follow the crossed-module file format."""


def _algebra_from_dict(doc, key):
    try:
        part = doc[key]
        names = [str(n) for n in part["basis"]]
        triples = part.get("brackets", [])
    except (KeyError, TypeError, AttributeError) as exc:
        raise SchemaError(f"'{key}' needs 'basis' and 'brackets'") from exc
    for entry in triples:
        if not isinstance(entry, (list, tuple)) or len(entry) != 4:
            raise SchemaError(f"'{key}.brackets' entries must be [i, j, k, value], got {entry!r}")
    try:
        return LieAlgebra.from_triples(names, triples)
    except (DimensionError, ValueError, TypeError) as exc:
        raise SchemaError(f"'{key}': {exc}") from exc


def _algebra_to_dict(L):
    return {"basis": list(L.basis_names), "brackets": L.to_triples()}


def crossed_module_from_dict(doc):
    if not isinstance(doc, dict):
        raise SchemaError("top level must be an object")
    h = _algebra_from_dict(doc, "h")
    g = _algebra_from_dict(doc, "g")
    try:
        phi = np.array(doc.get("phi", np.zeros((g.dim, h.dim))), dtype=float)
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"'phi' is not a numeric matrix: {exc}") from exc
    if phi.size == 0:
        phi = np.zeros((g.dim, h.dim))
    if phi.shape != (g.dim, h.dim):
        raise SchemaError(f"'phi' has shape {phi.shape}, expected {(g.dim, h.dim)}")
    rho = np.zeros((g.dim, h.dim, h.dim))
    for entry in doc.get("rho", []):
        try:
            x, a, b, value = entry
            x, a, b = int(x), int(a), int(b)
            value = float(value)
        except (TypeError, ValueError) as exc:
            raise SchemaError(f"'rho' entries must be [x, a, b, value], got {entry!r}") from exc
        if not (0 <= x < g.dim and 0 <= a < h.dim and 0 <= b < h.dim):
            raise SchemaError(f"'rho' entry {entry!r} out of range")
        rho[x, a, b] += value
    return CrossedModule(h, g, phi, rho, name=str(doc.get("name", "crossed-module")))


def crossed_module_to_dict(cm):
    rho = [[int(x), int(a), int(b), float(cm.rho[x, a, b])]
           for x, a, b in zip(*np.nonzero(cm.rho))]
    return {
        "name": cm.name,
        "h": _algebra_to_dict(cm.h),
        "g": _algebra_to_dict(cm.g),
        "phi": cm.phi.tolist(),
        "rho": rho,
    }


def load_json(path):
    """Parse a crossed-module file.  Raises ``OSError`` or :class:`SchemaError`."""
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: invalid JSON ({exc})") from exc
    return crossed_module_from_dict(doc)


def save_json(cm, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(crossed_module_to_dict(cm), fh, indent=2, sort_keys=True)
        fh.write("\n")


def parse_point(text, dim):
    """Comma-separated reals -> vector of length ``dim``."""
    try:
        values = [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise SchemaError(f"cannot parse point {text!r}: {exc}") from exc
    if len(values) != dim:
        raise SchemaError(f"point has {len(values)} coordinates, expected {dim}")
    return np.array(values)
