"""JSON reading and writing of leveled elements.

Elements serialize as ``{"level", "base_dim", "coeffs"}`` where ``coeffs``
lists the ``n²`` entries row-major, each a list of ``d`` ``[re, im]`` pairs.
An optional ``"space"`` key embeds the base-space descriptor.
"""

from __future__ import annotations

import json
import math

import numpy as np

from . import spaces as sp
from .errors import DimensionMismatchError, MatorderError
from .linalg import LeveledElement


def element_to_json(x: LeveledElement, space: sp.BaseSpace | None = None) -> dict:
    n, d = x.level, x.base_dim
    flat = x.coeffs.reshape(n * n, d)
    out = {
        "level": n,
        "base_dim": d,
        "coeffs": [[[float(c.real), float(c.imag)] for c in entry] for entry in flat],
    }
    if space is not None:
        out["space"] = sp.to_json(space)
    return out


def element_from_json(data: dict, space: sp.BaseSpace) -> LeveledElement:
    """Parse an element over ``space``; raises :class:`MatorderError` subclasses on malformed input."""
    try:
        n = int(data["level"])
        d = int(data["base_dim"])
        raw = np.asarray(data["coeffs"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise DimensionMismatchError(f"malformed element JSON: {exc}") from exc
    if raw.shape != (n * n, d, 2):
        raise DimensionMismatchError(f"coeffs shape {raw.shape} does not match level {n}, base_dim {d}")
    if d != space.dim:
        raise DimensionMismatchError(f"element base_dim {d} differs from space dimension {space.dim}")
    coeffs = (raw[..., 0] + 1j * raw[..., 1]).reshape(n, n, d)
    return space.element(coeffs)


def infer_schatten_space(data: dict, p=math.inf) -> sp.BaseSpace:
    """A Schatten base ``S_p^m`` with ``m² = base_dim``, for elements given without a space."""
    d = int(data["base_dim"])
    m = math.isqrt(d)
    if m * m != d:
        raise MatorderError(f"base_dim {d} is not a square; pass a space file")
    return sp.schatten(p, m)


def load_json(path) -> dict:
    with open(path) as fh:
        return json.load(fh)
