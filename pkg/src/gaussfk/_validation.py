"""Input validation helpers shared by the estimators."""

from __future__ import annotations

import math

import numpy as np

from .exceptions import DomainError, GridMismatchError


def check_measure(m, name="m"):
    m = float(m)
    if not (0.0 < m < 1.0) or not math.isfinite(m):
        raise DomainError("%s must lie in (0, 1), got %r" % (name, m))
    return m


def check_mask(mask, nonempty=False):
    from .gauss import DomainMask

    if not isinstance(mask, DomainMask):
        raise TypeError("expected a DomainMask, got %s" % type(mask).__name__)
    if nonempty and not mask.inside.any():
        raise DomainError("mask is empty")
    return mask


def check_grid_function(u, grid):
    u = np.asarray(u, dtype=float)
    if u.shape != grid.shape:
        raise GridMismatchError("grid function has shape %s, grid is %s" % (u.shape, grid.shape))
    if not np.all(np.isfinite(u)):
        raise ValueError("grid function has non-finite values")
    return u


def check_direction(h, dim):
    """Normalize a direction given as an axis index, signed axis string or vector.

    Returns ``(vector, axis, sign)``; ``axis`` is ``None`` for oblique
    directions.
    """
    if isinstance(h, str):
        s = h.strip().lower()
        sign = -1 if s.startswith("-") else 1
        s = s.lstrip("+-")
        # "x2" / "e2" are 1-based coordinate names, a bare digit is an index
        base = 0
        if s[:1] in ("e", "x"):
            s, base = s[1:], 1
        axis = int(s) - base if s.isdigit() else None
        if axis is None:
            parts = [float(p) for p in h.replace("/", ",").split(",")]
            return check_direction(np.asarray(parts), dim)
        h = axis if sign > 0 else (axis, -1)
    if isinstance(h, (int, np.integer)):
        axis, sign = int(h), 1
    elif isinstance(h, tuple) and len(h) == 2 and isinstance(h[0], (int, np.integer)):
        axis, sign = int(h[0]), int(np.sign(h[1]))
    else:
        v = np.asarray(h, dtype=float).reshape(-1)
        if v.size != dim:
            raise DomainError("direction has %d components on a %d-D grid" % (v.size, dim))
        nrm = np.linalg.norm(v)
        if nrm == 0:
            raise DomainError("zero direction")
        v = v / nrm
        hits = np.flatnonzero(np.abs(np.abs(v) - 1.0) < 1e-12)
        if hits.size == 1:
            axis = int(hits[0])
            return v, axis, int(np.sign(v[axis]))
        return v, None, 0
    if not 0 <= axis < dim:
        raise DomainError("axis %d out of range for a %d-D grid" % (axis, dim))
    v = np.zeros(dim)
    v[axis] = sign
    return v, axis, sign
