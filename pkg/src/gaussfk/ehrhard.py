"""Ehrhard symmetrization of grid sets and grid functions.

Along a direction ``h`` every line section ``J`` of a set is replaced by the
halfline ``(-inf, phi_inv(gamma_1(J)))`` in the coordinate ``t = x . h``.
On the grid a line is a row of cells with exact 1-D Gaussian weights ``w``
and cumulative weights ``C``; the packed section keeps cell ``j`` iff its
mass midpoint ``C_{j-1} + w_j / 2`` lies below the section measure.  The
function rearrangement evaluates ``sup{c : gamma_1({u > c}) > p_j}`` at the
same mass midpoints ``p_j``, so superlevel sets of ``u*`` are exactly the
symmetrized superlevel sets of ``u``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage
from sklearn.base import BaseEstimator, TransformerMixin

from ._validation import check_direction, check_grid_function
from .eigen import dirichlet_energy
from .exceptions import UnsupportedDimensionError
from .gauss import DomainMask, GaussianGrid

__all__ = [
    "symmetrize_set",
    "symmetrize_function",
    "polya_szego_check",
    "line_decomposition",
    "EhrhardSymmetrizer",
]

# Polya-Szego slack: energies may grow by at most this many cells' worth.
PS_SLACK = 1.0


@dataclass(frozen=True)
class LineDecomposition:
    """Traces of a grid array along an axis, lines flattened to rows."""

    traces: np.ndarray
    weights: np.ndarray
    axis: int
    sign: int

    @property
    def line_mass(self):
        return float(self.weights.sum())


def line_decomposition(values, grid: GaussianGrid, h=0) -> LineDecomposition:
    """Split a grid array into lines along an axis-aligned direction."""
    _, axis, sign = check_direction(h, grid.dim)
    if axis is None:
        raise ValueError("line decomposition needs an axis-aligned direction")
    arr = np.moveaxis(np.asarray(values), axis, -1)
    if sign < 0:
        arr = arr[..., ::-1]
    return LineDecomposition(arr.reshape(-1, grid.n), grid.axis_weights.copy(), axis, sign)


def _recompose(lines, grid, axis, sign):
    arr = lines.reshape((grid.n,) * grid.dim)
    if sign < 0:
        arr = arr[..., ::-1]
    return np.moveaxis(arr, -1, axis)


def _mass_midpoints(w):
    return np.cumsum(w) - 0.5 * w


def _pack_sets(inside_lines, w):
    s = inside_lines.astype(float) @ w
    return _mass_midpoints(w)[None, :] < s[:, None]


def _rearrange_lines(lines, w, batch=256):
    p = _mass_midpoints(w)
    out = np.empty_like(lines)
    order = np.argsort(-lines, axis=1, kind="stable")
    vals = np.take_along_axis(lines, order, axis=1)
    cum = np.cumsum(w[order], axis=1)
    n = lines.shape[1]
    for start in range(0, lines.shape[0], batch):
        c = cum[start:start + batch]
        k = np.count_nonzero(c[:, :, None] <= p[None, None, :], axis=1)
        k = np.minimum(k, n - 1)
        out[start:start + batch] = np.take_along_axis(vals[start:start + batch], k, axis=1)
    return out


def _rotation(h):
    # rotation R with R e1 = h (2-D)
    c, s = h[0], h[1]
    return np.array([[c, -s], [s, c]])


def _resample(values, grid, R, order=1):
    """Return ``v(x) = values(R x)`` on the grid by interpolation."""
    pts = grid.points().reshape(-1, grid.dim) @ R.T
    idx = (pts - grid.centers[0]) / grid.step
    out = ndimage.map_coordinates(values, idx.T, order=order, mode="constant", cval=0.0)
    return out.reshape(grid.shape)


def symmetrize_set(mask: DomainMask, h=0) -> DomainMask:
    """Ehrhard symmetrization of a mask along ``h``.

    ``h`` is an axis index, ``(axis, sign)``, a signed axis string such as
    ``"-x2"``, or a vector.  Oblique directions (2-D only) go through
    bilinear resampling of the indicator onto a grid rotated to ``e1``.
    """
    grid = mask.grid
    v, axis, sign = check_direction(h, grid.dim)
    if axis is None:
        if grid.dim != 2:
            raise UnsupportedDimensionError("oblique symmetrization is implemented in 2-D")
        R = _rotation(v)
        rotated = _resample(mask.inside.astype(float), grid, R) > 0.5
        packed = symmetrize_set(DomainMask(grid, rotated), 0)
        back = _resample(packed.inside.astype(float), grid, R.T) > 0.5
        return DomainMask(grid, back)
    dec = line_decomposition(mask.inside, grid, (axis, sign))
    packed = _pack_sets(dec.traces, dec.weights)
    return DomainMask(grid, _recompose(packed, grid, axis, sign))


def symmetrize_function(u, grid: GaussianGrid, h=0):
    """Ehrhard rearrangement of a nonnegative grid function along ``h``.

    Each line trace is replaced by its gamma_1-equimeasurable rearrangement,
    nonincreasing in ``t = x . h``.  Equal values keep their original order
    (stable sort).
    """
    u = check_grid_function(u, grid)
    if np.any(u < 0):
        raise ValueError("Ehrhard rearrangement needs a nonnegative function")
    v, axis, sign = check_direction(h, grid.dim)
    if axis is None:
        if grid.dim != 2:
            raise UnsupportedDimensionError("oblique symmetrization is implemented in 2-D")
        R = _rotation(v)
        rotated = np.clip(_resample(u, grid, R), 0.0, None)
        packed = symmetrize_function(rotated, grid, 0)
        return np.clip(_resample(packed, grid, R.T), 0.0, None)
    dec = line_decomposition(u, grid, (axis, sign))
    out = _rearrange_lines(dec.traces, dec.weights)
    return _recompose(out, grid, axis, sign)


def resampling_error(u, grid: GaussianGrid, h) -> float:
    """Relative L^2(gamma) change of ``u`` under rotate-and-back resampling."""
    v, axis, _ = check_direction(h, grid.dim)
    if axis is not None:
        return 0.0
    R = _rotation(v)
    back = _resample(_resample(u, grid, R), grid, R.T)
    w = grid.cell_weights
    den = math.sqrt(float(np.sum(w * u * u)))
    return math.sqrt(float(np.sum(w * (back - u) ** 2))) / den if den else 0.0


def polya_szego_check(u, grid: GaussianGrid, h=0, slack: float = PS_SLACK):
    """Dirichlet energy before and after symmetrization.

    ``ok`` iff ``E_after <= E_before * (1 + slack * step)``.
    Returns ``(E_before, E_after, ok)``.
    """
    us = symmetrize_function(u, grid, h)
    e0 = dirichlet_energy(u, grid)
    e1 = dirichlet_energy(us, grid)
    return e0, e1, bool(e1 <= e0 * (1.0 + slack * grid.step))


class EhrhardSymmetrizer(TransformerMixin, BaseEstimator):
    """Transformer form of the Ehrhard symmetrization.

    ``transform`` accepts a :class:`DomainMask` (returns a mask) or a
    nonnegative grid function (returns its rearrangement; ``grid`` must be
    set).
    """

    def __init__(self, direction=0, grid=None):
        self.direction = direction
        self.grid = grid

    def fit(self, X=None, y=None):
        return self

    def transform(self, X):
        if isinstance(X, DomainMask):
            return symmetrize_set(X, self.direction)
        if self.grid is None:
            raise ValueError("grid must be set to symmetrize a bare grid function")
        return symmetrize_function(X, self.grid, self.direction)
