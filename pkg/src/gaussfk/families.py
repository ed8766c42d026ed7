"""One-parameter domain families degenerating to a halfspace, and a small
shape language for naming masks on the command line.

Every shape is a level-set function of the stacked point array (negative
inside); masks carry it so the eigensolver can locate the boundary inside
cells.  Families act on the first two coordinates and are rotated by
``rotation`` radians so no boundary sits on a lattice line (cell centres on
the boundary would be dropped by the tie rule).

Shape strings look like ``wedge:theta=2.356`` or
``halfspace:omega=0.6/0.8,r=0.3``; ``name:key=value,...`` with vector
components separated by ``/``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError
from .gauss import DomainMask, GaussianGrid, gauss_measure

__all__ = [
    "FAMILIES",
    "DEFAULT_PARAMS",
    "family_level",
    "domain_family",
    "parse_shape",
    "shape_mask",
    "FamilyMember",
]

DEFAULT_ROTATION = 0.1


def _rotate(points, rotation):
    if rotation == 0.0:
        return points[..., 0], points[..., 1]
    c, s = math.cos(rotation), math.sin(rotation)
    x, y = points[..., 0], points[..., 1]
    return c * x + s * y, -s * x + c * y


def _wedge(theta):
    """Cone of opening ``theta`` around the -e1 axis (signed distance)."""
    if not (0.0 < theta < 2.0 * math.pi):
        raise DomainError("wedge opening must lie in (0, 2 pi)")

    def level(x, y):
        rho = np.hypot(x, y)
        excess = np.abs(np.arctan2(y, -x)) - 0.5 * theta
        dist = np.where(np.abs(excess) < 0.5 * math.pi, rho * np.sin(np.abs(excess)), rho)
        return np.sign(excess) * dist

    return level


def _tilted_cap(phi_angle, r0=0.5):
    c, s = math.cos(phi_angle), math.sin(phi_angle)
    return lambda x, y: np.maximum(x - r0, c * x + s * y - r0)


def _bump(a, r0=0.0, width=0.5):
    return lambda x, y: x - r0 - a * np.exp(-0.5 * (y / width) ** 2)


def _notch(a):
    if a == 0.0:
        return lambda x, y: x
    return lambda x, y: np.maximum(x, a - np.hypot(x, y))


def _two_slabs(d):
    if d == 0.0:
        return lambda x, y: x
    return lambda x, y: np.minimum(x + d, np.maximum(-x, x - d))


def _ball_complement(k, r0=0.0):
    """Complement of the ball of curvature ``k`` tangent to ``{x1 = r0}`` from the right."""
    if k == 0.0:
        return lambda x, y: x - r0
    rad = 1.0 / k
    return lambda x, y: rad - np.hypot(x - r0 - rad, y)


FAMILIES = {
    "wedge": _wedge,
    "tilted-cap": _tilted_cap,
    "bump": _bump,
    "notch": _notch,
    "two-slabs": _two_slabs,
    "shifted-ball-complement": _ball_complement,
}

# Parameter paths; the first entry of each is the limiting halfspace.
DEFAULT_PARAMS = {
    "wedge": (math.pi, 7 * math.pi / 8, 3 * math.pi / 4, 5 * math.pi / 8, math.pi / 2),
    "tilted-cap": (0.0, math.pi / 8, math.pi / 4, 3 * math.pi / 8, math.pi / 2),
    "bump": (0.0, 0.2, 0.4, 0.6, 0.8),
    "notch": (0.0, 0.25, 0.5, 0.75, 1.0),
    "two-slabs": (0.0, 0.1, 0.2, 0.3, 0.4),
    "shifted-ball-complement": (0.0, 0.25, 0.5, 1.0, 2.0),
}

HALFSPACE_PARAM = {name: params[0] for name, params in DEFAULT_PARAMS.items()}


def family_level(name, param, rotation=DEFAULT_ROTATION):
    """Level-set callable ``points -> values`` of one family member."""
    try:
        make = FAMILIES[name]
    except KeyError:
        raise DomainError("unknown family %r; known: %s" % (name, ", ".join(sorted(FAMILIES))))
    base = make(float(param))

    def level(points):
        if points.shape[-1] < 2:
            raise DomainError("families need N >= 2")
        x, y = _rotate(points, rotation)
        return base(x, y)

    return level


@dataclass(eq=False)
class FamilyMember:
    family: str
    param: float
    mask: DomainMask
    rotation: float = DEFAULT_ROTATION

    @property
    def is_halfspace(self):
        return self.param == HALFSPACE_PARAM[self.family]

    def regrid(self, grid: GaussianGrid) -> DomainMask:
        return grid.mask_from_level(family_level(self.family, self.param, self.rotation))


def domain_family(name, grid: GaussianGrid, params=None, rotation=DEFAULT_ROTATION):
    """Masks of a family along its parameter path, sorted by parameter.

    The halfspace end of every default path is included.  Members must have
    measure in ``[0.05, 0.95]``.
    """
    if name not in FAMILIES:
        raise DomainError("unknown family %r" % (name,))
    params = DEFAULT_PARAMS[name] if params is None else params
    out = []
    for p in sorted(float(q) for q in params):
        mask = grid.mask_from_level(family_level(name, p, rotation))
        m = gauss_measure(mask)
        if not 0.05 <= m <= 0.95:
            raise DomainError("%s(%g) has measure %.4f outside [0.05, 0.95]" % (name, p, m))
        out.append(FamilyMember(name, p, mask, rotation))
    return out


# -- shape language -------------------------------------------------------

def _parse_value(text):
    if "/" in text:
        return np.array([float(v) for v in text.split("/")])
    return float(text)


def parse_shape(spec: str):
    """``"name:key=val,key=val"`` -> ``(name, {key: value})``."""
    spec = spec.strip()
    name, _, rest = spec.partition(":")
    params = {}
    for item in filter(None, (p.strip() for p in rest.split(","))):
        key, eq, val = item.partition("=")
        if not eq:
            raise DomainError("malformed shape parameter %r" % (item,))
        params[key.strip()] = _parse_value(val.strip())
    return name.strip(), params


def _shape_level(name, params, dim):
    if name == "halfspace":
        omega = params.get("omega")
        if omega is None:
            ang = params.get("angle", 0.0)
            omega = np.zeros(dim)
            omega[0], omega[min(1, dim - 1)] = (math.cos(ang), math.sin(ang)) if dim > 1 else (1.0, 1.0)
        omega = np.atleast_1d(np.asarray(omega, dtype=float))
        omega = omega / np.linalg.norm(omega)
        r = params.get("r", 0.0)
        return lambda p: p @ omega - r
    if name in ("ball", "disk"):
        c = np.atleast_1d(np.asarray(params.get("center", np.zeros(dim)), dtype=float))
        rad = params.get("radius", 1.0)
        return lambda p: np.linalg.norm(p - c, axis=-1) - rad
    if name == "interval":
        a, b = params.get("a", -1.0), params.get("b", 1.0)
        return lambda p: np.maximum(a - p[..., 0], p[..., 0] - b)
    raise DomainError("unknown shape %r" % (name,))


def shape_mask(spec: str, grid: GaussianGrid) -> DomainMask:
    """Rasterize a shape string on ``grid``."""
    name, params = parse_shape(spec)
    rotation = params.pop("rotation", None)
    if name in FAMILIES:
        if len(params) != 1:
            raise DomainError("family shapes take exactly one parameter, got %r" % (params,))
        (value,) = params.values()
        level = family_level(name, value, DEFAULT_ROTATION if rotation is None else rotation)
    else:
        level = _shape_level(name, params, grid.dim)
    return grid.mask_from_level(level)
