"""Faber-Krahn deficit records, the level-set lower bound and the constant chain.

The level-set bound is

    int_0^inf f(mu(t)) A(Omega_t)^2 I(mu(t)) / (-mu'(t)) dt,

with ``f(m) = exp(phi_inv(m)^2/2) / (1 + phi_inv(m)^2)``; the deficit
dominates it divided by ``2c``, ``c`` being the unquantified constant of the
sharp Gaussian isoperimetric stability estimate.  ``c`` is never fixed
here: records report the smallest ``c`` consistent with each instance.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._validation import check_measure
from .asymmetry import fraenkel_asymmetry
from .eigen import MU_PRIME_FLOOR, EigenResult, _distribution, first_eigenpair
from .exceptions import InsufficientDataError
from .gauss import DomainMask, gauss_measure, iso_profile, phi_inv
from .profile import FaberKrahnProfile, LipschitzEstimate, local_lipschitz_L

__all__ = [
    "CSV_COLUMNS",
    "DeficitRecord",
    "MainConstant",
    "default_profile",
    "f_weight",
    "subcell_measure",
    "deficit",
    "prop31_bound",
    "resolved_measure",
    "implied_constant_c",
    "conclusion_constant",
    "main_constant",
    "exponent_fit",
]

CSV_COLUMNS = ("family", "param", "m", "lambda", "g", "D", "A", "D_A3", "D_A2",
               "prop31", "implied_c", "warnings")

A_THRESHOLD = 1e-3
DEFAULT_REL_EPS = 1e-3


@functools.lru_cache(maxsize=None)
def default_profile() -> FaberKrahnProfile:
    """Fitted profile with default settings, built once per process."""
    return FaberKrahnProfile().fit()


def f_weight(m):
    """``exp(r^2/2) / (1 + r^2)`` with ``r = phi_inv(m)``."""
    r = phi_inv(m)
    return np.exp(0.5 * np.square(r)) / (1.0 + np.square(r))


def subcell_measure(mask: DomainMask) -> Optional[float]:
    """Gaussian measure of the level-set domain with fractional boundary cells.

    Each cell contributes ``clip(1/2 - level / (h |grad level|_1), 0, 1)`` of
    its weight, the covered fraction of a cell cut by a straight interface.
    Returns None when the mask has no level set.
    """
    if mask.level is None:
        return None
    grid = mask.grid
    lv = mask.level
    h = grid.step
    grad1 = np.zeros_like(lv)
    for ax in range(grid.dim):
        grad1 += np.abs(np.gradient(lv, h, axis=ax))
    grad1 = np.maximum(grad1, 1e-12)
    frac = np.clip(0.5 - lv / (h * grad1), 0.0, 1.0)
    return float(np.sum(grid.cell_weights * frac))


@dataclass
class DeficitRecord:
    family: str
    param: float
    m: float
    lam: float
    g: float
    D: float
    A: float
    eps_disc: float
    prop31: Optional[float] = None
    implied_c: Optional[float] = None
    warnings: list = field(default_factory=list)
    residual: float = math.nan
    direction: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def ratios_defined(self):
        return self.A > A_THRESHOLD

    @property
    def D_A3(self):
        return self.D / self.A ** 3 if self.ratios_defined else None

    @property
    def D_A2(self):
        return self.D / self.A ** 2 if self.ratios_defined else None

    def row(self):
        """Values in :data:`CSV_COLUMNS` order (None for null)."""
        return (self.family, self.param, self.m, self.lam, self.g, self.D, self.A,
                self.D_A3, self.D_A2, self.prop31, self.implied_c, "; ".join(self.warnings))


def deficit(mask: DomainMask, profile=None, tol: float = 1e-8, coarse_mask: DomainMask = None,
            with_bound: bool = True, n_levels: int = 16, family: str = "", param=math.nan,
            result: EigenResult = None, asym_kwargs=None) -> DeficitRecord:
    """Deficit ``lambda(mask) - g(gamma(mask))`` and asymmetry of one mask.

    ``profile`` is a fitted :class:`~gaussfk.profile.FaberKrahnProfile` or any
    callable ``m -> g(m)``.  The discretization tolerance is
    ``max(tol, Richardson gap)`` when ``coarse_mask`` (the same shape at half
    resolution) is given, else ``1e-3 * lambda``; in both cases a
    measure-aliasing term ``|g'(m)| |m - m_subcell|`` is added.
    """
    asym_kwargs = asym_kwargs or {}
    profile = default_profile() if profile is None else profile
    notes = []
    res = result if result is not None else first_eigenpair(mask, tol=tol)
    notes += res.warnings
    m = gauss_measure(mask)
    gm = float(profile(m))
    lam = res.eigenvalue
    if coarse_mask is not None:
        lam_coarse = first_eigenpair(coarse_mask, tol=tol).eigenvalue
        eps = max(tol, abs(lam - lam_coarse))
    else:
        eps = DEFAULT_REL_EPS * lam
    msub = subcell_measure(mask)
    if msub is not None:
        dm = max(1e-6, 1e-3 * min(m, 1 - m))
        slope = abs(float(profile(min(m + dm, 1 - 1e-9))) - float(profile(max(m - dm, 1e-9)))) / (2 * dm)
        eps += slope * abs(m - msub)
    asym = fraenkel_asymmetry(mask, **asym_kwargs)
    rec = DeficitRecord(family, param, m, lam, gm, lam - gm, asym.value, eps,
                        warnings=notes, residual=res.residual, direction=asym.direction)
    if with_bound:
        bound, skipped = prop31_bound(res, n_levels=n_levels, asym_kwargs=asym_kwargs)
        rec.prop31 = bound
        if skipped:
            notes.append("prop31 skipped %d levels" % skipped)
        rec.implied_c = implied_constant_c(rec)
    return rec


def resolved_measure(grid) -> float:
    """Smallest level-set measure whose asymmetry the box can resolve.

    Truncation to the box changes the measure of any set by at most the mass
    outside the box, which moves a normalized asymmetry by up to twice that
    mass over the set's measure; below this value the shift can exceed
    :data:`A_THRESHOLD`.
    """
    return 2.0 * max(1.0 - grid.total_mass, 0.0) / A_THRESHOLD


def prop31_bound(res: EigenResult, n_levels: int = 16, asym_kwargs=None):
    """Level-set lower bound of the deficit without its ``1/(2c)`` factor.

    Midpoint rule on ``n_levels`` uniform intervals of ``[0, max u]``: at
    each midpoint ``-mu'`` is the centred difference of ``mu`` across the
    interval and ``A(Omega_t)`` is evaluated on the superlevel mask.
    Levels are skipped when ``-mu'`` is below 1e-12, when the superlevel
    set is degenerate, or when its measure is below
    :func:`resolved_measure` (box-truncation artefacts).  Skipping only
    lowers the bound.  Returns ``(value, n_skipped)``.
    """
    if n_levels > 32 or n_levels < 1:
        raise ValueError("n_levels must lie in [1, 32]")
    asym_kwargs = asym_kwargs or {}
    grid = res.mask.grid
    mu_min = resolved_measure(grid)
    edges = np.linspace(0.0, float(res.u.max()), n_levels + 1)
    mu_edges = _distribution(res.u, grid.cell_weights, edges)
    dt = edges[1] - edges[0]
    total, skipped = 0.0, 0
    for k in range(n_levels):
        slope = (mu_edges[k] - mu_edges[k + 1]) / dt
        tm = 0.5 * (edges[k] + edges[k + 1])
        level_set = DomainMask(grid, res.u > tm)
        mu = gauss_measure(level_set)
        if slope < MU_PRIME_FLOOR or not (mu_min <= mu < 1.0) or not level_set.inside.any():
            skipped += 1
            continue
        a = fraenkel_asymmetry(level_set, **asym_kwargs).value
        total += float(f_weight(mu)) * a * a * float(iso_profile(mu)) / slope * dt
    return float(total), skipped


def implied_constant_c(record: DeficitRecord) -> Optional[float]:
    """Smallest ``c`` with ``D >= bound / (2c)``; None at noise level."""
    if record.prop31 is None or record.D <= record.eps_disc or record.prop31 <= 0.0:
        return None
    if not record.ratios_defined:
        return None
    return record.prop31 / (2.0 * record.D)


def conclusion_constant(m: float, beta: float, c: float) -> float:
    """``m C_beta / (32 c (1 + r^2))`` with ``C_beta = (beta/(beta+1))^2``, ``r = phi_inv(m)``."""
    r = phi_inv(m)
    c_beta = (beta / (beta + 1.0)) ** 2
    return m * c_beta / (32.0 * c * (1.0 + r * r))


@dataclass
class MainConstant:
    """Constants of the cubic stability estimate at measure ``m``.

    ``c_assumed`` stands in for the unknown isoperimetric constant; the
    ``c``-dependent quantities are also available as functions of ``c``.
    """

    m: float
    r: float
    g: float
    lipschitz: LipschitzEstimate = field(repr=False)
    beta: float
    C_beta: float
    c_assumed: float

    @property
    def L(self):
        return self.lipschitz.value

    @property
    def branch_constant(self):
        """Constant of the small-threshold branch, ``beta/(8(1+beta)) g(m)``."""
        return self.beta / (8.0 * (1.0 + self.beta)) * self.g

    def conclusion_of_c(self, c: float) -> float:
        return conclusion_constant(self.m, self.beta, c)

    def C_m_of_c(self, c: float) -> float:
        return min(self.branch_constant, self.conclusion_of_c(c))

    @property
    def conclusion(self):
        return self.conclusion_of_c(self.c_assumed)

    @property
    def C_m(self):
        return self.C_m_of_c(self.c_assumed)

    def T0(self, A: float) -> float:
        """Threshold ``beta A m / (4 (1 + beta))`` splitting the two branches."""
        return self.beta / (4.0 * (1.0 + self.beta)) * A * self.m


def main_constant(m: float, c_assumed: float, n_samples: int = 64, profile=None) -> MainConstant:
    """Constants of the cubic stability estimate at measure ``m``.

    ``L`` is the lower Lipschitz slope of the profile on ``(m/2, m]``,
    ``beta = L m / (4 g(m))``.
    """
    m = check_measure(m)
    if not c_assumed > 0:
        raise ValueError("c_assumed must be positive")
    profile = default_profile() if profile is None else profile
    lip = local_lipschitz_L(0.5 * m, m, n_samples, profile=profile)
    gm = float(profile(m))
    beta = lip.value * m / (4.0 * gm)
    c_beta = (beta / (beta + 1.0)) ** 2
    return MainConstant(m, phi_inv(m), gm, lip, beta, c_beta, float(c_assumed))


@dataclass
class ExponentFit:
    slope: float
    intercept: float
    r2: float
    n: int


def exponent_fit(records, eps_default: float = 0.0) -> ExponentFit:
    """Least-squares slope of ``log D`` against ``log A``.

    Uses records with ``A > 1e-3`` and ``D`` above their tolerance; accepts
    :class:`DeficitRecord` objects or ``(A, D)`` pairs.
    """
    pts = []
    for rec in records:
        if isinstance(rec, DeficitRecord):
            a, d, eps = rec.A, rec.D, rec.eps_disc
        else:
            a, d = rec
            eps = eps_default
        if a > A_THRESHOLD and d > eps and d > 0:
            pts.append((math.log(a), math.log(d)))
    if len(pts) < 4:
        raise InsufficientDataError("need at least 4 usable records, got %d" % len(pts))
    x, y = np.array(pts).T
    slope, intercept = np.polyfit(x, y, 1)
    pred = slope * x + intercept
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return ExponentFit(float(slope), float(intercept), r2, len(pts))

