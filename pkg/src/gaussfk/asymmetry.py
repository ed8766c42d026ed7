"""Gaussian Fraenkel asymmetry and the asymmetry-transfer check."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import minimize
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_mask
from .exceptions import DomainError, GridMismatchError, UnsupportedDimensionError
from .gauss import DomainMask, Halfspace, gauss_measure, phi_inv, symdiff_measure

__all__ = [
    "AsymmetryResult",
    "halfspace_for",
    "fraenkel_asymmetry",
    "dense_asymmetry",
    "transfer_lemma_check",
    "GaussianFraenkelAsymmetry",
]

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def halfspace_for(omega, m: float) -> Halfspace:
    """Halfspace with normal ``omega`` and Gaussian measure ``m``."""
    omega = np.asarray(omega, dtype=float)
    if abs(np.linalg.norm(omega) - 1.0) > 1e-12:
        raise DomainError("omega must be a unit vector")
    return Halfspace(omega, phi_inv(m))


@dataclass
class AsymmetryResult:
    value: float
    direction: np.ndarray
    r: float
    measure: float
    coarse_value: float
    trace: list = field(default_factory=list, repr=False)
    oracle_value: Optional[float] = None

    def __float__(self):
        return self.value


class _Objective:
    """``gamma(mask xor {x . omega < r}) / gamma(mask)`` as a function of omega."""

    def __init__(self, mask: DomainMask):
        grid = mask.grid
        w = grid.cell_weights.reshape(-1)
        ins = mask.inside.reshape(-1)
        self.points = grid.points().reshape(-1, grid.dim)
        self.m = float(np.sum(w[ins]))
        self.delta = np.where(ins, -w, w)
        self.r = phi_inv(self.m)
        self.calls = 0

    def __call__(self, omega):
        self.calls += 1
        below = self.points @ omega < self.r
        return (self.m + float(np.sum(self.delta[below]))) / self.m

    def many(self, omegas, batch=64):
        out = np.empty(len(omegas))
        for s in range(0, len(omegas), batch):
            proj = self.points @ omegas[s:s + batch].T < self.r
            out[s:s + batch] = self.m + self.delta @ proj
        self.calls += len(omegas)
        return out / self.m


def _angle_vec(a):
    return np.array([math.cos(a), math.sin(a)])


def fibonacci_sphere(n: int) -> np.ndarray:
    """Near-uniform points on the 2-sphere."""
    k = np.arange(n) + 0.5
    z = 1.0 - 2.0 * k / n
    rho = np.sqrt(1.0 - z * z)
    theta = math.pi * (3.0 - math.sqrt(5.0)) * k
    return np.stack([rho * np.cos(theta), rho * np.sin(theta), z], axis=1)


def _check_degenerate(mask):
    m = gauss_measure(mask)
    if m <= 0.0 or m >= mask.grid.total_mass * (1 - 1e-15) or m >= 1.0:
        raise DomainError("asymmetry needs 0 < gamma(mask) < box mass, got %.6g" % m)
    return m


def _golden(f, a, b, tol):
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    steps = [(c, fc), (d, fd)]
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
            steps.append((c, fc))
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
            steps.append((d, fd))
    return steps


def _coarse_basins(vals, n_starts):
    """Indices of the ``n_starts`` lowest local minima of a periodic scan."""
    left, right = np.roll(vals, 1), np.roll(vals, -1)
    local = np.flatnonzero((vals <= left) & (vals <= right))
    order = local[np.lexsort((local, vals[local]))]
    return [int(j) for j in order[:n_starts]]


FINE_PER_SPACING = 25


def fraenkel_asymmetry(mask: DomainMask, n_angles: int = 360, n_sphere: int = 2000,
                       angle_tol: float = 1e-4, audit: bool = False,
                       n_starts: int = 4) -> AsymmetryResult:
    """Gaussian Fraenkel asymmetry by coarse direction scan plus local refinement.

    2-D: ``n_angles`` equally spaced angles; the ``n_starts`` deepest scan
    basins are each rescanned at 1/25 of the spacing over one spacing either
    side, then golden-section searched on the angle to ``angle_tol`` rad.
    3-D: ``n_sphere`` Fibonacci points, then Nelder-Mead on a tangent chart.  1-D: both orientations.  The refined
    value never exceeds the coarse minimum; ties in the scan go to the
    smallest index.  With ``audit`` the 2-D dense 3600-angle oracle value is
    attached.
    """
    mask = check_mask(mask, nonempty=True)
    m = _check_degenerate(mask)
    dim = mask.grid.dim
    obj = _Objective(mask)
    trace = []
    if dim == 1:
        omegas = np.array([[1.0], [-1.0]])
        vals = obj.many(omegas)
        k = int(np.argmin(vals))
        best_val, best_dir, coarse = float(vals[k]), omegas[k], float(vals[k])
    elif dim == 2:
        angles = 2.0 * math.pi * np.arange(n_angles) / n_angles
        vals = obj.many(np.stack([np.cos(angles), np.sin(angles)], axis=1))
        k = int(np.argmin(vals))
        coarse = float(vals[k])
        trace.append(("coarse", float(angles[k]), coarse))
        spacing = 2.0 * math.pi / n_angles
        best_a, best_val = float(angles[k]), coarse
        for j in _coarse_basins(vals, n_starts):
            # raster aliasing makes the objective jagged below the scan
            # spacing, so each basin is rescanned before golden section
            fine = angles[j] + spacing * np.linspace(-1.0, 1.0, 2 * FINE_PER_SPACING + 1)
            fvals = obj.many(np.stack([np.cos(fine), np.sin(fine)], axis=1))
            i = int(np.argmin(fvals))
            trace.append(("fine", float(fine[i]), float(fvals[i])))
            if fvals[i] < best_val:
                best_a, best_val = float(fine[i]), float(fvals[i])
            df = spacing / FINE_PER_SPACING
            for a, v in _golden(lambda a: obj(_angle_vec(a)), fine[i] - df, fine[i] + df,
                                angle_tol):
                trace.append(("golden", float(a), float(v)))
                if v < best_val:
                    best_a, best_val = float(a), float(v)
        best_dir = _angle_vec(best_a)
    elif dim == 3:
        pts = fibonacci_sphere(max(n_sphere, 1000))
        vals = obj.many(pts)
        k = int(np.argmin(vals))
        coarse = float(vals[k])
        base = pts[k]
        trace.append(("coarse", base.tolist(), coarse))
        e1 = np.cross(base, [1.0, 0.0, 0.0] if abs(base[0]) < 0.9 else [0.0, 1.0, 0.0])
        e1 /= np.linalg.norm(e1)
        e2 = np.cross(base, e1)

        def chart(ab):
            v = base + ab[0] * e1 + ab[1] * e2
            return v / np.linalg.norm(v)

        spacing = math.sqrt(4.0 * math.pi / len(pts))
        simplex = np.array([[0.0, 0.0], [spacing, 0.0], [0.0, spacing]])
        opt = minimize(lambda ab: obj(chart(ab)), np.zeros(2), method="Nelder-Mead",
                       options={"initial_simplex": simplex, "xatol": angle_tol,
                                "fatol": 1e-12, "maxiter": 400})
        best_val, best_dir = coarse, base
        trace.append(("simplex", chart(opt.x).tolist(), float(opt.fun)))
        if opt.fun < best_val:
            best_val, best_dir = float(opt.fun), chart(opt.x)
    else:
        raise UnsupportedDimensionError("asymmetry is implemented for N <= 3")
    # the objective is a difference of sums and can round to just below 0
    res = AsymmetryResult(max(best_val, 0.0), np.asarray(best_dir, dtype=float), obj.r, m,
                          max(coarse, 0.0), trace)
    if audit and dim == 2:
        res.oracle_value = dense_asymmetry(mask)
    return res


def dense_asymmetry(mask: DomainMask, n_angles: int = 3600) -> float:
    """Brute-force minimum over ``n_angles`` equally spaced angles (2-D, no refinement)."""
    if mask.grid.dim != 2:
        raise UnsupportedDimensionError("dense oracle is 2-D")
    _check_degenerate(mask)
    obj = _Objective(mask)
    angles = 2.0 * math.pi * np.arange(n_angles) / n_angles
    return max(float(obj.many(np.stack([np.cos(angles), np.sin(angles)], axis=1)).min()), 0.0)


@dataclass
class TransferCheck:
    lhs: float
    rhs: float
    applicable: bool
    ok: bool
    a_e: float
    a_f: float
    c_kappa: float

    def __iter__(self):
        return iter((self.lhs, self.rhs, self.applicable, self.ok))


def transfer_lemma_check(E: DomainMask, F: DomainMask, kappa: float, tol: float = 1e-3,
                         asym=None) -> TransferCheck:
    """Asymmetry transfer between nearby sets.

    Applicable iff ``gamma(F xor E)/gamma(F) <= kappa A(F)``; then ``ok``
    iff ``A(E) >= (1 - 2 kappa)/c_kappa * A(F) - tol`` with ``c_kappa = 1``
    when ``gamma(E minus F) = 0`` and ``1 + 2 kappa`` otherwise.  When not
    applicable ``ok`` is True vacuously.  ``asym`` optionally replaces
    :func:`fraenkel_asymmetry`.
    """
    if not E.grid.same_as(F.grid):
        raise GridMismatchError("E and F live on different grids")
    if not (0.0 < kappa < 0.5):
        raise DomainError("kappa must lie in (0, 1/2)")
    asym = asym or (lambda msk: fraenkel_asymmetry(msk).value)
    a_f = asym(F)
    lhs = symdiff_measure(F, E) / gauss_measure(F)
    rhs = kappa * a_f
    applicable = lhs <= rhs
    c_kappa = 1.0 if gauss_measure(E - F) == 0.0 else 1.0 + 2.0 * kappa
    if not applicable:
        return TransferCheck(lhs, rhs, False, True, math.nan, a_f, c_kappa)
    a_e = asym(E)
    ok = a_e >= (1.0 - 2.0 * kappa) / c_kappa * a_f - tol
    return TransferCheck(lhs, rhs, True, bool(ok), a_e, a_f, c_kappa)


class GaussianFraenkelAsymmetry(BaseEstimator):
    """Estimator form of :func:`fraenkel_asymmetry`.

    Attributes
    ----------
    asymmetry_ : float
    direction_ : ndarray
        Minimizing halfspace normal.
    threshold_ : float
        ``phi_inv(gamma(mask))``.
    oracle_ : float or None
        Dense-scan value when ``audit`` is set (2-D).
    """

    def __init__(self, n_angles=360, n_sphere=2000, angle_tol=1e-4, audit=False, n_starts=4):
        self.n_angles = n_angles
        self.n_starts = n_starts
        self.n_sphere = n_sphere
        self.angle_tol = angle_tol
        self.audit = audit

    def fit(self, X, y=None):
        res = fraenkel_asymmetry(X, self.n_angles, self.n_sphere, self.angle_tol, self.audit,
                                 self.n_starts)
        self.result_ = res
        self.asymmetry_ = res.value
        self.direction_ = res.direction
        self.threshold_ = res.r
        self.oracle_ = res.oracle_value
        return self

    def predict(self, X=None):
        check_is_fitted(self, "result_")
        return self.asymmetry_
