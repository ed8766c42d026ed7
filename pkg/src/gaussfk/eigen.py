"""First Dirichlet eigenpair of the Ornstein-Uhlenbeck operator on grid domains.

The weak form ``int grad u . grad v dgamma = lam int u v dgamma`` is
discretized on the cell-centred grid of a :class:`~gaussfk.gauss.DomainMask`:

* ``M`` is diagonal with the exact Gaussian cell measures;
* ``K`` is the flux-form stencil whose coefficient across a face is the
  Gaussian measure of the dual cell spanning the two centres, over ``h^2``.

Across a face from an inside to an outside cell the Dirichlet condition is
imposed at the interface position found by linear interpolation of the
mask's level set (boundary fraction ``theta``), which keeps ``K`` symmetric
and the scheme second order.  Without a level set the interface sits on the
face (``theta = 1/2``).  The box faces carry no condition, so ``K`` has the
constant in its kernel on the full box.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy import ndimage, special
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_grid_function, check_mask
from .exceptions import ConnectivityWarning, SolverError, UnsupportedDimensionError
from .gauss import SQRT2, DomainMask, GaussianGrid, gauss_measure, level_perimeter

THETA_MIN = 1e-2

__all__ = [
    "Operators",
    "EigenResult",
    "LevelProfile",
    "assemble",
    "first_eigenpair",
    "rayleigh",
    "dirichlet_energy",
    "level_profile",
    "coarea_energy",
    "OUDirichletEigensolver",
]


@dataclass(eq=False)
class Operators:
    """Stiffness/mass pair restricted to the unknowns of a mask.

    ``index`` maps unknowns to flat cell indices of the grid.
    """

    K: sp.csr_matrix
    M: np.ndarray
    index: np.ndarray
    mask: DomainMask

    @property
    def size(self):
        return self.index.size

    def matvec_K(self, x):
        return self.K @ x

    def matvec_M(self, x):
        return self.M * x

    def restrict(self, u):
        """Grid function -> unknown vector."""
        return np.asarray(u, dtype=float).reshape(-1)[self.index]

    def extend(self, x):
        """Unknown vector -> grid function (zero outside the mask)."""
        out = np.zeros(self.mask.grid.shape)
        out.reshape(-1)[self.index] = x
        return out


def _dual_weights(grid: GaussianGrid):
    """Gaussian measure of dual intervals between consecutive centres, per axis."""
    cdf = 0.5 * special.erfc(-grid.centers / SQRT2)
    return np.diff(cdf)


def _face_coefficients(grid: GaussianGrid, axis: int):
    """Array over faces normal to ``axis`` (shape n-1 along axis, n elsewhere)."""
    h2 = grid.step ** 2
    factors = []
    for ax in range(grid.dim):
        factors.append(_dual_weights(grid) if ax == axis else grid.axis_weights)
    out = factors[0]
    for f in factors[1:]:
        out = np.multiply.outer(out, f)
    return np.asarray(out) / h2


def _slices(dim, axis):
    lo = [slice(None)] * dim
    hi = [slice(None)] * dim
    lo[axis] = slice(0, -1)
    hi[axis] = slice(1, None)
    return tuple(lo), tuple(hi)


def _boundary_fraction(level_in, level_out):
    theta = level_in / (level_in - level_out)
    return np.clip(theta, THETA_MIN, 1.0)


def assemble(mask: DomainMask) -> Operators:
    """Assemble the Gaussian-weighted stiffness ``K`` and mass ``M`` of a mask."""
    mask = check_mask(mask, nonempty=True)
    grid = mask.grid
    if grid.dim > 3:
        raise UnsupportedDimensionError("eigensolver supports N <= 3")
    inside = mask.inside
    flat = inside.reshape(-1)
    index = np.flatnonzero(flat)
    local = np.full(flat.size, -1, dtype=np.int64)
    local[index] = np.arange(index.size)
    local = local.reshape(grid.shape)
    level = mask.level

    rows, cols, vals = [], [], []
    diag = np.zeros(index.size)
    for axis in range(grid.dim):
        c = _face_coefficients(grid, axis)
        lo, hi = _slices(grid.dim, axis)
        a_in, b_in = inside[lo], inside[hi]
        a_id, b_id = local[lo], local[hi]

        both = a_in & b_in
        cc = c[both]
        ia, ib = a_id[both], b_id[both]
        rows += [ia, ib]
        cols += [ib, ia]
        vals += [-cc, -cc]
        np.add.at(diag, ia, cc)
        np.add.at(diag, ib, cc)

        for sel, own, other_lvl, own_lvl in (
            (a_in & ~b_in, a_id, hi, lo),
            (~a_in & b_in, b_id, lo, hi),
        ):
            if not sel.any():
                continue
            if level is None:
                theta = np.full(np.count_nonzero(sel), 0.5)
            else:
                theta = _boundary_fraction(level[own_lvl][sel], level[other_lvl][sel])
            np.add.at(diag, own[sel], c[sel] / theta)

    index_rows = np.arange(index.size)
    rows.append(index_rows)
    cols.append(index_rows)
    vals.append(diag)
    K = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(index.size, index.size),
    )
    M = grid.cell_weights.reshape(-1)[index].copy()
    return Operators(K, M, index, mask)


@dataclass(eq=False)
class EigenResult:
    """Normalized nonnegative first eigenpair on a mask."""

    eigenvalue: float
    u: np.ndarray = field(repr=False)
    residual: float
    iterations: int
    mask: DomainMask = field(repr=False)
    n_components: int = 1
    warnings: list = field(default_factory=list)

    @property
    def lam(self):
        return self.eigenvalue


def _components(mask: DomainMask) -> int:
    _, n = ndimage.label(mask.inside)
    return int(n)


class _InnerSolver:
    def __init__(self, K, kind, cg_tol, cg_maxiter):
        self.K = K
        self.kind = kind
        self.cg_tol = cg_tol
        self.cg_maxiter = cg_maxiter
        if kind == "direct":
            self._lu = spla.splu(K.tocsc())
        else:
            d = K.diagonal()
            self._prec = spla.LinearOperator(K.shape, matvec=lambda x: x / d)
        self._x0 = None

    def solve(self, b):
        if self.kind == "direct":
            return self._lu.solve(b)
        x, info = spla.cg(self.K, b, x0=self._x0, rtol=self.cg_tol, atol=0.0,
                          maxiter=self.cg_maxiter, M=self._prec)
        if info != 0:
            res = float(np.linalg.norm(self.K @ x - b) / np.linalg.norm(b))
            raise SolverError("conjugate gradient stagnated (relative residual %.3g)" % res,
                              residual=res, iterations=info)
        self._x0 = x
        return x


def _m_residual(ops, x, lam):
    r = ops.K @ x / ops.M - lam * x
    return math.sqrt(float(np.dot(r * ops.M, r)))


def first_eigenpair(mask: DomainMask, tol: float = 1e-8, max_iter: int = 2000,
                    inner: str = "auto", ops: Optional[Operators] = None) -> EigenResult:
    """Smallest generalized eigenpair of ``(K, M)`` by inverse iteration (shift 0).

    The inner solve uses a sparse LU factorization (``inner="direct"``) or
    Jacobi-preconditioned conjugate gradients (``inner="cg"``); ``"auto"``
    picks LU up to 2-D.  Convergence is declared when
    ``||M^{-1} K u - lam u||_M <= tol`` with ``u^T M u = 1``.
    """
    mask = check_mask(mask, nonempty=True)
    if ops is None:
        ops = assemble(mask)
    if inner == "auto":
        inner = "direct" if mask.grid.dim <= 2 else "cg"
    if inner not in ("direct", "cg"):
        raise ValueError("inner must be 'direct', 'cg' or 'auto'")
    solver = _InnerSolver(ops.K, inner, cg_tol=min(1e-3 * tol, 1e-10), cg_maxiter=20000)

    x = np.ones(ops.size)
    x /= math.sqrt(np.dot(x * ops.M, x))
    lam, res = float(x @ (ops.K @ x)), math.inf
    it = 0
    for it in range(1, max_iter + 1):
        y = solver.solve(ops.M * x)
        nrm = math.sqrt(float(np.dot(y * ops.M, y)))
        x = y / nrm
        lam = float(x @ (ops.K @ x))
        res = _m_residual(ops, x, lam)
        if res <= tol:
            break
    else:
        raise SolverError("inverse iteration did not converge (residual %.3g)" % res,
                          residual=res, iterations=it)

    if x.sum() < 0:
        x = -x
    x = np.clip(x, 0.0, None)
    x /= math.sqrt(float(np.dot(x * ops.M, x)))
    notes = []
    ncomp = _components(mask)
    if ncomp > 1:
        msg = "mask has %d connected components" % ncomp
        warnings.warn(msg, ConnectivityWarning, stacklevel=2)
        notes.append(msg)
    return EigenResult(lam, ops.extend(x), res, it, mask, ncomp, notes)


def rayleigh(u, mask: DomainMask, ops: Optional[Operators] = None) -> float:
    """Discrete Rayleigh quotient ``u^T K u / u^T M u`` of a grid function on ``mask``."""
    mask = check_mask(mask, nonempty=True)
    u = check_grid_function(u, mask.grid)
    if ops is None:
        ops = assemble(mask)
    x = ops.restrict(u)
    den = float(np.dot(x * ops.M, x))
    if den == 0.0:
        raise ValueError("Rayleigh quotient of the zero function")
    return float(x @ (ops.K @ x)) / den


def dirichlet_energy(u, domain) -> float:
    """Gaussian Dirichlet energy ``int |grad u|^2 dgamma`` of a grid function.

    With a :class:`DomainMask`, this is ``u^T K u`` of that mask (``u`` is
    taken to vanish outside).  With a bare :class:`GaussianGrid`, the plain
    face-difference energy over the whole box is returned.
    """
    if isinstance(domain, DomainMask):
        mask = check_mask(domain, nonempty=True)
        ops = assemble(mask)
        x = ops.restrict(check_grid_function(u, mask.grid))
        return float(x @ (ops.K @ x))
    grid = domain
    u = check_grid_function(u, grid)
    total = 0.0
    for axis in range(grid.dim):
        c = _face_coefficients(grid, axis)
        d = np.diff(u, axis=axis)
        total += float(np.sum(c * d * d))
    return total


def l2_norm_sq(u, grid: GaussianGrid) -> float:
    u = check_grid_function(u, grid)
    return float(np.sum(grid.cell_weights * u * u))


@dataclass(eq=False)
class LevelProfile:
    """Distribution function of an eigenfunction on uniform thresholds."""

    t: np.ndarray
    mu: np.ndarray
    minus_mu_prime: np.ndarray
    floored: np.ndarray = field(repr=False)

    @property
    def dt(self):
        return float(self.t[1] - self.t[0])


MU_PRIME_FLOOR = 1e-12


def _distribution(u, weights, thresholds):
    """gamma({u > t}) for each threshold, from one sort of the cell values."""
    vals = u.reshape(-1)
    w = weights.reshape(-1)
    order = np.argsort(vals, kind="stable")
    vs = vals[order]
    tail = np.concatenate([np.cumsum(w[order][::-1])[::-1], [0.0]])
    pos = np.searchsorted(vs, thresholds, side="right")
    return tail[pos]


def level_profile(res: EigenResult, n_levels: int = 64) -> LevelProfile:
    """Sample ``mu(t) = gamma({u > t})`` at ``n_levels`` uniform thresholds in ``[0, max u]``.

    ``-mu'`` is estimated by centred differences (one-sided at the ends);
    entries below ``MU_PRIME_FLOOR`` are flagged.
    """
    if n_levels < 8:
        raise ValueError("n_levels must be at least 8")
    grid = res.mask.grid
    umax = float(res.u.max())
    t = np.linspace(0.0, umax, n_levels)
    mu = _distribution(res.u, grid.cell_weights, t)
    mmp = -np.gradient(mu, t)
    floored = mmp < MU_PRIME_FLOOR
    return LevelProfile(t, mu, mmp, floored)


def coarea_energy(res: EigenResult, n_levels: int = 64) -> float:
    """``(1/2pi) int P_gamma({u > t})^2 / (-mu'(t)) dt`` by the midpoint rule.

    Cauchy-Schwarz on each level set gives this as a lower bound of the
    Dirichlet energy, with equality when ``|grad u|`` is constant on level
    sets (halfspaces).  The ``1/2pi`` comes from the normalizations: the
    perimeter carries ``(2 pi)^{-(N-1)/2}`` while ``gamma`` carries
    ``(2 pi)^{-N/2}``, so each of the two coarea integrals is off by
    ``sqrt(2 pi)``.  Near a nondegenerate maximum of ``u`` the sampled
    ``-mu'`` is poorly resolved, so off the equality case the estimate is
    a diagnostic, not a certified bound.
    """
    grid = res.mask.grid
    umax = float(res.u.max())
    edges = np.linspace(0.0, umax, n_levels + 1)
    mu = _distribution(res.u, grid.cell_weights, edges)
    dt = edges[1] - edges[0]
    total = 0.0
    for k in range(n_levels):
        dmu = mu[k] - mu[k + 1]
        if dmu / dt < MU_PRIME_FLOOR:
            continue
        tm = 0.5 * (edges[k] + edges[k + 1])
        per = level_perimeter(res.u, grid, tm)
        total += per * per * dt * dt / dmu
    return total / (2.0 * math.pi)


class OUDirichletEigensolver(BaseEstimator):
    """Estimator wrapper around :func:`first_eigenpair`.

    Parameters
    ----------
    tol : float
        Target M-residual of the eigenpair.
    max_iter : int
        Inverse-iteration cap.
    inner : {"auto", "direct", "cg"}
        Inner linear solver.

    Attributes
    ----------
    eigenvalue_ : float
    eigenfunction_ : ndarray
        Nonnegative, ``int u^2 dgamma = 1``, zero outside the mask.
    residual_, n_iter_, warnings_
    """

    def __init__(self, tol=1e-8, max_iter=2000, inner="auto"):
        self.tol = tol
        self.max_iter = max_iter
        self.inner = inner

    def fit(self, X, y=None):
        res = first_eigenpair(X, tol=self.tol, max_iter=self.max_iter, inner=self.inner)
        self.result_ = res
        self.eigenvalue_ = res.eigenvalue
        self.eigenfunction_ = res.u
        self.residual_ = res.residual
        self.n_iter_ = res.iterations
        self.warnings_ = list(res.warnings)
        self.measure_ = gauss_measure(X)
        return self

    def predict(self, X=None):
        check_is_fitted(self, "result_")
        return self.eigenvalue_

    def level_profile(self, n_levels=64):
        check_is_fitted(self, "result_")
        return level_profile(self.result_, n_levels)
