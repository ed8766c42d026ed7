"""The halfspace eigenvalue curve and the Gaussian Faber-Krahn profile.

The first Dirichlet eigenvalue of the Ornstein-Uhlenbeck operator on the
halfline ``(-inf, r)`` equals the ground state of the Schrodinger operator
``-w'' + (x^2/4 - 1/2) w`` with ``w(r) = 0``.  That form is symmetric, so it
is discretized as a tridiagonal matrix and solved by Sturm-count bisection.
An independent shooting solver on the original ODE provides the oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import PchipInterpolator
from scipy.linalg import eigh_tridiagonal
from scipy.optimize import brentq
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .exceptions import DomainError, SolverError
from .gauss import phi, phi_inv

DEFAULT_STEP = 1e-3
DEFAULT_TAIL = 12.0

__all__ = [
    "lambda_halfline",
    "lambda2_halfline",
    "halfline_eigenfunction",
    "shooting_eigenvalue",
    "g_profile",
    "g_inverse",
    "lipschitz_forward_check",
    "convexity_check",
    "local_lipschitz_L",
    "ProfileTable",
    "FaberKrahnProfile",
]


def _left_end(r, l_tail):
    return min(r - l_tail, -l_tail)


def _tridiagonal(r, step, l_tail):
    if not math.isfinite(r):
        raise DomainError("threshold r must be finite")
    if not (0 < step <= 1e-2):
        raise DomainError("step must lie in (0, 1e-2], got %r" % (step,))
    if l_tail < 12.0:
        raise DomainError("truncation length must be at least 12")
    a = _left_end(r, l_tail)
    n = int(round((r - a) / step))
    h = (r - a) / n
    x = a + h * np.arange(1, n)
    diag = 2.0 / h ** 2 + 0.25 * x * x - 0.5
    off = np.full(n - 2, -1.0 / h ** 2)
    return x, diag, off


def _halfline_eig(r, step, l_tail, index):
    x, d, e = _tridiagonal(r, step, l_tail)
    try:
        w = eigh_tridiagonal(d, e, eigvals_only=True, select="i",
                             select_range=(index, index), tol=1e-14)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise SolverError("tridiagonal bisection failed: %s" % exc) from exc
    return float(w[0])


def lambda_halfline(r: float, step: float = DEFAULT_STEP, l_tail: float = DEFAULT_TAIL) -> float:
    """First Dirichlet eigenvalue of -Delta_gamma on ``(-inf, r)``.

    Second-order finite differences of the Schrodinger form on
    ``[min(r, 0) - l_tail, r]``; error is about ``0.1 * step**2``.
    """
    return _halfline_eig(float(r), step, l_tail, 0)


def lambda2_halfline(r: float, step: float = DEFAULT_STEP, l_tail: float = DEFAULT_TAIL) -> float:
    """Second Dirichlet eigenvalue on ``(-inf, r)`` (Sturm index 1)."""
    return _halfline_eig(float(r), step, l_tail, 1)


def halfline_eigenfunction(r: float, step: float = DEFAULT_STEP, l_tail: float = DEFAULT_TAIL):
    """First eigenpair on ``(-inf, r)`` with the OU eigenfunction.

    Returns ``(lam, x, u)`` where ``u >= 0`` is normalized in
    ``L^2(gamma_1)``; it is recovered from the Schrodinger ground state
    ``v`` as ``u = (2 pi)^{1/4} exp(x^2/4) v``.
    """
    x, d, e = _tridiagonal(float(r), step, l_tail)
    lam, v = eigh_tridiagonal(d, e, select="i", select_range=(0, 0))
    v = v[:, 0]
    h = x[1] - x[0]
    v = v / math.sqrt(np.sum(v * v) * h)
    if v[np.argmax(np.abs(v))] < 0:
        v = -v
    u = (2.0 * math.pi) ** 0.25 * np.exp(0.25 * x * x) * v
    return float(lam[0]), x, np.clip(u, 0.0, None)


# -- shooting oracle -------------------------------------------------------

def _shoot(r, lam, a):
    """Integrate -u'' + x u' = lam u leftward from u(r)=0, u'(r)=-1."""

    def rhs(x, y):
        return (y[1], x * y[1] - lam * y[0])

    sol = solve_ivp(rhs, (r, a), (0.0, -1.0), method="DOP853",
                    rtol=1e-12, atol=1e-14, dense_output=True)
    if not sol.success:  # pragma: no cover
        raise SolverError("shooting integration failed: %s" % sol.message)
    return sol


def _node_count(r, lam, a, samples=4000):
    sol = _shoot(r, lam, a)
    xs = np.linspace(r, a, samples)[1:]
    u = sol.sol(xs)[0]
    return int(np.count_nonzero(np.diff(np.sign(u)) != 0)) + (1 if u[-1] == 0 else 0), sol


def shooting_eigenvalue(r: float, index: int = 0, l_tail: float = DEFAULT_TAIL,
                        xtol: float = 1e-13) -> float:
    """Dirichlet eigenvalue number ``index`` (0-based) on ``(-inf, r)`` by shooting.

    Works directly on the OU equation, without the Schrodinger
    substitution.  The number of nodes of the trial solution on
    ``(r - l_tail, r)`` counts the eigenvalues below the trial value; node
    counting brackets the eigenvalue, then Brent's method on the far-end
    value of the solution pins it.
    """
    r = float(r)
    a = _left_end(r, l_tail)

    def nodes(lam):
        return _node_count(r, lam, a)[0]

    lo, hi = 0.0, 1.0
    while nodes(hi) <= index:
        lo, hi = hi, 2.0 * hi
        if hi > 1e6:  # pragma: no cover
            raise SolverError("no eigenvalue bracket found")
    while hi - lo > 1e-3 * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if nodes(mid) <= index:
            lo = mid
        else:
            hi = mid

    def end_value(lam):
        return _shoot(r, lam, a).y[0, -1]

    return float(brentq(end_value, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps))


# -- profile and its regularity --------------------------------------------

def g_profile(m: float, step: float = DEFAULT_STEP) -> float:
    """Faber-Krahn profile: eigenvalue of the halfspace of Gaussian measure ``m``."""
    return lambda_halfline(phi_inv(m), step)


def g_inverse(lam: float, bracket=(1e-6, 1 - 1e-6), step: float = DEFAULT_STEP,
              xtol: float = 1e-9, profile=None) -> float:
    """Measure ``m`` in ``bracket`` with ``g(m) = lam``, by bisection.

    ``profile`` may be any callable ``m -> g(m)`` (e.g. a fitted
    :class:`FaberKrahnProfile`); by default the direct solver is used.
    """
    g = profile if profile is not None else (lambda m: g_profile(m, step))
    lo, hi = bracket
    if not (0 < lo < hi < 1):
        raise DomainError("bracket must satisfy 0 < m_lo < m_hi < 1")
    g_lo, g_hi = g(lo), g(hi)
    if not (g_hi <= lam <= g_lo):
        raise DomainError("eigenvalue %.6g outside profile range [%.6g, %.6g] on bracket"
                          % (lam, g_hi, g_lo))
    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        if g(mid) > lam:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def lipschitz_forward_check(r: float, h: float, step: float = DEFAULT_STEP,
                            solver_tol: float = 1e-6):
    """Check ``0 <= (L(r-h) - L(r))/h <= sqrt(L(r)) + h/4`` for the eigenvalue curve.

    ``solver_tol`` is the absolute accuracy of the eigensolver at ``step``;
    the comparison slack is ``10 * solver_tol / h``.
    Returns ``(ratio, bound, ok)``.
    """
    if not (0 < h <= 1):
        raise DomainError("h must lie in (0, 1]")
    lam_r = lambda_halfline(r, step)
    ratio = (lambda_halfline(r - h, step) - lam_r) / h
    bound = math.sqrt(lam_r) + h / 4.0
    tol = 10.0 * solver_tol / h
    return ratio, bound, bool(-tol <= ratio <= bound + tol)


def convexity_check(r_grid, values=None, step: float = DEFAULT_STEP, tol: float = 1e-4):
    """Minimum centred second difference of the eigenvalue curve on a uniform grid.

    ``values`` may supply precomputed curve values (any sequence aligned
    with ``r_grid``).  Returns ``(min_second_difference, ok)``.
    """
    r_grid = np.asarray(r_grid, dtype=float)
    if r_grid.size < 3:
        raise ValueError("need at least 3 points")
    d = np.diff(r_grid)
    if not np.allclose(d, d[0], rtol=1e-9, atol=1e-12):
        raise ValueError("r_grid must be uniformly spaced")
    if values is None:
        values = [lambda_halfline(r, step) for r in r_grid]
    values = np.asarray(values, dtype=float)
    second = values[:-2] - 2.0 * values[1:-1] + values[2:]
    smin = float(second.min())
    return smin, bool(smin >= -tol)


@dataclass
class LipschitzEstimate:
    value: float
    m_lo: float
    m_hi: float
    samples: np.ndarray = field(repr=False)
    slopes: np.ndarray = field(repr=False)

    def __float__(self):
        return self.value


def local_lipschitz_L(m_lo: float, m_hi: float, samples: int = 64, profile=None,
                      step: float = DEFAULT_STEP) -> LipschitzEstimate:
    """Largest ``L`` with ``g(a) - g(b) >= L (b - a)`` for sampled ``a < b`` in ``(m_lo, m_hi]``.

    The interval is sampled half-open: ``m_lo + k (m_hi - m_lo)/samples``
    for ``k = 1..samples``.  Any chord slope is an average of consecutive
    slopes, so the minimum consecutive decrement slope is exact for the
    sampled set.
    """
    if not (0 < m_lo < m_hi < 1):
        raise DomainError("need 0 < m_lo < m_hi < 1")
    if samples < 2:
        raise ValueError("need at least 2 samples")
    g = profile if profile is not None else (lambda m: g_profile(m, step))
    ms = m_lo + (m_hi - m_lo) * np.arange(1, samples + 1) / samples
    gs = np.array([g(m) for m in ms])
    slopes = -np.diff(gs) / np.diff(ms)
    return LipschitzEstimate(float(slopes.min()), m_lo, m_hi, ms, slopes)


@dataclass(frozen=True)
class ProfileTable:
    """Tabulated eigenvalue curve with first and second eigenvalues."""

    r_samples: np.ndarray
    lambda_samples: np.ndarray
    lambda2_samples: np.ndarray
    step: float
    l_tail: float

    def __post_init__(self):
        if np.any(np.diff(self.r_samples) <= 0):
            raise ValueError("r_samples must be strictly increasing")
        if np.any(self.lambda_samples <= 0):
            raise ValueError("eigenvalues must be positive")
        if np.any(np.diff(self.lambda_samples) >= 0):
            raise ValueError("eigenvalue curve must be strictly decreasing")

    @property
    def m_samples(self):
        return phi(self.r_samples)

    def to_csv(self, path_or_buf=None):
        """Write columns ``r, lambda1, lambda2, m, g``; return the text when no target is given."""
        import csv
        import io

        if path_or_buf is None:
            buf = io.StringIO()
            self.to_csv(buf)
            return buf.getvalue()
        own = isinstance(path_or_buf, (str, bytes)) or hasattr(path_or_buf, "__fspath__")
        fh = open(path_or_buf, "w", newline="") if own else path_or_buf
        try:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["r", "lambda1", "lambda2", "m", "g"])
            for r, l1, l2, m in zip(self.r_samples, self.lambda_samples,
                                    self.lambda2_samples, self.m_samples):
                w.writerow([repr(float(r)), repr(float(l1)), repr(float(l2)),
                            repr(float(m)), repr(float(l1))])
        finally:
            if own:
                fh.close()


class FaberKrahnProfile(BaseEstimator):
    """Cached Faber-Krahn profile ``g = Lambda o phi_inv``.

    ``fit`` tabulates the eigenvalue curve on a uniform ``r`` grid; the
    profile is then evaluated by monotone cubic interpolation of
    ``log Lambda``, falling back to a direct solve outside the table.

    Parameters
    ----------
    r_min, r_max, r_step : float
        Tabulation range and spacing in ``r``.
    step : float
        Finite-difference step of the 1-D solver.
    l_tail : float
        Truncation length of the halfline.
    with_second : bool
        Also tabulate the second eigenvalue.
    """

    def __init__(self, r_min=-4.0, r_max=4.0, r_step=0.02, step=DEFAULT_STEP,
                 l_tail=DEFAULT_TAIL, with_second=False):
        self.r_min = r_min
        self.r_max = r_max
        self.r_step = r_step
        self.step = step
        self.l_tail = l_tail
        self.with_second = with_second

    def fit(self, X=None, y=None):
        n = int(round((self.r_max - self.r_min) / self.r_step))
        rs = np.linspace(self.r_min, self.r_max, n + 1)
        l1 = np.array([lambda_halfline(r, self.step, self.l_tail) for r in rs])
        if self.with_second:
            l2 = np.array([lambda2_halfline(r, self.step, self.l_tail) for r in rs])
        else:
            l2 = np.full_like(l1, np.nan)
        self.table_ = ProfileTable(rs, l1, l2, self.step, self.l_tail)
        self._interp = PchipInterpolator(rs, np.log(l1), extrapolate=False)
        return self

    def lambda_of_r(self, r):
        """Eigenvalue curve at ``r`` (scalar or array)."""
        check_is_fitted(self, "table_")
        r = np.asarray(r, dtype=float)
        flat = np.exp(self._interp(r.reshape(-1)))
        for i in np.flatnonzero(~np.isfinite(flat)):
            flat[i] = lambda_halfline(float(r.reshape(-1)[i]), self.step, self.l_tail)
        return float(flat[0]) if r.ndim == 0 else flat.reshape(r.shape)

    def predict(self, m):
        """Profile ``g(m)`` for measures ``m`` in ``(0, 1)``."""
        return self.lambda_of_r(phi_inv(m))

    __call__ = predict

    def inverse(self, lam, bracket=(1e-6, 1 - 1e-6)):
        check_is_fitted(self, "table_")
        return g_inverse(lam, bracket, profile=self.predict)
