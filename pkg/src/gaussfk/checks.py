"""Invariant suites run by ``gaussfk check``.

Each suite returns a :class:`CheckResult`; tolerances are parameters so
callers can state them explicitly.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from .asymmetry import dense_asymmetry, fraenkel_asymmetry, transfer_lemma_check
from .deficit import deficit, default_profile
from .ehrhard import polya_szego_check, symmetrize_set
from .eigen import first_eigenpair
from .families import FAMILIES, domain_family, family_level
from .gauss import (GaussianGrid, Halfspace, gauss_measure, gauss_perimeter, iso_profile,
                    perimeter_tolerance, phi_inv, symdiff_measure)
from .profile import convexity_check, lambda2_halfline, lambda_halfline, shooting_eigenvalue

__all__ = ["CheckResult", "corpus", "profile_anchors", "solver_agreement", "profile_regularity",
           "halfspace_consistency", "faber_krahn", "isoperimetric", "ehrhard_suite",
           "asymmetry_suite", "transfer_suite", "random_bumps", "run_all", "SUITES"]


@dataclass
class CheckResult:
    name: str
    ok: bool
    failures: int = 0
    trials: int = 0
    seconds: float = 0.0
    details: dict = field(default_factory=dict)

    def line(self):
        extra = ", ".join("%s=%s" % (k, _fmt(v)) for k, v in self.details.items())
        return "%s %s: %d/%d failures (%.1fs)%s" % (
            "PASS" if self.ok else "FAIL", self.name, self.failures, self.trials, self.seconds,
            "; " + extra if extra else "")


def _fmt(v):
    return "%.6g" % v if isinstance(v, float) else str(v)


class _Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.seconds = time.perf_counter() - self.t0


def corpus(grid: GaussianGrid):
    """All default family members on ``grid`` (30 masks in 2-D)."""
    return [m for name in FAMILIES for m in domain_family(name, grid)]


def profile_anchors(tol1=1e-5, tol2=1e-4, step=1e-3):
    with _Timer() as t:
        e1 = abs(lambda_halfline(0.0, step) - 1.0)
        e2 = abs(lambda2_halfline(0.0, step) - 3.0)
    fails = int(e1 > tol1) + int(e2 > tol2)
    return CheckResult("profile anchors", fails == 0, fails, 2, t.seconds,
                       {"err_lambda1": e1, "err_lambda2": e2})


def solver_agreement(rs=(-2.0, -1.0, 0.0, 1.0, 2.0), tol=1e-5):
    with _Timer() as t:
        errs = [abs(lambda_halfline(r) - shooting_eigenvalue(r)) for r in rs]
    fails = sum(e > tol for e in errs)
    return CheckResult("grid vs shooting", fails == 0, fails, len(rs), t.seconds,
                       {"max_err": max(errs)})


def profile_regularity(r_min=-3.0, r_max=3.0, r_step=0.05, hs=(0.2, 0.1, 0.05),
                       second_tol=1e-4, solver_tol=1e-6):
    """Monotonicity, convexity and the forward-difference slope bounds of the curve.

    Checks ``0 <= (L(r-h) - L(r))/h <= sqrt(L(r)) + h/4 + tol`` with
    ``tol = 10 solver_tol / h`` (the curve itself is accurate to
    ``solver_tol``).
    """
    cache = {}

    def lam(r):
        key = round(float(r), 9)
        if key not in cache:
            cache[key] = lambda_halfline(key)
        return cache[key]

    with _Timer() as t:
        rs = np.round(np.arange(r_min, r_max + 0.5 * r_step, r_step), 9)
        vals = np.array([lam(r) for r in rs])
        fails = int(not np.all(np.diff(vals) < 0))
        d2, convex_ok = convexity_check(rs, vals, tol=second_tol)
        fails += int(not convex_ok)
        trials = 2
        worst = -math.inf
        for h in hs:
            slack = 10.0 * solver_tol / h
            for r in rs:
                ratio = (lam(r - h) - lam(r)) / h
                bound = math.sqrt(lam(r)) + h / 4.0
                worst = max(worst, ratio - bound)
                trials += 1
                fails += int(not (-slack <= ratio <= bound + slack))
    return CheckResult("profile regularity", fails == 0, fails, trials, t.seconds,
                       {"min_second_difference": float(d2), "max_slope_excess": worst})


def halfspace_consistency(n=256, rs=(-0.5, 0.0, 0.8), n_dirs=8, rel=1e-2):
    grid = GaussianGrid(2, n)
    worst, fails, trials = 0.0, 0, 0
    with _Timer() as t:
        for r in rs:
            target = lambda_halfline(r)
            for k in range(n_dirs):
                hs = Halfspace.from_angle(2 * math.pi * k / n_dirs + 0.1, r)
                lam = first_eigenpair(hs.rasterize(grid)).eigenvalue
                err = abs(lam - target) / target
                worst = max(worst, err)
                trials += 1
                fails += int(err > rel)
    return CheckResult("halfspace eigenvalues", fails == 0, fails, trials, t.seconds,
                       {"max_rel_err": worst})


def faber_krahn(n=256, margin=3.0, records=None):
    """``D >= -eps`` everywhere and ``D > margin * eps`` off the halfspaces."""
    grid = GaussianGrid(2, n)
    fails = 0
    worst_ratio = math.inf
    with _Timer() as t:
        members = corpus(grid)
        if records is None:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                records = [deficit(m.mask, default_profile(), with_bound=False) for m in members]
        for mem, rec in zip(members, records):
            if rec.D < -rec.eps_disc:
                fails += 1
            if not mem.is_halfspace:
                worst_ratio = min(worst_ratio, rec.D / rec.eps_disc)
                if rec.D <= margin * rec.eps_disc:
                    fails += 1
    return CheckResult("Faber-Krahn", fails == 0, fails, len(members), t.seconds,
                       {"min_D_over_eps_nonhalfspace": worst_ratio})


def quantitative_ratio(P, m, A):
    """``(P - I(m)) 4 (1 + r^2) e^{-r^2/2} / A^2``; its inverse bounds the constant."""
    r = phi_inv(m)
    return (P - iso_profile(m)) * 4.0 * (1.0 + r * r) * math.exp(-0.5 * r * r) / (A * A)


def isoperimetric(n=256):
    """Isoperimetric inequality and the quantitative ratio on the corpus.

    ``implied_c`` is the smallest constant compatible with every corpus mask,
    i.e. the largest ``1 / ratio``.
    """
    grid = GaussianGrid(2, n)
    eps = perimeter_tolerance(grid)
    fails, ratios = 0, []
    with _Timer() as t, warnings.catch_warnings():
        warnings.simplefilter("ignore")
        members = corpus(grid)
        for mem in members:
            P = gauss_perimeter(mem.mask).value
            m = gauss_measure(mem.mask)
            if P < iso_profile(m) - eps:
                fails += 1
            A = fraenkel_asymmetry(mem.mask).value
            if A > 1e-3:
                q = quantitative_ratio(P, m, A)
                if not (math.isfinite(q) and q > 0):
                    fails += 1
                ratios.append(q)
    c = 1.0 / min(ratios)
    return CheckResult("isoperimetric", fails == 0, fails, len(members), t.seconds,
                       {"implied_c": c, "eps": eps})


def random_bumps(grid: GaussianGrid, rng, n_bumps=4):
    """Sum of random Gaussian bumps, nonnegative and smooth."""
    pts = grid.points()
    u = np.zeros(grid.shape)
    for _ in range(n_bumps):
        c = rng.uniform(-2.5, 2.5, size=grid.dim)
        s = rng.uniform(0.3, 1.2)
        a = rng.uniform(0.2, 1.0)
        u += a * np.exp(-0.5 * np.sum((pts - c) ** 2, axis=-1) / (s * s))
    return u


def ehrhard_suite(n=128, trials=100, seed=0):
    """Measure preservation, Polya-Szego on seeded functions, idempotence."""
    grid = GaussianGrid(2, n)
    rng = np.random.default_rng(seed)
    dirs = [0, 1, (0, -1), (1, -1)]
    bound = grid.dim * float(grid.axis_weights.max())
    fails = count = 0
    worst_dm = 0.0
    with _Timer() as t:
        for mem in corpus(grid):
            for h in dirs:
                s = symmetrize_set(mem.mask, h)
                dm = abs(gauss_measure(s) - gauss_measure(mem.mask))
                worst_dm = max(worst_dm, dm)
                fails += int(dm > bound)
                fails += int(not np.array_equal(symmetrize_set(s, h).inside, s.inside))
                count += 2
        ps_fail = 0
        for k in range(trials):
            u = random_bumps(grid, rng)
            _, _, ok = polya_szego_check(u, grid, dirs[k % len(dirs)])
            ps_fail += int(not ok)
        fails += ps_fail
        count += trials
    return CheckResult("Ehrhard", fails == 0, fails, count, t.seconds,
                       {"max_measure_change": worst_dm, "bound": bound,
                        "polya_szego_failures": ps_fail})


def asymmetry_suite(n=256, tol=1e-3):
    grid = GaussianGrid(2, n)
    fails = trials = 0
    worst_hs, worst_gap = 0.0, 0.0
    with _Timer() as t:
        for k in range(8):
            for r in (-0.5, 0.0, 0.8):
                a = fraenkel_asymmetry(Halfspace.from_angle(0.37 + k * math.pi / 4, r).rasterize(grid))
                worst_hs = max(worst_hs, a.value)
                fails += int(a.value > 2.0 / n)
                trials += 1
        for mem in domain_family("wedge", grid):
            gap = abs(fraenkel_asymmetry(mem.mask).value - dense_asymmetry(mem.mask))
            worst_gap = max(worst_gap, gap)
            fails += int(gap > tol)
            trials += 1
    return CheckResult("asymmetry", fails == 0, fails, trials, t.seconds,
                       {"max_halfspace_A": worst_hs, "max_oracle_gap": worst_gap})


def _transfer_pair(grid, rng):
    theta = rng.uniform(0.5 * math.pi, 0.875 * math.pi)
    F = grid.mask_from_level(family_level("wedge", theta, rng.uniform(0.0, 2.0 * math.pi)))
    a_f = fraenkel_asymmetry(F).value
    kappa = rng.uniform(0.05, 0.45)
    target = rng.uniform(0.05, 0.95) * kappa * a_f * gauss_measure(F)
    center = rng.normal(size=2)
    add = bool(rng.random() < 0.5)

    def perturbed(rho):
        B = grid.mask_from_level(lambda p: np.linalg.norm(p - center, axis=-1) - rho)
        return (F | B) if add else (F - B)

    lo, hi = 0.0, 4.0
    for _ in range(30):
        mid = 0.5 * (lo + hi)
        if symdiff_measure(perturbed(mid), F) > target:
            hi = mid
        else:
            lo = mid
    return perturbed(lo), F, kappa, a_f


def transfer_suite(n=128, trials=100, seed=0, tol=1e-3, max_tries=1000):
    """Asymmetry transfer on seeded applicable ``(E, F, kappa)`` triples."""
    grid = GaussianGrid(2, n)
    rng = np.random.default_rng(seed)
    done = fails = tries = 0
    with _Timer() as t:
        while done < trials and tries < max_tries:
            tries += 1
            E, F, kappa, a_f = _transfer_pair(grid, rng)
            if symdiff_measure(E, F) == 0.0:
                continue
            chk = transfer_lemma_check(E, F, kappa, tol=tol, asym=_cached(F, a_f))
            if not chk.applicable:
                continue
            done += 1
            fails += int(not chk.ok)
    return CheckResult("asymmetry transfer", fails == 0 and done == trials, fails, done,
                       t.seconds, {"draws": tries})


def _cached(F, a_f):
    def asym(mask):
        return a_f if mask is F else fraenkel_asymmetry(mask).value
    return asym


SUITES = {
    "anchors": profile_anchors,
    "shooting": solver_agreement,
    "regularity": profile_regularity,
    "halfspace": halfspace_consistency,
    "faber-krahn": faber_krahn,
    "isoperimetric": isoperimetric,
    "ehrhard": ehrhard_suite,
    "asymmetry": asymmetry_suite,
    "transfer": transfer_suite,
}


def run_all(names=None, n=None, seed=0):
    """Run the named suites (all by default); ``n`` overrides each grid size."""
    out = []
    for name in names or SUITES:
        fn = SUITES[name]
        kwargs = {}
        code = fn.__code__.co_varnames[:fn.__code__.co_argcount]
        if n is not None and "n" in code:
            kwargs["n"] = n
        if "seed" in code:
            kwargs["seed"] = seed
        out.append(fn(**kwargs))
    return out
