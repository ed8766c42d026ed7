"""Family sweeps: deficit records, CSV report, log-log SVG plot."""

from __future__ import annotations

import csv
import io
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from typing import Optional, Sequence

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .deficit import (CSV_COLUMNS, DeficitRecord, deficit, default_profile, exponent_fit,
                      main_constant)
from .exceptions import InsufficientDataError
from .families import DEFAULT_PARAMS, DEFAULT_ROTATION, FAMILIES, family_level
from .gauss import GaussianGrid
from .io import format_float

__all__ = ["SweepConfig", "sweep", "write_csv", "read_csv", "records_to_csv", "write_svg",
           "corpus_constant", "DeficitAnalyzer"]


@dataclass(frozen=True)
class SweepConfig:
    """Settings of a family sweep; every field is echoed into the CSV."""

    grid_n: int = 256
    box: float = 6.0
    tol: float = 1e-8
    audit: bool = False
    seed: int = 0
    n_levels: int = 16
    n_angles: int = 360
    rotation: float = DEFAULT_ROTATION
    params: Optional[tuple] = None
    n_jobs: int = 1

    def items(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, float):
                v = format_float(v)
            elif isinstance(v, tuple):
                v = "/".join(format_float(p) for p in v)
            yield f.name, v


def _member_record(job):
    name, param, cfg = job
    grid = GaussianGrid(2, cfg.grid_n, cfg.box)
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            level = family_level(name, param, cfg.rotation)
            mask = grid.mask_from_level(level)
            coarse = None
            if cfg.audit:
                coarse = GaussianGrid(2, cfg.grid_n // 2, cfg.box).mask_from_level(level)
            kwargs = {"n_angles": cfg.n_angles, "audit": cfg.audit}
            rec = deficit(mask, default_profile(), tol=cfg.tol, coarse_mask=coarse,
                          n_levels=cfg.n_levels, family=name, param=float(param),
                          asym_kwargs=kwargs)
        for w in caught:
            msg = str(w.message)
            if msg not in rec.warnings:
                rec.warnings.append(msg)
        return rec
    except Exception as exc:  # per-member failure is reported, the sweep continues
        rec = DeficitRecord(name, float(param), math.nan, math.nan, math.nan, math.nan,
                            math.nan, math.nan)
        rec.warnings.append("failed: %s: %s" % (type(exc).__name__, exc))
        return rec


def sweep(family: str, config: SweepConfig = SweepConfig()) -> list:
    """One :class:`DeficitRecord` per family member, sorted by parameter.

    Members are independent; with ``n_jobs > 1`` they run in worker
    processes.  Failures become records with NaN fields and a warning.
    """
    if family not in FAMILIES:
        raise ValueError("unknown family %r" % (family,))
    params = DEFAULT_PARAMS[family] if config.params is None else config.params
    jobs = [(family, float(p), config) for p in sorted(float(q) for q in params)]
    if config.n_jobs > 1:
        with ProcessPoolExecutor(max_workers=config.n_jobs) as pool:
            records = list(pool.map(_member_record, jobs))
    else:
        records = [_member_record(j) for j in jobs]
    records.sort(key=lambda r: r.param)
    return records


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return "" if math.isnan(v) else format_float(v)
    return str(v)


def records_to_csv(records: Sequence[DeficitRecord], config: SweepConfig = None) -> str:
    buf = io.StringIO()
    if config is not None:
        for key, val in config.items():
            buf.write("# %s=%s\n" % (key, val))
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for rec in records:
        writer.writerow([_cell(v) for v in rec.row()])
    return buf.getvalue()


def write_csv(path, records, config: SweepConfig = None):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(records_to_csv(records, config))


def read_csv(path) -> list:
    """Rows of a report as dicts (comment lines skipped, nulls as None)."""
    with open(path, encoding="utf-8", newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    rows = []
    for row in csv.DictReader(lines):
        out = {}
        for k, v in row.items():
            if k in ("family", "warnings"):
                out[k] = v
            else:
                out[k] = float(v) if v != "" else None
        rows.append(out)
    return rows


def corpus_constant(records) -> Optional[float]:
    """Largest implied constant over the records (None when none is defined)."""
    vals = [r.implied_c for r in records if r.implied_c is not None]
    return max(vals) if vals else None


def write_svg(path, records, c_assumed=None, width=640, height=480):
    """Log-log plot of D against A with the fitted line and the cubic guarantee."""
    pts = [(r.A, r.D) for r in records
           if r.A is not None and r.D is not None and r.A > 1e-3 and r.D > 0]
    pad = 60
    if pts:
        xs = np.log10([p[0] for p in pts])
        ys = np.log10([p[1] for p in pts])
    else:
        xs = ys = np.array([0.0])
    x0, x1 = math.floor(xs.min()), math.ceil(xs.max() + 1e-9)
    curves = []
    try:
        fit = exponent_fit(records)
        curves.append(("fit slope %.3g" % fit.slope, "#1f77b4", fit.slope, fit.intercept))
    except InsufficientDataError:
        fit = None
    if c_assumed is not None and pts:
        ms = [r.m for r in records if r.A is not None and r.A > 1e-3]
        cm = min(main_constant(m, c_assumed).C_m for m in ms)
        curves.append(("C A^3, c=%.3g" % c_assumed, "#d62728", 3.0, math.log10(cm)))
    ylist = list(ys)
    for _, _, s, b in curves:
        ylist += [s * x0 + b, s * x1 + b]
    y0, y1 = math.floor(min(ylist)), math.ceil(max(ylist) + 1e-9)
    if x1 == x0:
        x1 += 1
    if y1 == y0:
        y1 += 1

    def px(x):
        return pad + (x - x0) / (x1 - x0) * (width - 2 * pad)

    def py(y):
        return height - pad - (y - y0) / (y1 - y0) * (height - 2 * pad)

    out = ['<svg xmlns="http://www.w3.org/2000/svg" width="%d" height="%d" '
           'viewBox="0 0 %d %d">' % (width, height, width, height),
           '<rect width="100%" height="100%" fill="white"/>',
           '<g stroke="black" fill="none"><rect x="%d" y="%d" width="%d" height="%d"/></g>'
           % (pad, pad, width - 2 * pad, height - 2 * pad)]
    for k in range(int(x0), int(x1) + 1):
        out.append('<text x="%.1f" y="%d" font-size="12" text-anchor="middle">1e%d</text>'
                   % (px(k), height - pad + 18, k))
    for k in range(int(y0), int(y1) + 1):
        out.append('<text x="%d" y="%.1f" font-size="12" text-anchor="end">1e%d</text>'
                   % (pad - 6, py(k) + 4, k))
    out.append('<text x="%d" y="%d" font-size="14" text-anchor="middle">A</text>'
               % (width // 2, height - 15))
    out.append('<text x="15" y="%d" font-size="14" text-anchor="middle" '
               'transform="rotate(-90 15 %d)">D</text>' % (height // 2, height // 2))
    for i, (label, color, s, b) in enumerate(curves):
        out.append('<line x1="%.1f" y1="%.1f" x2="%.1f" y2="%.1f" stroke="%s"/>'
                   % (px(x0), py(s * x0 + b), px(x1), py(s * x1 + b), color))
        out.append('<text x="%d" y="%d" font-size="12" fill="%s">%s</text>'
                   % (pad + 8, pad + 16 + 16 * i, color, label))
    if pts:
        for x, y in zip(xs, ys):
            out.append('<circle cx="%.1f" cy="%.1f" r="3" fill="black"/>' % (px(x), py(y)))
    out.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(out) + "\n")
    return fit


class DeficitAnalyzer(BaseEstimator):
    """Estimator wrapper: ``fit(family)`` runs a sweep and the exponent fit.

    Attributes
    ----------
    records_ : list of DeficitRecord
    implied_c_ : float or None
        Corpus maximum of the implied constant.
    slope_ : float or None
        Fitted exponent of ``D`` against ``A``.
    """

    def __init__(self, grid_n=256, box=6.0, tol=1e-8, audit=False, seed=0, n_levels=16,
                 n_angles=360, rotation=DEFAULT_ROTATION, params=None, n_jobs=1):
        self.grid_n = grid_n
        self.box = box
        self.tol = tol
        self.audit = audit
        self.seed = seed
        self.n_levels = n_levels
        self.n_angles = n_angles
        self.rotation = rotation
        self.params = params
        self.n_jobs = n_jobs

    def config(self) -> SweepConfig:
        p = self.get_params()
        if p["params"] is not None:
            p["params"] = tuple(float(v) for v in p["params"])
        return SweepConfig(**p)

    def fit(self, X, y=None):
        self.config_ = self.config()
        self.records_ = sweep(X, self.config_)
        self.implied_c_ = corpus_constant(self.records_)
        try:
            self.fit_ = exponent_fit(self.records_)
            self.slope_ = self.fit_.slope
        except InsufficientDataError:
            self.fit_ = None
            self.slope_ = None
        return self

    def to_csv(self, path=None):
        check_is_fitted(self, "records_")
        text = records_to_csv(self.records_, self.config_)
        if path is not None:
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        return text

