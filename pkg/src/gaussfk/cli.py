"""Command-line interface: ``gaussfk <subcommand> [options]``.

Every option may also come from a ``--config`` file of ``key=value`` lines
(keys spelled like the long options, with ``-`` or ``_``); explicit flags
win over the file.
"""

from __future__ import annotations

import argparse
import os
import sys
import warnings

from . import __version__
from .asymmetry import fraenkel_asymmetry
from .checks import SUITES, run_all
from .deficit import default_profile
from .ehrhard import symmetrize_function, symmetrize_set
from .eigen import first_eigenpair
from .families import FAMILIES, shape_mask
from .gauss import GaussianGrid, gauss_measure
from .io import format_float, read_function, read_mask, write_function, write_mask
from .profile import FaberKrahnProfile
from .sweep import SweepConfig, corpus_constant, records_to_csv, sweep, write_svg


def read_config(path):
    """Parse a ``key=value`` file; ``#`` starts a comment."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for num, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, eq, val = line.partition("=")
            if not eq:
                raise ValueError("%s:%d: expected key=value" % (path, num))
            out[key.strip().lstrip("-").replace("-", "_")] = val.strip()
    return out


def _common(p):
    p.add_argument("--config", help="key=value file of option defaults")
    p.add_argument("--grid-n", type=int, default=256, help="cells per axis")
    p.add_argument("--box", type=float, default=6.0, help="box half-width")
    p.add_argument("--dim", type=int, default=2, help="dimension for shape masks")
    p.add_argument("--tol", type=float, default=1e-8, help="eigensolver tolerance")
    p.add_argument("--audit", action="store_true", help="enable oracle audits")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output file (default: stdout)")


def build_parser():
    parser = argparse.ArgumentParser(prog="gaussfk", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version="%(prog)s " + __version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("profile", help="tabulate the halfspace eigenvalue curve")
    _common(p)
    p.add_argument("--rmin", type=float, default=-4.0)
    p.add_argument("--rmax", type=float, default=4.0)
    p.add_argument("--step", type=float, default=0.02, help="spacing of r samples")
    p.set_defaults(handler=cmd_profile)

    p = sub.add_parser("eig", help="first Dirichlet eigenpair of a mask")
    _common(p)
    p.add_argument("--mask", required=True, help="mask file or shape string")
    p.set_defaults(handler=cmd_eig)

    p = sub.add_parser("asym", help="Gaussian Fraenkel asymmetry of a mask")
    _common(p)
    p.add_argument("--mask", required=True, help="mask file or shape string")
    p.set_defaults(handler=cmd_asym)

    p = sub.add_parser("symmetrize", help="Ehrhard symmetrization of a mask or function")
    _common(p)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--mask", help="mask file or shape string")
    src.add_argument("--func", help="grid function file")
    p.add_argument("--dir", default="0", help="axis index, signed axis (--dir=-x2) or vector (1/1)")
    p.set_defaults(handler=cmd_symmetrize)

    p = sub.add_parser("deficit-sweep", help="deficit records along a domain family")
    _common(p)
    p.add_argument("--family", default="wedge", help="family name or 'all'")
    p.add_argument("--params", help="parameter values separated by '/' or ','")
    p.add_argument("--n-levels", type=int, default=16)
    p.add_argument("--n-angles", type=int, default=360)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--plot", help="SVG file for the log-log plot")
    p.set_defaults(handler=cmd_sweep)

    p = sub.add_parser("check", help="run invariant suites")
    _common(p)
    p.add_argument("suites", nargs="*", help="subset of: " + ", ".join(SUITES))
    p.set_defaults(handler=cmd_check)
    return parser, sub


def _apply_config(parser, sub, argv):
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    cfg = read_config(known.config)
    for sp in sub.choices.values():
        dests = {a.dest: a for a in sp._actions}
        values = {}
        for key, raw in cfg.items():
            action = dests.get(key)
            if action is None:
                continue
            if isinstance(action, argparse._StoreTrueAction):
                values[key] = raw.lower() in ("1", "true", "yes", "on")
            elif action.type is not None:
                values[key] = action.type(raw)
            else:
                values[key] = raw
        sp.set_defaults(**values)


def _grid(args):
    return GaussianGrid(args.dim, args.grid_n, args.box)


def _load_mask(spec, args):
    if os.path.exists(spec):
        return read_mask(spec)
    return shape_mask(spec, _grid(args))


def _echo(args):
    skip = {"handler", "config", "command", "_explicit"}
    return ["%s=%s" % (k, v) for k, v in sorted(vars(args).items())
            if k not in skip and v is not None]


def _emit(text, path):
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_profile(args):
    prof = FaberKrahnProfile(r_min=args.rmin, r_max=args.rmax, r_step=args.step,
                             with_second=True).fit()
    text = "".join("# %s\n" % line for line in _echo(args)) + prof.table_.to_csv()
    _emit(text, args.out)
    return 0


def cmd_eig(args):
    mask = _load_mask(args.mask, args)
    res = first_eigenpair(mask, tol=args.tol)
    for w in res.warnings:
        print("warning:", w, file=sys.stderr)
    summary = ["lambda=%s" % format_float(res.eigenvalue),
               "measure=%s" % format_float(gauss_measure(mask)),
               "residual=%s" % format_float(res.residual),
               "iterations=%d" % res.iterations]
    if args.out:
        write_function(args.out, res.u, mask.grid, comments=_echo(args) + summary)
    print("\n".join(summary))
    return 0


def cmd_asym(args):
    mask = _load_mask(args.mask, args)
    res = fraenkel_asymmetry(mask, audit=args.audit)
    lines = ["A=%s" % format_float(res.value),
             "direction=%s" % "/".join(format_float(v) for v in res.direction),
             "r=%s" % format_float(res.r),
             "measure=%s" % format_float(res.measure),
             "coarse=%s" % format_float(res.coarse_value)]
    if res.oracle_value is not None:
        lines.append("oracle=%s" % format_float(res.oracle_value))
    _emit("".join("# %s\n" % line for line in _echo(args)) + "\n".join(lines) + "\n", args.out)
    return 0


def cmd_symmetrize(args):
    if args.mask:
        mask = _load_mask(args.mask, args)
        out = symmetrize_set(mask, args.dir)
        print("measure_before=%s measure_after=%s" % (format_float(gauss_measure(mask)),
                                                      format_float(gauss_measure(out))))
        if args.out:
            write_mask(args.out, out, comments=_echo(args))
        return 0
    grid, u = read_function(args.func)
    us = symmetrize_function(u, grid, args.dir)
    if args.out:
        write_function(args.out, us, grid, comments=_echo(args))
    print("max_before=%s max_after=%s" % (format_float(u.max()), format_float(us.max())))
    return 0


def _params(text):
    if not text:
        return None
    return tuple(float(v) for v in text.replace(",", "/").split("/") if v.strip())


def cmd_sweep(args):
    families = sorted(FAMILIES) if args.family == "all" else [args.family]
    config = SweepConfig(grid_n=args.grid_n, box=args.box, tol=args.tol, audit=args.audit,
                         seed=args.seed, n_levels=args.n_levels, n_angles=args.n_angles,
                         params=_params(args.params), n_jobs=args.jobs)
    default_profile()
    records = []
    for fam in families:
        records += sweep(fam, config)
    _emit(records_to_csv(records, config), args.out)
    if args.plot:
        c_star = corpus_constant(records)
        write_svg(args.plot, records, c_assumed=c_star)
    return 0


def cmd_check(args):
    names = args.suites or None
    unknown = [s for s in names or () if s not in SUITES]
    if unknown:
        print("unknown suites: %s" % ", ".join(unknown), file=sys.stderr)
        return 2
    grid_n = args.grid_n if "grid_n" in getattr(args, "_explicit", ()) else None
    results = run_all(names, n=grid_n, seed=args.seed)
    text = "\n".join(r.line() for r in results) + "\n"
    _emit(text, args.out)
    if args.out:
        sys.stdout.write(text)
    return 0 if all(r.ok for r in results) else 1


def _explicit_dests(parser, sub, argv):
    """Option destinations given explicitly on the command line or in the config."""
    found = set()
    if not argv:
        return found
    sp = sub.choices.get(argv[0])
    if sp is None:
        return found
    flags = {s: a.dest for a in sp._actions for s in a.option_strings}
    for tok in argv[1:]:
        name = tok.split("=", 1)[0]
        if name in flags:
            found.add(flags[name])
    return found


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    parser, sub = build_parser()
    try:
        _apply_config(parser, sub, argv)
    except (ValueError, OSError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    args = parser.parse_args(argv)
    explicit = _explicit_dests(parser, sub, argv)
    if getattr(args, "config", None):
        explicit |= set(read_config(args.config))
    args._explicit = explicit
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return args.handler(args)
    except (ValueError, RuntimeError, OSError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
