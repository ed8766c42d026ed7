"""Plain-text grid files for masks and grid functions.

Format::

    # optional comment lines
    dim n box
    v v v ...      (row-major values, any whitespace layout)

Masks store 0/1; functions store floats in shortest round-trip form.
"""

from __future__ import annotations

import os

import numpy as np

from .gauss import DomainMask, GaussianGrid

__all__ = ["write_grid_array", "read_grid_array", "write_mask", "read_mask",
           "write_function", "read_function", "format_float"]


def format_float(x) -> str:
    """Shortest round-trip decimal of a float."""
    return repr(float(x))


def write_grid_array(path, values, grid: GaussianGrid, integer=False, comments=()):
    values = np.asarray(values)
    if values.shape != grid.shape:
        raise ValueError("array shape %s does not match grid %s" % (values.shape, grid.shape))
    fmt = (lambda v: "1" if v else "0") if integer else format_float
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in comments:
            fh.write("# %s\n" % line)
        fh.write("%d %d %s\n" % (grid.dim, grid.n, format_float(grid.box)))
        rows = values.reshape(-1, grid.n)
        for row in rows:
            fh.write(" ".join(fmt(v) for v in row))
            fh.write("\n")


def read_grid_array(path):
    """Return ``(grid, values)`` from a grid file."""
    with open(path, encoding="utf-8") as fh:
        lines = [ln for ln in fh if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise ValueError("%s: empty grid file" % os.fspath(path))
    head = lines[0].split()
    if len(head) != 3:
        raise ValueError("%s: header must be 'dim n box'" % os.fspath(path))
    dim, n, box = int(head[0]), int(head[1]), float(head[2])
    grid = GaussianGrid(dim, n, box)
    data = np.array(" ".join(lines[1:]).split(), dtype=float)
    if data.size != n ** dim:
        raise ValueError("%s: expected %d values, found %d" % (os.fspath(path), n ** dim, data.size))
    return grid, data.reshape(grid.shape)


def write_mask(path, mask: DomainMask, comments=()):
    write_grid_array(path, mask.inside, mask.grid, integer=True, comments=comments)


def read_mask(path) -> DomainMask:
    grid, data = read_grid_array(path)
    if not np.all((data == 0) | (data == 1)):
        raise ValueError("mask file must contain only 0 and 1")
    return DomainMask(grid, data.astype(bool))


def write_function(path, u, grid: GaussianGrid, comments=()):
    write_grid_array(path, u, grid, comments=comments)


def read_function(path):
    """Return ``(grid, values)``."""
    return read_grid_array(path)
