"""Field serialization and diagnostics output.

Binary field layout (little-endian):

    magic b'GPFD', version u32,
    shape kind u8 (0 disk, 1 rectangle, 2 ellipse), two f64 shape params,
    nx i64, ny i64, h f64, origin_x f64, origin_y f64,
    mask int8[ny*nx] (row-major),
    n i64, interleaved re/im f64 pairs over interior nodes in index order.

CSV exports print floats with repr so a round trip is exact.
"""

from __future__ import annotations

import struct
from typing import List

import numpy as np

from .grid import Disk, Ellipse, Field, Grid, Rectangle
from .optimizers import IterationRecord

_MAGIC = b"GPFD"
_VERSION = 1
_SHAPE_CODES = {Disk: 0, Rectangle: 1, Ellipse: 2}


def _shape_params(shape):
    if isinstance(shape, Disk):
        return shape.radius, 0.0
    if isinstance(shape, Rectangle):
        return shape.half_width, shape.half_height
    return shape.semi_x, shape.semi_y


def _shape_from(code, p1, p2):
    if code == 0:
        return Disk(p1)
    if code == 1:
        return Rectangle(p1, p2)
    if code == 2:
        return Ellipse(p1, p2)
    raise ValueError(f"unknown shape code {code}")


def save_field(u: Field, path):
    g = u.grid
    p1, p2 = _shape_params(g.shape)
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<IB2d", _VERSION, _SHAPE_CODES[type(g.shape)], p1, p2))
        fh.write(struct.pack("<2q3d", g.nx, g.ny, g.h, g.origin[0], g.origin[1]))
        fh.write(g.mask.astype(np.int8).tobytes())
        fh.write(struct.pack("<q", g.n))
        inter = np.empty(2 * g.n, dtype="<f8")
        inter[0::2] = u.values.real
        inter[1::2] = u.values.imag
        fh.write(inter.tobytes())


def load_field(path) -> Field:
    with open(path, "rb") as fh:
        if fh.read(4) != _MAGIC:
            raise ValueError("not a field file")
        version, code, p1, p2 = struct.unpack("<IB2d", fh.read(struct.calcsize("<IB2d")))
        if version != _VERSION:
            raise ValueError(f"unsupported field file version {version}")
        nx, ny, h, ox, oy = struct.unpack("<2q3d", fh.read(struct.calcsize("<2q3d")))
        mask = np.frombuffer(fh.read(nx * ny), dtype=np.int8).reshape(ny, nx)
        (n,) = struct.unpack("<q", fh.read(8))
        inter = np.frombuffer(fh.read(16 * n), dtype="<f8")
    grid = Grid(_shape_from(code, p1, p2), h, (nx - 1) // 2, (ny - 1) // 2)
    if grid.n != n or not np.array_equal(grid.mask, mask):
        raise ValueError("stored mask disagrees with the reconstructed grid")
    if abs(grid.origin[0] - ox) > 1e-12 or abs(grid.origin[1] - oy) > 1e-12:
        raise ValueError("stored origin disagrees with the reconstructed grid")
    return Field(grid, inter[0::2] + 1j * inter[1::2])


def export_field_csv(u: Field, path):
    g = u.grid
    with open(path, "w") as fh:
        fh.write("x,y,re,im\n")
        for k in range(g.n):
            fh.write(f"{g.x[k]!r},{g.y[k]!r},{u.values[k].real!r},{u.values[k].imag!r}\n")


def import_field_csv(grid: Grid, path) -> Field:
    vals = np.zeros(grid.n, dtype=np.complex128)
    with open(path) as fh:
        header = fh.readline().strip()
        if header != "x,y,re,im":
            raise ValueError("unexpected field CSV header")
        for k, line in enumerate(fh):
            xs, ys, res, ims = line.strip().split(",")
            if k >= grid.n:
                raise ValueError("field CSV has more rows than interior nodes")
            if float(xs) != grid.x[k] or float(ys) != grid.y[k]:
                raise ValueError(f"node {k} coordinates disagree with the grid")
            vals[k] = complex(float(res), float(ims))
    if k != grid.n - 1:
        raise ValueError("field CSV has fewer rows than interior nodes")
    return Field(grid, vals)


DIAG_HEADER = "n,E,rel_dE,du,drift,tau,beta,Lz,resid,t_wall"


def write_diagnostics_csv(records: List[IterationRecord], path):
    with open(path, "w") as fh:
        fh.write(DIAG_HEADER + "\n")
        for r in records:
            fh.write(
                f"{r.n},{r.energy!r},{r.rel_de!r},{r.step_change!r},{r.drift!r},"
                f"{r.tau!r},{r.beta!r},{r.lz!r},{r.resid!r},{r.t_wall!r}\n"
            )
