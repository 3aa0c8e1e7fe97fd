"""Vortex detection and field image/CSV emission.

Vortex cores are dips of the atomic density rho = |u|^2 below the smooth
Thomas-Fermi background: local minima of rho - rho_TF over 3x3 stencils,
restricted to the condensate bulk (rho_TF above a threshold fraction of its
peak), refined to sub-grid accuracy by a separable quadratic fit, signed by
the phase circulation around the node and sized by the half-depth contour.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from typing import List, Optional

import numpy as np

from .grid import Field
from .model import ModelParams, tf_density


@dataclass
class Vortex:
    x: float
    y: float
    winding: int
    core_radius: float


def _wrap_phase(dphi):
    return (dphi + np.pi) % (2.0 * np.pi) - np.pi


def _ring_offsets():
    return [(-1, -1), (0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0)]


def plaquette_winding(phase2d, iy, ix) -> int:
    """Net phase circulation (in units of 2 pi) around node (iy, ix)."""
    ring = _ring_offsets()
    total = 0.0
    for k in range(8):
        dx0, dy0 = ring[k]
        dx1, dy1 = ring[(k + 1) % 8]
        total += _wrap_phase(phase2d[iy + dy1, ix + dx1] - phase2d[iy + dy0, ix + dx0])
    return int(np.rint(total / (2.0 * np.pi)))


def total_winding(u: Field, radius: float) -> int:
    """Phase circulation of u along the axis-aligned square loop of the
    given half-side (snapped to the lattice); the loop must stay interior."""
    g = u.grid
    k = int(np.floor(radius / g.h))
    if k < 1:
        raise ValueError("loop radius below one grid spacing")
    cy, cx = (g.ny - 1) // 2, (g.nx - 1) // 2
    path = []
    for t in range(-k, k):
        path.append((cy - k, cx + t))
    for t in range(-k, k):
        path.append((cy + t, cx + k))
    for t in range(k, -k, -1):
        path.append((cy + k, cx + t))
    for t in range(k, -k, -1):
        path.append((cy + t, cx - k))
    vals = np.zeros((g.ny, g.nx), dtype=np.complex128)
    vals[g.iy, g.ix] = u.values
    amps = np.array([abs(vals[p]) for p in path])
    if np.any(amps == 0.0):
        raise ValueError("loop crosses a node with |u| = 0; choose another radius")
    ph = np.array([np.angle(vals[p]) for p in path])
    total = np.sum(_wrap_phase(np.diff(np.concatenate([ph, ph[:1]]))))
    return int(np.rint(total / (2.0 * np.pi)))


def detect_vortices(u: Field, p: ModelParams, threshold: float = 0.05) -> List[Vortex]:
    """Vortices of a converged state; empty list when none are found."""
    g = u.grid
    rho = g.scatter((u.values.real**2 + u.values.imag**2))
    rho_tf = g.scatter(tf_density(p, g).values.real)
    interior = g.idx2d >= 0

    region = interior & (rho_tf > threshold * rho_tf.max())
    d = np.where(region, rho - rho_tf, np.inf)
    phase = np.angle(g.scatter(u.values))

    vortices: List[Vortex] = []
    ny, nx = d.shape
    iy, ix = np.nonzero(region)
    for yy, xx in zip(iy, ix):
        if yy < 1 or yy >= ny - 1 or xx < 1 or xx >= nx - 1:
            continue
        c = d[yy, xx]
        patch = d[yy - 1 : yy + 2, xx - 1 : xx + 2]
        if c >= 0 or c > patch.min() or np.sum(patch == c) > 1:
            continue
        if not interior[yy - 1 : yy + 2, xx - 1 : xx + 2].all():
            continue
        w = plaquette_winding(phase, yy, xx)
        if w == 0:
            continue
        # separable quadratic refinement of the dip position
        def off(a, b, cc):
            denom = a - 2.0 * b + cc
            if denom <= 0 or not np.isfinite(denom):
                return 0.0
            return float(np.clip(0.5 * (a - cc) / denom, -0.5, 0.5))

        ox = off(d[yy, xx - 1], c, d[yy, xx + 1])
        oy = off(d[yy - 1, xx], c, d[yy + 1, xx])
        x0 = g.origin[0] + (xx + ox) * g.h
        y0 = g.origin[1] + (yy + oy) * g.h
        vortices.append(Vortex(x0, y0, w, _half_depth_radius(d, yy, xx, g.h)))
    return vortices


def _half_depth_radius(d, iy, ix, h, max_cells: int = 32) -> float:
    """Distance to the nearest node where the dip has recovered to half depth."""
    depth = -d[iy, ix]
    ny, nx = d.shape
    best = np.inf
    for r in range(1, max_cells + 1):
        y0, y1 = max(iy - r, 0), min(iy + r, ny - 1)
        x0, x1 = max(ix - r, 0), min(ix + r, nx - 1)
        sub = d[y0 : y1 + 1, x0 : x1 + 1]
        yy, xx = np.nonzero(np.isfinite(sub) & (-sub <= 0.5 * depth))
        if len(yy):
            dist = np.hypot(yy + y0 - iy, xx + x0 - ix) * h
            best = float(dist.min())
            break
    if not np.isfinite(best):
        best = max_cells * h
    return best


# ---------------------------------------------------------------------------
# Image / CSV emission
# ---------------------------------------------------------------------------


def _write_pgm16(path, img01: np.ndarray):
    data = np.clip(img01, 0.0, 1.0)
    pix = np.round(data * 65535.0).astype(">u2")
    with open(path, "wb") as fh:
        fh.write(f"P5\n{img01.shape[1]} {img01.shape[0]}\n65535\n".encode())
        fh.write(pix.tobytes())


def _csv_of_grid_values(field: Field, values2d: np.ndarray, path):
    g = field.grid
    with open(path, "w") as fh:
        fh.write("x,y,value\n")
        for k in range(g.n):
            fh.write(f"{g.x[k]!r},{g.y[k]!r},{values2d[g.iy[k], g.ix[k]]!r}\n")


def export_density(u: Field, path, csv_path=None):
    """Grayscale PGM of |u|^2 normalized by its maximum (0 outside)."""
    g = u.grid
    rho = g.scatter(u.values.real**2 + u.values.imag**2).real
    peak = rho.max()
    img = rho / peak if peak > 0 else rho
    _write_pgm16(path, img[::-1, :])  # image rows top-down = decreasing y
    if csv_path is not None:
        _csv_of_grid_values(u, rho, csv_path)


def export_phase(u: Field, path, csv_path=None):
    """Grayscale PGM of arg(u) mapped from [0, 2 pi) onto the gray range."""
    g = u.grid
    ph = np.mod(np.angle(g.scatter(u.values)), 2.0 * np.pi)
    _write_pgm16(path, ph[::-1, :] / (2.0 * np.pi))
    if csv_path is not None:
        _csv_of_grid_values(u, ph, csv_path)


def vortices_to_json(vortices: List[Vortex], path, meta: Optional[dict] = None):
    payload = {
        "count": len(vortices),
        "total_winding": int(sum(v.winding for v in vortices)),
        "core_radius_method": "half_depth_contour",
        "vortices": [asdict(v) for v in vortices],
    }
    if meta:
        payload.update(meta)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)
