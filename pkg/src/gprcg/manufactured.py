"""Manufactured exact solution for solver verification.

The reference state is a giant-vortex-like profile on a disk of radius R,

    u_ex = U(r) e^{i m theta},   U(r) = (2 sqrt(21)/sqrt(pi)) r^2 (R - r) / R^4,

whose L2 norm is exactly 1.  Adding the compensating source f = F(r) e^{i m
theta}, with F the strong GP operator applied to u_ex (a degree-9
polynomial in r for the harmonic trap r^2/2), makes u_ex a critical point
of the source-modified energy, so minimization errors can be measured
against a known target.  Convergence histories are summarized by geometric
fits err_n ~ B A^n over an automatically detected linear regime.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .grid import Field, Grid
from .model import Harmonic, ModelParams


@dataclass(frozen=True)
class ManufacturedCase:
    m: int = 3
    radius: float = 1.0
    c_g: float = 500.0
    c_omega: float = 10.0
    # trap is the harmonic r^2/2 throughout

    def __post_init__(self):
        if self.m < 0:
            raise ValueError("winding m must be >= 0")
        if not self.radius > 0:
            raise ValueError("radius must be positive")

    @property
    def prefactor(self) -> float:
        return 2.0 * np.sqrt(21.0) / np.sqrt(np.pi) / self.radius**4

    def params(self, grid: Grid) -> ModelParams:
        return ModelParams(
            c_g=self.c_g,
            c_omega=self.c_omega,
            trap=Harmonic(),
            source=source_term(self, grid),
        )


def radial_profile(case: ManufacturedCase, r: np.ndarray) -> np.ndarray:
    R = case.radius
    return case.prefactor * r * r * (R - r) * (r < R)


def exact_solution(case: ManufacturedCase, grid: Grid) -> Field:
    r = np.sqrt(grid.r2)
    theta = np.arctan2(grid.y, grid.x)
    return Field(grid, radial_profile(case, r) * np.exp(1j * case.m * theta))


def source_radial(case: ManufacturedCase, r: np.ndarray) -> np.ndarray:
    """F(r) with u_ex inserted in the strong operator (requires m >= 2).

    F = -1/2 (U'' + U'/r - m^2 U / r^2) + (r^2/2) U + c_g U^3 - c_omega m U.
    With U = c r^2 (R - r) the linear part collapses to
    c/2 [ (m^2-4) R + (9-m^2) r ]; for m < 2 the angular term would no
    longer cancel the curvature singularity at the origin.
    """
    if case.m < 2:
        raise ValueError("manufactured source defined for winding m >= 2")
    c = case.prefactor
    R = case.radius
    m2 = case.m**2
    u = radial_profile(case, r)
    lin = 0.5 * c * ((m2 - 4.0) * R + (9.0 - m2) * r)
    return lin + 0.5 * r * r * u + case.c_g * u**3 - case.c_omega * case.m * u


def source_term(case: ManufacturedCase, grid: Grid) -> Field:
    r = np.sqrt(grid.r2)
    theta = np.arctan2(grid.y, grid.x)
    return Field(grid, source_radial(case, r) * np.exp(1j * case.m * theta))


def reference_energy(case: ManufacturedCase, n_radial: int = 20001) -> float:
    """Source-modified energy of u_ex by composite-Simpson radial quadrature.

    The integrand is polynomial, so values stabilize to rounding once a few
    hundred points are used; n_radial is exposed for convergence checks.
    """
    if n_radial % 2 == 0:
        n_radial += 1
    R = case.radius
    c = case.prefactor
    m = case.m
    r = np.linspace(0.0, R, n_radial)
    u = c * r * r * (R - r)
    du = c * (2.0 * R * r - 3.0 * r * r)
    u_over_r = c * r * (R - r)
    f = source_radial(case, r)
    integrand = (
        2.0
        * np.pi
        * r
        * (
            0.5 * (du * du + m * m * u_over_r * u_over_r)
            + 0.5 * r * r * u * u
            + 0.5 * case.c_g * u**4
            - case.c_omega * m * u * u
            - 2.0 * f * u
        )
    )
    h = r[1] - r[0]
    w = np.ones(n_radial)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return float(np.dot(w, integrand) * h / 3.0)


def reference_angular_momentum(case: ManufacturedCase) -> float:
    return float(case.m)


# ---------------------------------------------------------------------------
# Geometric convergence-rate fits
# ---------------------------------------------------------------------------


@dataclass
class RateFit:
    a_u: float
    b_u: float
    a_e: float
    b_e: float
    window_u: Tuple[int, int]
    window_e: Tuple[int, int]
    resid_u: float
    resid_e: float


def _linear_window(logs: np.ndarray, slope_var: float = 0.2, min_len: int = 6):
    """Longest index window whose per-step slopes stay within slope_var
    (relative) of the window median and describe actual decrease."""
    n = len(logs)
    slopes = np.diff(logs)
    best = (0, min(n - 1, min_len))
    best_len = 0
    i = 0
    while i < len(slopes):
        j = i + 1
        while j <= len(slopes):
            win = slopes[i:j]
            med = np.median(win)
            if med >= -1e-6:
                break
            if np.max(np.abs(win - med)) > slope_var * abs(med):
                break
            j += 1
        if (j - i) > best_len:
            best_len = j - i
            best = (i, j)  # slopes i..j-1 -> points i..j
        i = i + 1 if j <= i + 1 else j - 1
    return best


def _fit_series(errors: np.ndarray, window: Optional[Tuple[int, int]]):
    err = np.asarray(errors, dtype=float)
    valid = np.isfinite(err) & (err > 0)
    if valid.sum() < 4:
        raise ValueError("too few positive error samples to fit")
    logs = np.log(err[valid])
    idx = np.nonzero(valid)[0]
    if window is None:
        i0, i1 = _linear_window(logs)
    else:
        lo, hi = window
        sel = (idx >= lo) & (idx <= hi)
        pos = np.nonzero(sel)[0]
        if len(pos) < 3:
            raise ValueError("fit window contains too few samples")
        i0, i1 = pos[0], pos[-1]
    ns = idx[i0 : i1 + 1].astype(float)
    ys = logs[i0 : i1 + 1]
    slope, intercept = np.polyfit(ns, ys, 1)
    resid = float(np.sqrt(np.mean((ys - (slope * ns + intercept)) ** 2)))
    return float(np.exp(slope)), float(np.exp(intercept)), (int(idx[i0]), int(idx[i1])), resid


def fit_rates(records, errors_u: Sequence[float], errors_e: Sequence[float],
              window: Optional[Tuple[int, int]] = None) -> RateFit:
    """Least-squares geometric fits err ~ B A^n for the state and energy
    error histories; the linear regime is auto-detected per series unless a
    window (first, last iteration index) is forced."""
    a_u, b_u, win_u, res_u = _fit_series(np.asarray(errors_u), window)
    a_e, b_e, win_e, res_e = _fit_series(np.asarray(errors_e), window)
    return RateFit(a_u, b_u, a_e, b_e, win_u, win_e, res_u, res_e)


def kappa_estimate(a_u: float, method: str) -> float:
    """Invert the classical rate/conditioning relations.

    gradient: A = (k-1)/(k+1)        -> k = (1+A)/(1-A)
    cg:       A = (sqrt k-1)/(sqrt k+1) -> k = ((1+A)/(1-A))^2
    """
    if not 0.0 <= a_u < 1.0:
        raise ValueError("rate must lie in [0, 1)")
    base = (1.0 + a_u) / (1.0 - a_u)
    if method == "gradient":
        return float(base)
    if method == "cg":
        return float(base * base)
    raise ValueError("method must be 'gradient' or 'cg'")
