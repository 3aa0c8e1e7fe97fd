"""Rotating Gross-Pitaevskii energy, its L2 gradient, and physics helpers.

Energy of a wavefunction u on the masked grid, in non-dimensional form:

    E(u) = integral of  1/2 |grad u|^2 + V |u|^2 + 1/2 c_g |u|^4
                        - i c_omega u* (y du/dx - x du/dy)
           minus (f* u + f u*) when a manufactured source f is present.

The kinetic term is the edge-sum quadratic form of the cut-edge Laplacian,
the rotation term uses centered differences, everything else is node-wise;
this makes the discrete directional derivative of E *exactly*
Re<l2_gradient(u), v> in the discrete L2 product, which the Riesz solves
and the optimizers rely on.

Thomas-Fermi helpers (chemical potential, radius, density, healing length)
feed the initial-guess constructors and the vortex detector.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from . import backend
from .grid import Field, Grid, inner_l2, norm_l2

IMAG_RESIDUE_RTOL = 1e-10


@dataclass(frozen=True)
class Harmonic:
    """V = (a_x x^2 + a_y y^2 + a_4 r^4) / 2."""

    a_x: float = 1.0
    a_y: float = 1.0
    a_4: float = 0.0

    def values(self, x, y):
        r2 = x * x + y * y
        return 0.5 * (self.a_x * x * x + self.a_y * y * y + self.a_4 * r2 * r2)


@dataclass(frozen=True)
class QuarticQuadratic:
    """V = (1 - alpha) r^2 + k r^4 / 4, k > 0."""

    alpha: float
    k: float

    def __post_init__(self):
        if not self.k > 0:
            raise ValueError("quartic coefficient k must be positive")

    def values(self, x, y):
        r2 = x * x + y * y
        return (1.0 - self.alpha) * r2 + 0.25 * self.k * r2 * r2


@dataclass(frozen=True)
class Anisotropic:
    """V = [(1 + eta^2) x^2 + (1 - eta) y^2] / 2 with eta = 2 (1 - c_omega) eps."""

    epsilon: float
    c_omega: float

    def __post_init__(self):
        if not 0.0 <= self.epsilon < 1.0:
            raise ValueError("anisotropy epsilon must satisfy 0 <= eps < 1")

    @property
    def eta(self) -> float:
        return 2.0 * (1.0 - self.c_omega) * self.epsilon

    def values(self, x, y):
        eta = self.eta
        return 0.5 * ((1.0 + eta * eta) * x * x + (1.0 - eta) * y * y)


Trap = Union[Harmonic, QuarticQuadratic, Anisotropic]


@dataclass
class ModelParams:
    c_g: float
    c_omega: float
    trap: Trap
    source: Optional[Field] = None

    def __post_init__(self):
        if self.c_g < 0:
            raise ValueError("interaction constant c_g must be >= 0")


def trap_values(trap: Trap, grid: Grid) -> np.ndarray:
    key = ("trap", trap)
    got = grid.cache.get(key)
    if got is None:
        got = np.asarray(trap.values(grid.x, grid.y), dtype=np.float64)
        grid.cache[key] = got
    return got


def effective_trap_values(p: ModelParams, grid: Grid) -> np.ndarray:
    """Trap minus the centrifugal term c_omega^2 r^2 / 2."""
    return trap_values(p.trap, grid) - 0.5 * p.c_omega**2 * grid.r2


def _energy_sums(u: Field, p: ModelParams):
    g = u.grid
    return backend.energy_terms(
        g.pad(u.values), *g.nbr, *g.theta, trap_values(p.trap, g), g.x, g.y, g.h
    )


def energy(u: Field, p: ModelParams) -> float:
    """Total energy; raises if non-finite or if the rotation-term quadrature
    leaks a relative imaginary residue above 1e-10 (an operator bug, not
    physics: the discrete advection is exactly skew-adjoint)."""
    g = u.grid
    h2 = g.h**2
    kin, vpot, quart, adv = _energy_sums(u, p)
    e = h2 * (0.5 * kin + vpot + 0.5 * p.c_g * quart + p.c_omega * adv.imag)
    if p.source is not None:
        e -= 2.0 * inner_l2(u, p.source).real
    residue = abs(p.c_omega * adv.real) * h2
    if residue > IMAG_RESIDUE_RTOL * max(abs(e), 1.0):
        raise ArithmeticError(f"rotation term imaginary residue {residue:.3e} at E={e:.6e}")
    if not np.isfinite(e):
        raise ArithmeticError("energy is not finite (iteration blew up)")
    return float(e)


def energy_a_form(u: Field, p: ModelParams) -> float:
    """Energy written through the covariant gradient and the effective trap.

    Same continuum value as energy(); discretely they differ by O(h^2)
    product-rule terms except at c_omega = 0 where the sums coincide.
    """
    from .grid import _grad_dot

    g = u.grid
    h2 = g.h**2
    cov = _grad_dot(u, u, p.c_omega).real
    a2 = u.values.real**2 + u.values.imag**2
    veff = effective_trap_values(p, g)
    e = 0.5 * cov + h2 * float(np.sum(veff * a2) + 0.5 * p.c_g * np.sum(a2 * a2))
    if p.source is not None:
        e -= 2.0 * inner_l2(u, p.source).real
    if not np.isfinite(e):
        raise ArithmeticError("energy is not finite (iteration blew up)")
    return float(e)


def l2_gradient(u: Field, p: ModelParams) -> Field:
    """Strong-form gradient 2(-1/2 Lap u + V u + c_g |u|^2 u - i c_omega (y u_x - x u_y)) - 2 f."""
    from .grid import _apply

    g = u.grid
    lap = _apply(g, "laplacian", u.values)
    adv = _apply(g, "advect", u.values)
    a2 = u.values.real**2 + u.values.imag**2
    vals = (
        -lap
        + 2.0 * trap_values(p.trap, g) * u.values
        + 2.0 * p.c_g * a2 * u.values
        - 2.0j * p.c_omega * adv
    )
    if p.source is not None:
        vals = vals - 2.0 * p.source.values
    return Field(g, vals)


def angular_momentum(u: Field) -> float:
    """L_z = Re i <u, y u_x - x u_y>-pairing; imaginary residue checked."""
    from .grid import advect

    g = u.grid
    s = backend.dot_l2(advect(u).values, u.values) * g.h**2  # sum conj(u)*adv
    lz = -s.imag
    if abs(s.real) > IMAG_RESIDUE_RTOL * max(abs(lz), 1.0):
        raise ArithmeticError(f"angular momentum residue {s.real:.3e}")
    return float(lz)


def chemical_potential(u: Field, p: ModelParams) -> float:
    """mu = E(u) + c_g/2 * integral |u|^4 (Lagrange multiplier at unit norm)."""
    g = u.grid
    a2 = u.values.real**2 + u.values.imag**2
    return energy(u, p) + 0.5 * p.c_g * float(np.sum(a2 * a2)) * g.h**2


# ---------------------------------------------------------------------------
# Thomas-Fermi approximation (kinetic term dropped)
# ---------------------------------------------------------------------------


def _harmonic_coeffs(p: ModelParams):
    if not isinstance(p.trap, Harmonic) or p.trap.a_4 != 0.0:
        raise ValueError("closed-form Thomas-Fermi needs a pure harmonic trap")
    ax = p.trap.a_x - p.c_omega**2
    ay = p.trap.a_y - p.c_omega**2
    if ax <= 0 or ay <= 0:
        raise ValueError(
            "effective trap is not confining: rotation at or beyond the trap frequency"
        )
    return ax, ay


def tf_mu(p: ModelParams) -> float:
    """Chemical potential with integral of the clipped TF density equal to 1."""
    ax, ay = _harmonic_coeffs(p)
    return float(np.sqrt(p.c_g * np.sqrt(ax * ay) / np.pi))


def tf_radius(p: ModelParams, centrifugal_squared: bool = True) -> float:
    """Condensate radius estimate sqrt(2 mu / a_eff) for the isotropic trap.

    centrifugal_squared=False reproduces the legacy reading with a 1-c_omega
    denominator; the default (1 - c_omega^2) matches the effective trap.
    """
    mu = tf_mu(p)
    if centrifugal_squared:
        ax, ay = _harmonic_coeffs(p)
        return float(np.sqrt(2.0 * mu / np.sqrt(ax * ay)))
    denom = 1.0 - p.c_omega
    if denom <= 0:
        raise ValueError("legacy radius undefined for c_omega >= 1")
    return float(np.sqrt(2.0 * mu / denom))


def tf_mu_grid(p: ModelParams, grid: Grid) -> float:
    """mu solving sum((mu - V_eff)_+ / c_g) h^2 = 1 on the grid (any trap)."""
    veff = effective_trap_values(p, grid)
    h2 = grid.h**2

    def mass(mu):
        return np.sum(np.maximum(mu - veff, 0.0)) * h2 / p.c_g

    lo = float(veff.min())
    hi = lo + 1.0
    while mass(hi) < 1.0:
        hi = lo + 2.0 * (hi - lo)
        if hi - lo > 1e12:
            raise RuntimeError("TF normalization failed; domain too small?")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mass(mid) < 1.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def tf_density(p: ModelParams, grid: Grid) -> Field:
    """Clipped Thomas-Fermi density (mu - V_eff)_+ / c_g as a real-valued field."""
    try:
        mu = tf_mu(p)
    except ValueError:
        mu = tf_mu_grid(p, grid)
    rho = np.maximum(mu - effective_trap_values(p, grid), 0.0) / p.c_g
    return Field(grid, rho.astype(np.complex128))


def healing_length(mu: float) -> float:
    if mu <= 0:
        raise ValueError("healing length needs a positive chemical potential")
    return float(1.0 / np.sqrt(2.0 * mu))


def quartic_regime(trap: QuarticQuadratic, c_g: float) -> int:
    """Classify the quartic +/- quadratic trap: 1 attractive quadratic part,
    2 weakly repulsive (mu > 0), 3 strongly repulsive (mu < 0)."""
    if trap.alpha < 1.0:
        return 1
    bound = 0.5 * trap.k * np.sqrt(3.0 * c_g / np.pi)
    return 2 if abs(1.0 - trap.alpha) < bound else 3


# ---------------------------------------------------------------------------
# Initial guesses
# ---------------------------------------------------------------------------


def _vortex_factor(grid: Grid, xv: float, yv: float, xi: float) -> np.ndarray:
    dx = grid.x - xv
    dy = grid.y - yv
    rv = np.hypot(dx, dy)
    amp = rv / np.sqrt(rv * rv + 2.0 * xi * xi)
    return amp * np.exp(1j * np.arctan2(dy, dx))


def _chemical_potential_estimate(p: ModelParams, grid: Grid) -> float:
    try:
        return tf_mu(p)
    except ValueError:
        return tf_mu_grid(p, grid)


def initial_guess(kind: str, p: ModelParams, grid: Grid, **kw) -> Field:
    """Construct a starting state.

    kinds: 'zero', 'tf_plain', 'tf_vortex' (x, y), 'tf_vortex_ring'
    (count, radius), 'gaussian_central_vortex'.  All nonzero kinds are
    normalized to the unit sphere before returning.
    """
    if kind == "zero":
        return Field.zeros(grid)
    if kind == "tf_plain":
        vals = np.sqrt(tf_density(p, grid).values.real)
    elif kind == "tf_vortex":
        mu = _chemical_potential_estimate(p, grid)
        xi = healing_length(mu)
        vals = np.sqrt(tf_density(p, grid).values.real)
        vals = vals * _vortex_factor(grid, kw.get("x", 0.0), kw.get("y", 0.0), xi)
    elif kind == "tf_vortex_ring":
        count = int(kw["count"])
        radius = float(kw["radius"])
        mu = _chemical_potential_estimate(p, grid)
        xi = healing_length(mu)
        vals = np.sqrt(tf_density(p, grid).values.real).astype(np.complex128)
        for k in range(count):
            ang = 2.0 * np.pi * k / count
            vals = vals * _vortex_factor(grid, radius * np.cos(ang), radius * np.sin(ang), xi)
    elif kind == "gaussian_central_vortex":
        mu = _chemical_potential_estimate(p, grid)
        xi = healing_length(mu)
        sigma = 0.5 * tf_radius(p)
        r = np.sqrt(grid.r2)
        vals = np.exp(-grid.r2 / (2.0 * sigma * sigma)) * np.tanh(r / xi)
        vals = vals * np.exp(1j * np.arctan2(grid.y, grid.x))
    else:
        raise ValueError(f"unknown initial guess kind {kind!r}")
    f = Field(grid, np.asarray(vals, dtype=np.complex128))
    nrm = norm_l2(f)
    if nrm < 1e-14:
        raise ValueError(f"initial guess {kind!r} vanished on this grid")
    return f * (1.0 / nrm)
