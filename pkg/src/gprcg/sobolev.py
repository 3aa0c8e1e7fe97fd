"""Riesz representation solves and tangent-space projection.

The Sobolev gradient G in metric X solves  <G, v>_X = <l2_gradient(u), v>_L2
for every discrete v.  The Gram operators of the H1 and HA products are
compact complex five-point stencils assembled edge-wise, Hermitian positive
definite by construction (identity plus a sum of squared covariant
differences), so a Jacobi-preconditioned conjugate-gradient iteration is
applied matrix-free.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import backend
from .grid import Field, Grid, inner_l2
from .model import ModelParams, l2_gradient

METRICS = ("L2", "H1", "HA")


class SolverError(RuntimeError):
    pass


class DegenerateProjectionError(RuntimeError):
    pass


@dataclass
class RieszSolver:
    metric: str = "HA"
    rel_tol: float = 1e-10
    max_iter: int = 0  # 0 -> 10 * sqrt(#nodes)
    preconditioner: str = "diagonal"  # diagonal | none

    def __post_init__(self):
        if self.metric not in METRICS:
            raise ValueError(f"metric must be one of {METRICS}")
        if not 0.0 < self.rel_tol < 1.0:
            raise ValueError("rel_tol must lie in (0, 1)")
        if self.preconditioner not in ("diagonal", "none"):
            raise ValueError("preconditioner must be 'diagonal' or 'none'")

    def iter_cap(self, n: int) -> int:
        return self.max_iter if self.max_iter > 0 else int(10 * np.sqrt(n)) + 1


@dataclass
class SolveStats:
    iterations: int
    rel_residual: float


def riesz_stencil(grid: Grid, metric: str, c_omega: float):
    """Gram-operator stencil of the metric's inner product (cached per grid).

    x-channel edge difference (u_E - u_i)/h + i a (u_E + u_i)/2 with
    a = c_omega * y contributes |p|^2 to the diagonal and -p^2 / -conj(p)^2
    off-diagonals, p = 1/h + i a/2; rim-cut edges only add
    1/(theta h^2) + theta a^2/4 to the diagonal.  y-channel analogous with
    b = -c_omega * x.  metric H1 is the c_omega = 0 case.
    """
    if metric == "H1":
        c_omega = 0.0
    key = ("riesz", metric, float(c_omega))
    got = grid.cache.get(key)
    if got is not None:
        return got

    n = grid.n
    h = grid.h
    h2 = h * h
    a = c_omega * grid.y
    b = -c_omega * grid.x
    p = 1.0 / h + 0.5j * a
    q = 1.0 / h + 0.5j * b

    from .grid import E, N, S, W

    full = grid.nbr != n
    th = grid.theta
    c_e = np.where(full[E], -(p * p), 0.0)
    c_w = np.where(full[W], -np.conj(p) ** 2, 0.0)
    c_n = np.where(full[N], -(q * q), 0.0)
    c_s = np.where(full[S], -np.conj(q) ** 2, 0.0)
    diag = np.ones(n, dtype=np.complex128)
    p2 = np.abs(p) ** 2
    q2 = np.abs(q) ** 2
    for d, amp2, abs2 in ((E, a * a, p2), (W, a * a, p2), (N, b * b, q2), (S, b * b, q2)):
        cut = ~full[d]
        add = np.where(cut, 1.0 / (th[d] * h2) + 0.25 * th[d] * amp2, abs2)
        diag += add
    got = (c_w, c_e, c_s, c_n, diag)
    grid.cache[key] = got
    return got


class StencilOperator:
    """Matrix-free application of a five-point stencil with padded gather."""

    def __init__(self, grid: Grid, coeffs):
        self.grid = grid
        self.c_w, self.c_e, self.c_s, self.c_n, self.diag = coeffs
        self._pad = np.zeros(grid.n + 1, dtype=np.complex128)

    def apply(self, x: np.ndarray, out: np.ndarray):
        self._pad[: self.grid.n] = x
        backend.stencil_apply(
            self._pad, *self.grid.nbr, self.c_w, self.c_e, self.c_s, self.c_n, self.diag, out
        )

    def jacobi(self) -> np.ndarray:
        return self.diag.real.copy()


def pcg(op: StencilOperator, b: np.ndarray, x0: Optional[np.ndarray], rel_tol: float,
        max_iter: int, precond: Optional[np.ndarray]) -> tuple[np.ndarray, SolveStats]:
    """Preconditioned CG for the Hermitian positive definite stencil."""
    n = b.shape[0]
    bnorm = np.sqrt(backend.dot_l2(b, b).real)
    if bnorm == 0.0:
        return np.zeros(n, dtype=np.complex128), SolveStats(0, 0.0)
    x = np.zeros(n, dtype=np.complex128) if x0 is None else x0.astype(np.complex128, copy=True)
    q = np.empty(n, dtype=np.complex128)
    if x0 is None:
        r = b.copy()
    else:
        op.apply(x, q)
        r = b - q
    z = r / precond if precond is not None else r.copy()
    rho = backend.dot_l2(r, z).real
    p = z.copy()
    rnorm = np.sqrt(backend.dot_l2(r, r).real)
    it = 0
    while rnorm > rel_tol * bnorm and it < max_iter:
        op.apply(p, q)
        denom = backend.dot_l2(p, q).real
        if denom <= 0.0:
            raise SolverError("stencil operator lost positive definiteness")
        alpha = rho / denom
        x += alpha * p
        r -= alpha * q
        rnorm = np.sqrt(backend.dot_l2(r, r).real)
        if precond is not None:
            z = r / precond
        else:
            z = r
        rho_new = backend.dot_l2(r, z).real
        p = z + (rho_new / rho) * p
        rho = rho_new
        it += 1
    rel = rnorm / bnorm
    if rel > rel_tol:
        raise SolverError(
            f"Riesz solve did not converge in {max_iter} iterations (rel residual {rel:.3e})"
        )
    return x, SolveStats(it, float(rel))


class RieszContext:
    """Per-(grid, metric, c_omega) solve context with warm-start memory."""

    def __init__(self, grid: Grid, cfg: RieszSolver, c_omega: float):
        self.cfg = cfg
        self.grid = grid
        if cfg.metric != "L2":
            self.op = StencilOperator(grid, riesz_stencil(grid, cfg.metric, c_omega))
            self.precond = self.op.jacobi() if cfg.preconditioner == "diagonal" else None
        else:
            self.op = None
            self.precond = None

    def solve(self, rhs: np.ndarray, x0: Optional[np.ndarray] = None):
        if self.op is None:
            return rhs.copy(), SolveStats(0, 0.0)
        return pcg(self.op, rhs, x0, self.cfg.rel_tol, self.cfg.iter_cap(self.grid.n), self.precond)


def sobolev_gradient(u: Field, p: ModelParams, s: RieszSolver,
                     x0: Optional[Field] = None) -> tuple[Field, SolveStats]:
    """Gradient of the energy in the metric s.metric (L2 returns the strong form)."""
    rhs = l2_gradient(u, p)
    if s.metric == "L2":
        return rhs, SolveStats(0, 0.0)
    ctx = RieszContext(u.grid, s, p.c_omega)
    vals, stats = ctx.solve(rhs.values, None if x0 is None else x0.values)
    return Field(u.grid, vals), stats


def riesz_of_state(u: Field, s: RieszSolver, c_omega: float = 0.0,
                   x0: Optional[Field] = None) -> tuple[Field, SolveStats]:
    """Solve <v_X, v>_X = <u, v>_L2; identity map when X = L2."""
    if s.metric == "L2":
        return u.copy(), SolveStats(0, 0.0)
    ctx = RieszContext(u.grid, s, c_omega)
    vals, stats = ctx.solve(u.values, None if x0 is None else x0.values)
    return Field(u.grid, vals), stats


def project_tangent(g: Field, u: Field, v_x: Field) -> Field:
    """Remove the constraint-normal component: g - lambda v_x with
    lambda = Re<u, g> / Re<u, v_x> in the L2 product."""
    num = inner_l2(u, g).real
    den = inner_l2(u, v_x).real
    from .grid import norm_l2

    if abs(den) < 1e-14 * max(norm_l2(u) * norm_l2(v_x), 1e-300):
        raise DegenerateProjectionError("projection denominator Re<u, v_X> vanished")
    lam = num / den
    return Field(u.grid, g.values - lam * v_x.values)


def check_positive_definite(grid: Grid, metric: str, c_omega: float, rng=None) -> bool:
    """Randomized PD check of the Gram operator (used by the verify suite)."""
    rng = rng or np.random.default_rng(0)
    op = StencilOperator(grid, riesz_stencil(grid, metric, c_omega))
    out = np.empty(grid.n, dtype=np.complex128)
    for _ in range(5):
        w = rng.standard_normal(grid.n) + 1j * rng.standard_normal(grid.n)
        op.apply(w, out)
        if backend.dot_l2(out, w).real <= 0:
            return False
    return True
