"""Minimization drivers for the constrained energy.

Five methods share the diagnostics and stopping machinery:

    PG   projected Sobolev gradient, straight-line step, periodic renormalization
    RG   projected gradient + retraction, arc-minimization
    CG   nonlinear conjugate gradient on the tangent spaces, no transport
    RCG  conjugate gradient with Riemannian vector transport (FR or PR momentum)
    BE   semi-implicit backward Euler on the L2 gradient flow + normalization

Step sizes come from a bracketing + Brent line/arc search that is warm
started with the previously accepted step and never returns a point worse
than the start.  The search direction for the conjugate methods is

    d_1 = -P G_1,   d_n = -P G_n + beta_n * T(d_{n-1}),

with T the transport along the accepted motion and beta the Fletcher-Reeves
or (transported) Polak-Ribiere ratio in the run metric; a direction that
fails the descent test Re<d, P G> < 0 is replaced by -P G.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field as dc_field
from typing import Callable, List, Optional

import numpy as np

from .grid import Field, inner_h1, inner_l2, inner_ha, norm_l2
from .model import ModelParams, angular_momentum, energy, l2_gradient, trap_values
from .riemannian import TransportKind, drift, retract, transport
from .sobolev import RieszContext, RieszSolver, SolverError, StencilOperator, pcg, project_tangent

METHODS = ("PG", "RG", "CG", "RCG", "BE")


@dataclass
class LineSearchConfig:
    tau_init: float = 1.0
    bracket_growth: float = 2.0
    brent_tol: float = 1e-4
    max_evals: int = 40


@dataclass
class MethodConfig:
    method: str = "RCG"
    momentum: str = "PR"  # FR | PR
    transport: TransportKind = TransportKind.RIEMANNIAN_SUBMANIFOLD
    reset_period: int = 0  # 0 = never reset the momentum
    eps_stop: float = 1e-12
    max_iter: int = 20000
    linesearch: LineSearchConfig = dc_field(default_factory=LineSearchConfig)
    pg_normalize_every: int = 10
    be_dt: float = 10.0
    be_rel_tol: float = 1e-8
    pr_clamp_nonnegative: bool = False
    riesz: RieszSolver = dc_field(default_factory=RieszSolver)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        if self.momentum not in ("FR", "PR"):
            raise ValueError("momentum must be FR or PR")
        if not self.eps_stop > 0:
            raise ValueError("eps_stop must be positive")
        if self.method == "BE" and not self.be_dt > 0:
            raise ValueError("BE needs a positive pseudo-time step")
        if isinstance(self.transport, str):
            self.transport = {
                "none": TransportKind.NONE,
                "DR": TransportKind.DIFFERENTIATED_RETRACTION,
                "RS": TransportKind.RIEMANNIAN_SUBMANIFOLD,
            }[self.transport]


@dataclass
class IterationRecord:
    n: int
    energy: float
    rel_de: float
    step_change: float
    drift: float
    tau: float
    beta: float
    lz: float
    resid: float
    t_wall: float


@dataclass
class RunResult:
    field: Field
    records: List[IterationRecord]
    termination: str  # converged | max_iter | error
    message: str = ""
    energy_evals: int = 0
    method: str = ""

    @property
    def iterations(self) -> int:
        return len(self.records)


def check_stop(records: List[IterationRecord], eps_stop: float) -> bool:
    """Relative energy decrease below threshold at the latest iteration."""
    return bool(records) and records[-1].rel_de < eps_stop


# ---------------------------------------------------------------------------
# Line / arc minimization
# ---------------------------------------------------------------------------


@dataclass
class BrentResult:
    tau: float
    value: float
    evals: int
    status: str  # ok | no_decrease


_GOLD = 0.3819660112501051


def _brent_refine(f, lo, x, hi, fx, rel_tol, budget):
    w = v = x
    fw = fv = fx
    d = e = 0.0
    for _ in range(max(budget, 0)):
        m = 0.5 * (lo + hi)
        tol1 = rel_tol * abs(x) + 1e-300
        tol2 = 2.0 * tol1
        if abs(x - m) <= tol2 - 0.5 * (hi - lo):
            break
        use_golden = True
        if abs(e) > tol1:
            r = (x - w) * (fx - fv)
            q = (x - v) * (fx - fw)
            p = (x - v) * q - (x - w) * r
            q = 2.0 * (q - r)
            if q > 0.0:
                p = -p
            q = abs(q)
            if abs(p) < abs(0.5 * q * e) and p > q * (lo - x) and p < q * (hi - x):
                e, d = d, p / q
                u = x + d
                if u - lo < tol2 or hi - u < tol2:
                    d = tol1 if x < m else -tol1
                use_golden = False
        if use_golden:
            e = (hi - x) if x < m else (lo - x)
            d = _GOLD * e
        u = x + d if abs(d) >= tol1 else x + (tol1 if d > 0 else -tol1)
        fu = f(u)
        if fu <= fx:
            if u < x:
                hi = x
            else:
                lo = x
            v, fv, w, fw = w, fw, x, fx
            x, fx = u, fu
        else:
            if u < x:
                lo = u
            else:
                hi = u
            if fu <= fw or w == x:
                v, fv, w, fw = w, fw, u, fu
            elif fu <= fv or v == x or v == w:
                v, fv = u, fu
    return x, fx


def brent_arc_min(phi: Callable[[float], float], ls: LineSearchConfig,
                  f0: Optional[float] = None, tau_init: Optional[float] = None) -> BrentResult:
    """Bracket a minimizer of phi on tau > 0 by geometric expansion from the
    warm-start step, refine with Brent, and return the best sample seen.

    Guarantees value <= phi(0) unless status is 'no_decrease'.
    """
    if f0 is None:
        f0 = phi(0.0)
    state = {"evals": 0, "best_t": 0.0, "best_f": f0}

    def f(t):
        v = phi(t)
        state["evals"] += 1
        if v < state["best_f"]:
            state["best_t"], state["best_f"] = t, v
        return v

    growth = ls.bracket_growth
    t1 = tau_init if (tau_init is not None and tau_init > 0) else ls.tau_init
    f1 = f(t1)
    while f1 >= f0:
        t1 /= growth
        if state["evals"] >= ls.max_evals or t1 < 1e-16:
            return BrentResult(state["best_t"], state["best_f"], state["evals"], "no_decrease")
        f1 = f(t1)

    a, b, fb = 0.0, t1, f1
    c = b * growth
    fc = f(c)
    while fc < fb and state["evals"] < ls.max_evals:
        a, b, fb = b, c, fc
        c *= growth
        fc = f(c)
    if fc >= fb:
        _brent_refine(f, a, b, c, fb, ls.brent_tol, min(ls.max_evals - state["evals"], 60))
    return BrentResult(state["best_t"], state["best_f"], state["evals"], "ok")


# ---------------------------------------------------------------------------
# Shared driver pieces
# ---------------------------------------------------------------------------


def _metric_inner(metric: str, a: Field, b: Field, c_omega: float) -> complex:
    if metric == "HA":
        return inner_ha(a, b, c_omega)
    if metric == "H1":
        return inner_h1(a, b)
    return inner_l2(a, b)


def _enter_manifold(u0: Field, p: ModelParams, ctx: RieszContext) -> Field:
    """Normalize the start; a zero start takes one raw gradient step first."""
    n0 = norm_l2(u0)
    if n0 >= 1e-14:
        return u0 * (1.0 / n0)
    rhs = l2_gradient(u0, p)
    gvals, _ = ctx.solve(rhs.values)
    g = Field(u0.grid, gvals)
    return retract(u0, -g)


def run(u0: Field, p: ModelParams, cfg: MethodConfig,
        callback: Optional[Callable] = None) -> RunResult:
    if cfg.method == "BE":
        return run_be(u0, p, cfg, callback)
    return _run_gradient_family(u0, p, cfg, callback)


def run_pg(u0, p, cfg, callback=None):
    assert cfg.method == "PG"
    return _run_gradient_family(u0, p, cfg, callback)


def run_rg(u0, p, cfg, callback=None):
    assert cfg.method == "RG"
    return _run_gradient_family(u0, p, cfg, callback)


def run_rcg(u0, p, cfg, callback=None):
    assert cfg.method in ("RCG", "CG")
    return _run_gradient_family(u0, p, cfg, callback)


def _run_gradient_family(u0: Field, p: ModelParams, cfg: MethodConfig,
                         callback: Optional[Callable]) -> RunResult:
    method = cfg.method
    conjugate = method in ("CG", "RCG")
    kind = TransportKind.NONE if method == "CG" else cfg.transport
    metric = cfg.riesz.metric
    grid = u0.grid
    ctx = RieszContext(grid, cfg.riesz, p.c_omega)

    t0 = time.perf_counter()
    records: List[IterationRecord] = []
    evals = 0

    u = _enter_manifold(u0, p, ctx)
    e_cur = energy(u, p)
    evals += 1

    g_warm = v_warm = None
    pg_prev: Optional[Field] = None
    dir_prev: Optional[Field] = None
    u_prev: Optional[Field] = None
    eta_prev: Optional[Field] = None
    pg_prev_norm2 = 0.0
    tau_warm = None
    steps_since_reset = 0
    termination, message = "max_iter", ""

    for n in range(1, cfg.max_iter + 1):
        try:
            gvals, gstats = ctx.solve(l2_gradient(u, p).values, g_warm)
            g_warm = gvals
            vvals, vstats = ctx.solve(u.values, v_warm)
            v_warm = vvals
        except SolverError as exc:
            termination, message = "error", str(exc)
            break
        pg = project_tangent(Field(grid, gvals), u, Field(grid, vvals))
        pg_norm2 = _metric_inner(metric, pg, pg, p.c_omega).real

        beta = 0.0
        d = -pg
        if conjugate and dir_prev is not None:
            if cfg.reset_period > 0 and steps_since_reset >= cfg.reset_period:
                steps_since_reset = 0
            else:
                t_dir = transport(kind, u_prev, eta_prev, dir_prev)
                if cfg.momentum == "FR":
                    beta = pg_norm2 / pg_prev_norm2
                else:
                    t_pg = transport(kind, u_prev, eta_prev, pg_prev)
                    beta = (pg_norm2 - _metric_inner(metric, pg, t_pg, p.c_omega).real) / pg_prev_norm2
                    if cfg.pr_clamp_nonnegative:
                        beta = max(beta, 0.0)
                d = -pg + beta * t_dir
                if _metric_inner(metric, d, pg, p.c_omega).real >= 0.0:
                    d = -pg
                    beta = 0.0

        if method == "PG":
            def phi(t, _u=u, _d=d):
                return energy(Field(grid, _u.values + t * _d.values), p)
        else:
            def phi(t, _u=u, _d=d):
                w = Field(grid, _u.values + t * _d.values)
                return energy(w * (1.0 / norm_l2(w)), p)

        br = brent_arc_min(phi, cfg.linesearch, f0=e_cur, tau_init=tau_warm)
        evals += br.evals
        if br.status == "no_decrease" and conjugate and beta != 0.0:
            d = -pg
            beta = 0.0
            br = brent_arc_min(phi, cfg.linesearch, f0=e_cur, tau_init=None)
            evals += br.evals
        if br.status == "no_decrease":
            termination, message = "error", f"line search found no decrease at iteration {n}"
            break

        tau = br.tau
        u_hat = Field(grid, u.values + tau * d.values)
        step_drift = drift(u_hat)
        if method == "PG":
            u_new = u_hat
            e_new = br.value
            if cfg.pg_normalize_every > 0 and n % cfg.pg_normalize_every == 0:
                u_new = u_hat * (1.0 / norm_l2(u_hat))
                e_new = energy(u_new, p)
                evals += 1
        else:
            u_new = u_hat * (1.0 / norm_l2(u_hat))
            e_new = br.value

        rel_de = abs(e_new - e_cur) / max(abs(e_cur), 1e-300)
        rec = IterationRecord(
            n=n,
            energy=e_new,
            rel_de=rel_de,
            step_change=norm_l2(u_new - u),
            drift=step_drift,
            tau=tau,
            beta=beta,
            lz=angular_momentum(u_new),
            resid=max(gstats.rel_residual, vstats.rel_residual),
            t_wall=time.perf_counter() - t0,
        )
        records.append(rec)
        if callback is not None:
            callback(n, u_new, rec)

        u_prev, eta_prev = u, Field(grid, tau * d.values)
        pg_prev, dir_prev, pg_prev_norm2 = pg, d, pg_norm2
        u, e_cur = u_new, e_new
        tau_warm = tau
        steps_since_reset += 1

        if check_stop(records, cfg.eps_stop):
            termination = "converged"
            break

    return RunResult(u, records, termination, message, evals, method)


# ---------------------------------------------------------------------------
# Backward Euler baseline
# ---------------------------------------------------------------------------


def run_be(u0: Field, p: ModelParams, cfg: MethodConfig,
           callback: Optional[Callable] = None) -> RunResult:
    """Semi-implicit gradient-flow step then renormalization.

    Each iteration solves
        (1/dt + V + c_g |u_n|^2) w - 1/2 Lap w - i c_omega (y w_x - x w_y) = u_n / dt
    with the same matrix-free CG as the Riesz solves (the operator is
    Hermitian and positive definite while the effective trap confines).
    """
    assert cfg.method == "BE"
    grid = u0.grid
    h = grid.h
    dt = cfg.be_dt
    n_nodes = grid.n

    lap = grid.stencil("laplacian")
    adv = grid.stencil("advect")
    c_dirs = []
    for i in range(4):
        c_dirs.append(-0.5 * lap[i] - 1.0j * p.c_omega * adv[i])
    diag = np.empty(n_nodes, dtype=np.complex128)
    op = StencilOperator(grid, (*c_dirs, diag))
    pot = trap_values(p.trap, grid)
    lap_diag = lap[4].real  # negative sums of 1/(theta h^2)

    t0 = time.perf_counter()
    records: List[IterationRecord] = []
    evals = 0

    if norm_l2(u0) < 1e-14:
        if p.source is None:
            raise ValueError("BE cannot start from the zero field without a source term")
        u = retract(u0, p.source)
    else:
        u = u0 * (1.0 / norm_l2(u0))
    e_cur = energy(u, p)
    evals += 1

    max_cg = cfg.riesz.iter_cap(n_nodes)
    termination, message = "max_iter", ""
    warm = None
    for n in range(1, cfg.max_iter + 1):
        a2 = u.values.real**2 + u.values.imag**2
        np.copyto(diag, 1.0 / dt + pot + p.c_g * a2 - 0.5 * lap_diag)
        rhs = u.values / dt
        try:
            w, stats = pcg(op, rhs, u.values if warm is None else warm, cfg.be_rel_tol,
                           max_cg, diag.real)
        except SolverError as exc:
            termination, message = "error", str(exc)
            break
        warm = w
        u_hat = Field(grid, w)
        step_drift = drift(u_hat)
        u_new = u_hat * (1.0 / norm_l2(u_hat))
        e_new = energy(u_new, p)
        evals += 1
        rel_de = abs(e_new - e_cur) / max(abs(e_cur), 1e-300)
        rec = IterationRecord(
            n=n,
            energy=e_new,
            rel_de=rel_de,
            step_change=norm_l2(u_new - u),
            drift=step_drift,
            tau=dt,
            beta=0.0,
            lz=angular_momentum(u_new),
            resid=stats.rel_residual,
            t_wall=time.perf_counter() - t0,
        )
        records.append(rec)
        if callback is not None:
            callback(n, u_new, rec)
        u, e_cur = u_new, e_new
        if check_stop(records, cfg.eps_stop):
            termination = "converged"
            break

    return RunResult(u, records, termination, message, evals, "BE")
