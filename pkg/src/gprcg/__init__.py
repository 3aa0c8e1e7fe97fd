"""Direct minimization of the rotating Gross-Pitaevskii energy on the unit
L2 sphere: Sobolev-preconditioned projected/Riemannian gradient and
conjugate-gradient methods, a backward-Euler baseline, manufactured-solution
verification, and vortex postprocessing."""

from .backend import BACKEND
from .grid import (
    Disk,
    Ellipse,
    Field,
    Grid,
    Rectangle,
    VecField,
    advect,
    build_grid,
    build_grid_nodes,
    grad,
    inner_h1,
    inner_ha,
    inner_l2,
    laplacian,
    norm_h1,
    norm_l2,
    norm_ha,
)
from .model import (
    Anisotropic,
    Harmonic,
    ModelParams,
    QuarticQuadratic,
    angular_momentum,
    chemical_potential,
    energy,
    energy_a_form,
    healing_length,
    initial_guess,
    l2_gradient,
    quartic_regime,
    tf_density,
    tf_mu,
    tf_mu_grid,
    tf_radius,
)
from .manufactured import (
    ManufacturedCase,
    RateFit,
    exact_solution,
    fit_rates,
    kappa_estimate,
    reference_angular_momentum,
    reference_energy,
    source_term,
)
from .optimizers import (
    BrentResult,
    IterationRecord,
    LineSearchConfig,
    MethodConfig,
    RunResult,
    brent_arc_min,
    check_stop,
    run,
    run_be,
    run_pg,
    run_rcg,
    run_rg,
)
from .postprocess import Vortex, detect_vortices, export_density, export_phase, total_winding
from .riemannian import TransportKind, drift, retract, transport
from .sobolev import (
    RieszSolver,
    SolveStats,
    project_tangent,
    riesz_of_state,
    sobolev_gradient,
)

__version__ = "0.1.0"
