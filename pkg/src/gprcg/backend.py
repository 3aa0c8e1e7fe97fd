"""Kernel backend selection.

Hot inner loops (stencil application, quadrature sums) exist twice: a numba
@njit implementation and a pure-numpy gather/reduce implementation.  The
environment variable GPRCG_BACKEND picks one:

    GPRCG_BACKEND=numba   force numba (error if unavailable)
    GPRCG_BACKEND=numpy   force the vectorized numpy path
    unset / auto          numba when importable, else numpy

GPRCG_THREADS caps the numba thread count.  Reductions are sequential in
both backends so results are reproducible run to run.
"""

import os

_CHOICE = os.environ.get("GPRCG_BACKEND", "auto").strip().lower()

if _CHOICE not in ("auto", "numba", "numpy"):
    raise ValueError(f"GPRCG_BACKEND must be 'numba' or 'numpy', got {_CHOICE!r}")

_numba_err = None
if _CHOICE in ("auto", "numba"):
    try:
        import numba  # noqa: F401

        from . import kernels_numba as _impl

        BACKEND = "numba"
        nthreads = os.environ.get("GPRCG_THREADS")
        if nthreads:
            numba.set_num_threads(max(1, int(nthreads)))
    except ImportError as exc:  # pragma: no cover - depends on environment
        _numba_err = exc
        if _CHOICE == "numba":
            raise
        from . import kernels_numpy as _impl

        BACKEND = "numpy"
else:
    from . import kernels_numpy as _impl

    BACKEND = "numpy"

stencil_apply = _impl.stencil_apply
dot_l2 = _impl.dot_l2
energy_terms = _impl.energy_terms
grad_edge_dot = _impl.grad_edge_dot


def get_impl(name: str):
    """Return a named kernel module ('numba' or 'numpy'), for benchmarks."""
    if name == "numpy":
        from . import kernels_numpy

        return kernels_numpy
    if name == "numba":
        from . import kernels_numba

        return kernels_numba
    raise ValueError(name)
