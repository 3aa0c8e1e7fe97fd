"""numba implementations of the hot kernels.

Conventions shared with kernels_numpy:

* field values are complex128 arrays over interior nodes, passed *padded*
  with one trailing zero (length N+1); neighbor tables index into the
  padded array and use N as the "exterior" sentinel,
* rim edges cut by the domain boundary carry the crossing fraction
  theta in (0, 1]; full edges carry theta = 1 and an interior neighbor,
* reductions are plain sequential loops so sums are reproducible.
"""

import numpy as np
from numba import njit, prange

__all__ = ["stencil_apply", "dot_l2", "energy_terms", "grad_edge_dot"]


@njit(cache=True, parallel=True)
def stencil_apply(u_pad, nbr_w, nbr_e, nbr_s, nbr_n, c_w, c_e, c_s, c_n, diag, out):
    """out = diag*u + c_w*u[W] + c_e*u[E] + c_s*u[S] + c_n*u[N] (exterior -> 0)."""
    n = out.shape[0]
    for i in prange(n):
        out[i] = (
            diag[i] * u_pad[i]
            + c_w[i] * u_pad[nbr_w[i]]
            + c_e[i] * u_pad[nbr_e[i]]
            + c_s[i] * u_pad[nbr_s[i]]
            + c_n[i] * u_pad[nbr_n[i]]
        )


@njit(cache=True)
def dot_l2(u, v):
    """Sum of u * conj(v), fixed summation order."""
    acc = 0.0 + 0.0j
    for i in range(u.shape[0]):
        acc += u[i] * np.conj(v[i])
    return acc


@njit(cache=True)
def energy_terms(u_pad, nbr_w, nbr_e, nbr_s, nbr_n, th_w, th_e, th_s, th_n, pot, x, y, h):
    """Quadrature pieces of the energy at unit weights.

    Returns (kin, vpot, quart, adv) where

        kin   = sum over edges of |D u|^2 / h^2 with 1/theta rim weights,
        vpot  = sum of pot * |u|^2,
        quart = sum of |u|^4,
        adv   = sum of conj(u) * (y du/dx - x du/dy)  (centered differences).

    The caller applies h^2, the 1/2 factors and the physics constants.
    """
    n = pot.shape[0]
    sentinel = n
    inv_h2 = 1.0 / (h * h)
    kin = 0.0
    vpot = 0.0
    quart = 0.0
    adv = 0.0 + 0.0j
    inv_2h = 0.5 / h
    for i in range(n):
        ui = u_pad[i]
        a2 = ui.real * ui.real + ui.imag * ui.imag
        vpot += pot[i] * a2
        quart += a2 * a2
        uw = u_pad[nbr_w[i]]
        ue = u_pad[nbr_e[i]]
        us = u_pad[nbr_s[i]]
        un = u_pad[nbr_n[i]]
        # x / y edges owned eastward / northward; rim edges owned by the
        # interior endpoint with the crossing fraction shortening the leg.
        if nbr_e[i] != sentinel:
            d = ue - ui
            kin += (d.real * d.real + d.imag * d.imag) * inv_h2
        else:
            kin += a2 * inv_h2 / th_e[i]
        if nbr_w[i] == sentinel:
            kin += a2 * inv_h2 / th_w[i]
        if nbr_n[i] != sentinel:
            d = un - ui
            kin += (d.real * d.real + d.imag * d.imag) * inv_h2
        else:
            kin += a2 * inv_h2 / th_n[i]
        if nbr_s[i] == sentinel:
            kin += a2 * inv_h2 / th_s[i]
        adv += np.conj(ui) * ((ue - uw) * (y[i] * inv_2h) - (un - us) * (x[i] * inv_2h))
    return kin, vpot, quart, adv


@njit(cache=True)
def grad_edge_dot(u_pad, v_pad, nbr_w, nbr_e, nbr_s, nbr_n, th_w, th_e, th_s, th_n, x, y, h, comega):
    """Covariant-gradient channel of the rotation-adapted inner product.

    Accumulates sum_e w_e * (D_A u)_e * conj((D_A v)_e) over lattice edges,
    with (D_A w)_e = (w_b - w_a)/len_e + i*comega*A_e*(w_b + w_a)/2 and the
    gauge field A = (y, -x) evaluated on the edge (exact: A is constant
    along its own difference direction).  Edge weight w_e is h^2 for full
    edges and theta*h^2 for rim-cut edges.  comega = 0 gives the plain H1
    gradient term.
    """
    n = x.shape[0]
    sentinel = n
    inv_h = 1.0 / h
    h2 = h * h
    acc = 0.0 + 0.0j
    for i in range(n):
        ui = u_pad[i]
        vi = v_pad[i]
        ax = comega * y[i]
        ay = -comega * x[i]
        if nbr_e[i] != sentinel:
            j = nbr_e[i]
            du = (u_pad[j] - ui) * inv_h + 1j * ax * 0.5 * (u_pad[j] + ui)
            dv = (v_pad[j] - vi) * inv_h + 1j * ax * 0.5 * (v_pad[j] + vi)
            acc += du * np.conj(dv) * h2
        else:
            t = th_e[i]
            s = -inv_h / t + 1j * ax * 0.5
            acc += (ui * s) * np.conj(vi * s) * (t * h2)
        if nbr_w[i] == sentinel:
            t = th_w[i]
            s = inv_h / t + 1j * ax * 0.5
            acc += (ui * s) * np.conj(vi * s) * (t * h2)
        if nbr_n[i] != sentinel:
            j = nbr_n[i]
            du = (u_pad[j] - ui) * inv_h + 1j * ay * 0.5 * (u_pad[j] + ui)
            dv = (v_pad[j] - vi) * inv_h + 1j * ay * 0.5 * (v_pad[j] + vi)
            acc += du * np.conj(dv) * h2
        else:
            t = th_n[i]
            s = -inv_h / t + 1j * ay * 0.5
            acc += (ui * s) * np.conj(vi * s) * (t * h2)
        if nbr_s[i] == sentinel:
            t = th_s[i]
            s = inv_h / t + 1j * ay * 0.5
            acc += (ui * s) * np.conj(vi * s) * (t * h2)
    return acc
