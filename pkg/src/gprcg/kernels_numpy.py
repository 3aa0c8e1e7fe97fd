"""Pure-numpy fallback for the hot kernels (see kernels_numba for the
conventions).  Same argument lists, gather/reduce instead of loops; numpy's
pairwise summation keeps reductions reproducible."""

import numpy as np

__all__ = ["stencil_apply", "dot_l2", "energy_terms", "grad_edge_dot"]


def stencil_apply(u_pad, nbr_w, nbr_e, nbr_s, nbr_n, c_w, c_e, c_s, c_n, diag, out):
    n = out.shape[0]
    u = u_pad[:n]
    np.multiply(diag, u, out=out)
    out += c_w * u_pad[nbr_w]
    out += c_e * u_pad[nbr_e]
    out += c_s * u_pad[nbr_s]
    out += c_n * u_pad[nbr_n]


def dot_l2(u, v):
    return complex(np.sum(u * np.conj(v)))


def energy_terms(u_pad, nbr_w, nbr_e, nbr_s, nbr_n, th_w, th_e, th_s, th_n, pot, x, y, h):
    n = pot.shape[0]
    sentinel = n
    u = u_pad[:n]
    a2 = u.real**2 + u.imag**2
    vpot = float(np.sum(pot * a2))
    quart = float(np.sum(a2 * a2))

    uw = u_pad[nbr_w]
    ue = u_pad[nbr_e]
    us = u_pad[nbr_s]
    un = u_pad[nbr_n]

    inv_h2 = 1.0 / (h * h)
    kin = 0.0
    for nb, vals, th in ((nbr_e, ue, th_e), (nbr_n, un, th_n)):
        full = nb != sentinel
        d = vals - u
        kin += float(np.sum((d.real**2 + d.imag**2)[full])) * inv_h2
        cut = ~full
        kin += float(np.sum(a2[cut] / th[cut])) * inv_h2
    for nb, th in ((nbr_w, th_w), (nbr_s, th_s)):
        cut = nb == sentinel
        kin += float(np.sum(a2[cut] / th[cut])) * inv_h2

    adv = complex(np.sum(np.conj(u) * ((ue - uw) * (y / (2 * h)) - (un - us) * (x / (2 * h)))))
    return kin, vpot, quart, adv


def grad_edge_dot(u_pad, v_pad, nbr_w, nbr_e, nbr_s, nbr_n, th_w, th_e, th_s, th_n, x, y, h, comega):
    n = x.shape[0]
    sentinel = n
    u = u_pad[:n]
    v = v_pad[:n]
    h2 = h * h
    acc = 0.0 + 0.0j
    for axis, (nb_f, th_f, nb_b, th_b) in enumerate(
        ((nbr_e, th_e, nbr_w, th_w), (nbr_n, th_n, nbr_s, th_s))
    ):
        a = comega * y if axis == 0 else -comega * x
        full = nb_f != sentinel
        uf = u_pad[nb_f]
        vf = v_pad[nb_f]
        du = (uf - u) / h + 0.5j * a * (uf + u)
        dv = (vf - v) / h + 0.5j * a * (vf + v)
        acc += np.sum((du * np.conj(dv))[full]) * h2
        cut = ~full
        s = -1.0 / (th_f[cut] * h) + 0.5j * a[cut]
        acc += np.sum((u[cut] * s) * np.conj(v[cut] * s) * (th_f[cut] * h2))
        cutb = nb_b == sentinel
        sb = 1.0 / (th_b[cutb] * h) + 0.5j * a[cutb]
        acc += np.sum((u[cutb] * sb) * np.conj(v[cutb] * sb) * (th_b[cutb] * h2))
    return complex(acc)
