"""Primitives on the unit-L2-norm sphere: retraction, vector transport, drift.

The manifold metric is the one induced by the embedding L2 space, so all
inner products and norms below are plain L2.  Transports carry a tangent
vector xi from the tangent space at u to the tangent space at
retract(u, eta); the two variants differ only by the factor 1/||u + eta||.
"""

from __future__ import annotations

from enum import Enum

from .grid import Field, inner_l2, norm_l2


class TransportKind(Enum):
    NONE = "none"
    DIFFERENTIATED_RETRACTION = "DR"
    RIEMANNIAN_SUBMANIFOLD = "RS"


class DegenerateRetractionError(RuntimeError):
    pass


def retract(u: Field, xi: Field) -> Field:
    """(u + xi) / ||u + xi||; from u = 0 this normalizes xi onto the sphere."""
    w = u + xi
    nrm = norm_l2(w)
    if nrm < 1e-14:
        raise DegenerateRetractionError("cannot retract: ||u + xi|| ~ 0")
    return w * (1.0 / nrm)


def transport(kind: TransportKind, u: Field, eta: Field, xi: Field,
              real_pairing: bool = False) -> Field:
    """Carry xi along the motion eta.

    RS:  xi - (<u+eta, xi> / ||u+eta||^2) (u+eta)   (projection at the target)
    DR:  the RS expression divided by ||u+eta||     (differentiated retraction)

    The pairing <.,.> is the full complex L2 product by default;
    real_pairing=True keeps only its real part (kept for comparison, the
    complex form is what makes the result tangent at the target for the
    complex projector).
    """
    if kind is TransportKind.NONE:
        return xi.copy()
    w = u + eta
    nrm2 = inner_l2(w, w).real
    if nrm2 < 1e-28:
        raise DegenerateRetractionError("cannot transport: ||u + eta|| ~ 0")
    coef = inner_l2(w, xi)
    if real_pairing:
        coef = coef.real
    out = Field(xi.grid, xi.values - (coef / nrm2) * w.values)
    if kind is TransportKind.DIFFERENTIATED_RETRACTION:
        out = out * (1.0 / nrm2**0.5)
    return out


def drift(u_hat: Field) -> float:
    """Constraint violation |1 - ||u||^2| of a pre-retraction iterate."""
    n = norm_l2(u_hat)
    return abs(1.0 - n * n)
