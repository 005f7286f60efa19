"""First-order Taylor expansion of the far-zone kernel about the atom centres.

The kernel is ``f = 1/(|x' - x''|^2 - (t' - t'')^2)`` with ``x'`` near atom 2
at ``(0, 0, r)`` and ``x''`` near atom 1 at the origin. Each atom's first-order
term relative to the zeroth is bounded by ``2 d_A / r`` when its electron stays
within ``d_A`` of the nucleus.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

#: Coordinate order used by :func:`kernel` and the partials record.
COORDINATES = ("x1", "y1", "z1", "t1", "x2", "y2", "z2", "t2")


@dataclass(frozen=True)
class ExpansionPoint:
    """Atom separation ``r`` and atomic extent ``d_A``, with ``0 < d_A < r``."""

    r: float
    d_a: float

    def __post_init__(self):
        if not (0 < self.d_a < self.r):
            raise DomainError(f"need 0 < d_A < r, got d_A={self.d_a}, r={self.r}")

    def centre(self) -> np.ndarray:
        """Expansion point ``p`` in the order of :data:`COORDINATES`.

        Index ``1`` is the emission event (single prime, near atom 2 on the
        z axis); index ``2`` is the absorption event (double prime, near
        atom 1 at the origin). Both times are zero.
        """
        return np.array([0.0, 0.0, self.r, 0.0, 0.0, 0.0, 0.0, 0.0])


@dataclass(frozen=True)
class TaylorCoefficients:
    value: float
    d_z1: float
    d_z2: float
    d_t1: float
    d_t2: float
    d_x1: float = 0.0
    d_y1: float = 0.0
    d_x2: float = 0.0
    d_y2: float = 0.0

    def gradient(self) -> np.ndarray:
        """Partials in the order of :data:`COORDINATES`."""
        return np.array([self.d_x1, self.d_y1, self.d_z1, self.d_t1,
                         self.d_x2, self.d_y2, self.d_z2, self.d_t2])


def kernel(q) -> float:
    """``1/(|x1 - x2|^2 - (t1 - t2)^2)`` at ``q`` ordered as :data:`COORDINATES`."""
    q = np.asarray(q, dtype=float)
    dx = q[0:3] - q[4:7]
    dt = q[3] - q[7]
    return 1.0 / (float(dx @ dx) - dt * dt)


def propagator_taylor_coefficients(point: ExpansionPoint) -> TaylorCoefficients:
    """Zeroth- and first-order coefficients of :func:`kernel` at ``point.centre()``.

    With the separation along z, ``df/dz1 = -2/r^3``, ``df/dz2 = +2/r^3`` and
    every time and transverse partial vanishes.
    """
    r = point.r
    return TaylorCoefficients(value=1.0 / r**2, d_z1=-2.0 / r**3, d_z2=2.0 / r**3,
                              d_t1=0.0, d_t2=0.0)


def central_difference_gradient(point: ExpansionPoint, step: float | None = None
                                ) -> np.ndarray:
    """Numerical gradient of :func:`kernel` with step ``1e-5 r`` by default."""
    h = 1e-5 * point.r if step is None else step
    p = point.centre()
    grad = np.empty(len(p))
    for i in range(len(p)):
        e = np.zeros(len(p))
        e[i] = h
        grad[i] = (kernel(p + e) - kernel(p - e)) / (2 * h)
    return grad


def multipole_ratio_bound(point: ExpansionPoint) -> float:
    """Worst-case first-order/zeroth-order ratio ``2 d_A / r``.

    This bounds the term from either atom's electron moving at most ``d_A``
    from its nucleus; the two atoms' terms add.
    """
    return 2.0 * point.d_a / point.r


def first_order_ratio(point: ExpansionPoint, displacement) -> float:
    """Actual first-order/zeroth-order ratio for a given coordinate displacement."""
    c = propagator_taylor_coefficients(point)
    return abs(float(c.gradient() @ np.asarray(displacement, dtype=float))) / c.value


def certificate(r: float, d_a: float, limit: float = 1e-3) -> tuple[float, bool]:
    """Bound and whether it is within ``limit`` for a separation ``r``."""
    b = multipole_ratio_bound(ExpansionPoint(r, d_a))
    return b, b <= limit and math.isfinite(b)
