"""Massless Feynman propagator in natural units (hbar = c = 1).

Three routes to the same kernel are provided:

* :func:`feynman_propagator_closed` -- the closed form
  ``D_F = -1 / (4 i pi^2 (r^2 - tau^2 - i eps))``;
* :func:`feynman_propagator_far` -- its limit far outside the light cone;
* :func:`mode_sum_propagator` -- an independent, exponentially regulated
  radial mode integral of the vacuum correlation ``<0|A(x2,t') A(x1,t'')|0>``,
  which equals ``-i D_F`` away from the cone.

Only ``|D_F|`` and relative phases are physical; the overall sign follows the
closed form above.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceFailure, DomainError, LightConeSingularity

#: Relative half-width of the band around ``r = |tau|`` tagged ``near_cone``,
#: in units of ``max(r^2, tau^2)``.
CONE_GUARD = 1e-9

#: Grid export clamps ``|D_F|`` at this multiple of the far-field value at ``r = t``.
GRID_CLAMP = 1e6

OUTSIDE_CONE = "outside_cone"
INSIDE_CONE = "inside_cone"
NEAR_CONE = "near_cone"

_FOUR_PI2 = 4.0 * math.pi**2


@dataclass(frozen=True)
class SpacetimeInterval:
    """Spatial separation ``r >= 0`` and time delay ``tau`` between two events."""

    r: float
    tau: float

    def __post_init__(self):
        if not (math.isfinite(self.r) and math.isfinite(self.tau)):
            raise DomainError(f"non-finite interval ({self.r}, {self.tau})")
        if self.r < 0:
            raise DomainError(f"spatial separation must be >= 0, got {self.r}")

    def invariant_interval(self) -> float:
        """``r^2 - tau^2``, factored to keep precision near the cone."""
        return (self.r - self.tau) * (self.r + self.tau)

    def boosted(self, rapidity: float) -> "SpacetimeInterval":
        """Interval seen from a frame moving along the separation axis."""
        x, t = lorentz_boost(self.r, self.tau, rapidity)
        return SpacetimeInterval(abs(x), t)


@dataclass(frozen=True)
class PropagatorValue:
    value: complex
    regime: str

    def __complex__(self):
        return complex(self.value)

    def __abs__(self):
        return abs(self.value)


def classify(interval: SpacetimeInterval, cone_guard: float = CONE_GUARD) -> str:
    """Return the light-cone regime tag of an interval."""
    s = interval.invariant_interval()
    scale = max(interval.r**2, interval.tau**2)
    if scale == 0.0 or abs(s) < cone_guard * scale:
        return NEAR_CONE
    return OUTSIDE_CONE if s > 0 else INSIDE_CONE


def feynman_propagator_closed(interval: SpacetimeInterval, epsilon: float = 0.0,
                              cone_guard: float = CONE_GUARD) -> PropagatorValue:
    """Closed-form massless propagator.

    Parameters
    ----------
    interval : SpacetimeInterval
        Separation ``r`` and delay ``tau``.
    epsilon : float
        The ``i eps`` regulator. With ``epsilon = 0`` the interval must stay
        outside the ``near_cone`` band.
    cone_guard : float
        Relative width of the excluded band around the light cone.

    Returns
    -------
    PropagatorValue
        ``-1/(4 i pi^2 (r^2 - tau^2 - i eps))`` with its regime tag.
    """
    if epsilon < 0:
        raise DomainError(f"epsilon must be >= 0, got {epsilon}")
    regime = classify(interval, cone_guard)
    if epsilon == 0.0 and regime == NEAR_CONE:
        raise LightConeSingularity(
            f"r={interval.r}, tau={interval.tau} lies on the light cone")
    return PropagatorValue(_closed_value(interval.invariant_interval(), epsilon), regime)


def _closed_value(s, epsilon):
    return -1.0 / (4j * math.pi**2 * complex(s, -epsilon))


def feynman_propagator_far(r: float) -> complex:
    """Far-zone limit ``-1/(4 i pi^2 r^2)`` (purely imaginary, ``i/(4 pi^2 r^2)``)."""
    if not r > 0:
        raise DomainError(f"r must be > 0, got {r}")
    return _closed_value(r * r, 0.0)


def lorentz_boost(x: float, t: float, rapidity: float) -> tuple[float, float]:
    """Boost the event ``(x, t)`` along x by ``rapidity``."""
    ch, sh = math.cosh(rapidity), math.sinh(rapidity)
    return x * ch - t * sh, t * ch - x * sh


# --------------------------------------------------------------------------
# regulated mode sum


@dataclass(frozen=True)
class ModeSumConfig:
    """Exponential UV regulator ``eta``, cutoff ``k_max`` and panel count."""

    eta: float
    k_max: float
    panels: int = 4096

    def __post_init__(self):
        if not self.eta > 0:
            raise DomainError(f"eta must be > 0, got {self.eta}")
        if not self.k_max > 0:
            raise DomainError(f"k_max must be > 0, got {self.k_max}")
        if self.panels < 1:
            raise DomainError(f"panels must be a positive integer, got {self.panels}")
        if self.k_max * self.eta < 20:
            warnings.warn(f"k_max*eta = {self.k_max * self.eta:.3g} is not >> 1; "
                          "the truncation estimate dominates", RuntimeWarning,
                          stacklevel=2)

    @classmethod
    def default_for(cls, interval: SpacetimeInterval) -> "ModeSumConfig":
        """``eta = 0.01 min(r, |r - tau|)`` and ``k_max = 50/eta``."""
        scale = min(interval.r, abs(interval.r - interval.tau))
        if scale <= 0:
            raise DomainError("no default regulator on the light cone or at r = 0")
        eta = 0.01 * scale
        return cls(eta=eta, k_max=50.0 / eta)


@dataclass(frozen=True)
class ModeSumResult:
    value: complex
    error_estimate: float
    quadrature_error: float
    truncation_error: float
    panels: int
    config: ModeSumConfig

    def __complex__(self):
        return complex(self.value)


def regulated_closed_form(interval: SpacetimeInterval, eta: float) -> complex:
    """Exact value of the regulated radial integral taken to ``k_max = inf``.

    ``1/(4 pi^2 (r^2 + (eta + i tau)^2))``; reduces to ``-i D_F`` as ``eta -> 0``.
    """
    s = complex(eta, interval.tau)
    return 1.0 / (_FOUR_PI2 * (interval.r**2 + s * s))


def _composite_gauss(f, a, b, panels, nodes, weights):
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    k = mid[:, None] + half[:, None] * nodes[None, :]
    return np.sum(f(k) * (half[:, None] * weights[None, :]))


def mode_sum_propagator(interval: SpacetimeInterval, cfg: ModeSumConfig | None = None,
                        tol: float = 1e-10, order: int = 16,
                        max_panels: int = 2**18) -> ModeSumResult:
    """Vacuum correlation from an explicit sum over field modes.

    Evaluates ``(1/(4 pi^2 r)) int_0^kmax sin(k r) exp(-(eta + i tau) k) dk`` by
    composite Gauss-Legendre quadrature, doubling the panel count until two
    successive estimates agree to ``tol`` (relative).

    The reported ``error_estimate`` is absolute: quadrature disagreement plus
    the bound ``exp(-eta kmax)/eta`` on the discarded tail.
    """
    if not interval.r > 0:
        raise DomainError("mode sum needs r > 0")
    if cfg is None:
        cfg = ModeSumConfig.default_for(interval)
    r, tau, eta = interval.r, interval.tau, cfg.eta
    s = complex(eta, tau)

    def integrand(k):
        return np.sin(k * r) * np.exp(-s * k)

    nodes, weights = np.polynomial.legendre.leggauss(order)
    panels = cfg.panels
    prev = _composite_gauss(integrand, 0.0, cfg.k_max, panels, nodes, weights)
    while True:
        panels *= 2
        cur = _composite_gauss(integrand, 0.0, cfg.k_max, panels, nodes, weights)
        qerr = abs(cur - prev)
        if qerr <= tol * abs(cur):
            break
        if panels >= max_panels:
            raise ConvergenceFailure(
                f"mode sum did not reach tol={tol:g} with {panels} panels "
                f"(estimate {qerr / abs(cur):.3g})")
        prev = cur
    pref = 1.0 / (_FOUR_PI2 * r)
    tail = math.exp(-eta * cfg.k_max) / eta
    return ModeSumResult(value=complex(pref * cur),
                         error_estimate=pref * (qerr + tail),
                         quadrature_error=pref * qerr,
                         truncation_error=pref * tail,
                         panels=panels, config=cfg)


# --------------------------------------------------------------------------
# grid export


@dataclass(frozen=True)
class GridRow:
    x: float
    y: float
    re: float
    im: float
    magnitude: float
    regime: str


GRID_COLUMNS = ("x", "y", "re", "im", "magnitude", "regime")


def _axis(half_extent, resolution):
    # mirrored so that x and -x are bitwise negatives
    ax = np.linspace(-half_extent, half_extent, resolution)
    n = resolution // 2
    ax[resolution - n:] = -ax[:n][::-1]
    if resolution % 2:
        ax[n] = 0.0
    return ax


def propagator_grid(t: float, half_extent: float, resolution: int,
                    cone_guard: float = CONE_GUARD) -> list[GridRow]:
    """Sample ``D_F`` over the xy plane at time delay ``t``.

    Magnitudes above ``GRID_CLAMP`` times the far-field value at ``r = t`` are
    clamped (phase kept), and points on the cone never raise.
    """
    if resolution < 2:
        raise DomainError("resolution must be >= 2")
    if not t > 0:
        raise DomainError("t must be > 0")
    if not half_extent > 0:
        raise DomainError("half_extent must be > 0")
    cap = GRID_CLAMP / (_FOUR_PI2 * t * t)
    ax = _axis(float(half_extent), int(resolution))
    rows = []
    for x in ax:
        for y in ax:
            r = math.hypot(x, y)
            iv = SpacetimeInterval(r, t)
            regime = classify(iv, cone_guard)
            s = iv.invariant_interval()
            if s == 0.0:
                value = complex(0.0, cap)
            else:
                value = _closed_value(s, 0.0)
                mag = abs(value)
                if mag > cap:
                    value *= cap / mag
            rows.append(GridRow(float(x), float(y), value.real, value.imag,
                                abs(value), regime))
    return rows
