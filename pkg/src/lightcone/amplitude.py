"""Second-order amplitude for one atom to de-excite while the other is excited.

Closed forms (far zone, natural units)::

    forward  b = -(alpha/4pi^2) (d/r)^2 (i w dt + 1 - exp(i w dt))
    total    b = -(alpha/2pi^2) (d/r)^2 (1 - cos(w dt))

and an independent route that integrates the time-ordered double integral
over the triangle ``0 <= t'' <= t' <= dt`` numerically::

    b = -(1/i) alpha (d w)^2  int dt' int dt''  exp(+i w (t'-t'')) D_F(r, t'-t'')

The phase ``exp(+i w (t'-t''))`` is the one carried by atom 1 lowering at
``t''`` and atom 2 raising at ``t'``; with it the far-zone quadrature
reproduces the forward closed form exactly. The reverse process (atom 2
emits, atom 1 absorbs) carries the conjugate phase, and the total amplitude
is the sum of both.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceFailure, DomainError
from .propagator import feynman_propagator_far

CLOSED_EQ11 = "closed_eq11"
CLOSED_EQ12 = "closed_eq12"
QUADRATURE_FAR = "quadrature_far"
QUADRATURE_FULL = "quadrature_full"

FAR_ZONE = "far_zone"
FULL_EQ10 = "full_eq10"

PROCESSES = ("forward", "reverse", "total")

SWEEP_COLUMNS = ("omega_dt", "ratio", "b_re", "b_im", "b_abs", "method",
                 "error_estimate")

_GAUSS_ORDERS = (8, 16, 32, 64)


@dataclass(frozen=True)
class AtomPairConfig:
    """Two identical two-level atoms.

    ``dipole`` and ``delta_t`` may be zero (the amplitude then vanishes);
    everything else must be strictly positive.
    """

    alpha: float
    dipole: float
    separation: float
    omega_a: float
    delta_t: float

    def __post_init__(self):
        for name in ("alpha", "separation", "omega_a"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise DomainError(f"{name} must be > 0, got {v}")
        for name in ("dipole", "delta_t"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise DomainError(f"{name} must be >= 0, got {v}")

    @property
    def omega_dt(self) -> float:
        return self.omega_a * self.delta_t

    def far_zone_ratio(self) -> float:
        """``c dt / r``; the far-zone closed forms need this to be << 1."""
        return self.delta_t / self.separation

    def amplitude_unit(self) -> float:
        """Natural scale ``alpha d^2 / (4 pi^2 r^2)`` of every amplitude."""
        return self.alpha * self.dipole**2 / (4 * math.pi**2 * self.separation**2)

    def replace(self, **changes) -> "AtomPairConfig":
        fields = dict(alpha=self.alpha, dipole=self.dipole, separation=self.separation,
                      omega_a=self.omega_a, delta_t=self.delta_t)
        fields.update(changes)
        return AtomPairConfig(**fields)


@dataclass(frozen=True)
class AmplitudeResult:
    b: complex
    method: str
    error_estimate: float = 0.0
    process: str = "forward"

    def __complex__(self):
        return complex(self.b)

    def __abs__(self):
        return abs(self.b)


def amplitude_forward_closed(cfg: AtomPairConfig) -> AmplitudeResult:
    """Atom 1 emits, atom 2 absorbs; far-zone closed form."""
    x = cfg.omega_dt
    b = -cfg.amplitude_unit() * (1j * x + 1 - np.exp(1j * x))
    return AmplitudeResult(complex(b), CLOSED_EQ11)


def amplitude_reverse_closed(cfg: AtomPairConfig) -> AmplitudeResult:
    """Atom 2 emits while being excited, atom 1 absorbs while decaying."""
    x = cfg.omega_dt
    b = -cfg.amplitude_unit() * (-1j * x + 1 - np.exp(-1j * x))
    return AmplitudeResult(complex(b), CLOSED_EQ11, process="reverse")


def amplitude_total_closed(cfg: AtomPairConfig, check: bool = True) -> AmplitudeResult:
    """Sum of both exchange processes; real and non-positive.

    With ``check`` the result is compared against forward + reverse and an
    ``AssertionError`` is raised on disagreement beyond round-off.
    """
    b = -2 * cfg.amplitude_unit() * (1 - math.cos(cfg.omega_dt))
    if check:
        parts = amplitude_forward_closed(cfg).b + amplitude_reverse_closed(cfg).b
        tol = 1e-12 * cfg.amplitude_unit() * max(1.0, cfg.omega_dt)
        if abs(parts - b) > tol:
            raise AssertionError(f"forward+reverse {parts} != total {b}")
    return AmplitudeResult(complex(b, 0.0), CLOSED_EQ12, process="total")


# --------------------------------------------------------------------------
# double-time quadrature


def _panel_edges(delta_t, omega):
    # split at half periods of exp(-i w tau)
    n = max(1, math.ceil(omega * delta_t / math.pi))
    return np.linspace(0.0, delta_t, n + 1)


def _triangle_nodes(edges, order):
    """Nodes and weights covering ``0 <= t2 <= t1 <= T``.

    Off-diagonal panel pairs use tensor Gauss rules; diagonal pairs use the
    collapsed map ``t2 = a + (t1 - a) s``.
    """
    x, w = np.polynomial.legendre.leggauss(order)
    x = 0.5 * (x + 1.0)
    w = 0.5 * w
    lo, hi = edges[:-1], edges[1:]
    h = hi - lo
    pts = lo[:, None] + h[:, None] * x[None, :]        # (P, n)
    wts = h[:, None] * w[None, :]
    P = len(lo)
    t1s, t2s, ws = [], [], []
    i, j = np.tril_indices(P, k=-1)
    if len(i):
        t1s.append(np.broadcast_to(pts[i][:, :, None], (len(i), order, order)).ravel())
        t2s.append(np.broadcast_to(pts[j][:, None, :], (len(i), order, order)).ravel())
        ws.append((wts[i][:, :, None] * wts[j][:, None, :]).ravel())
    # diagonal triangles
    t1 = pts[:, :, None]
    t2 = lo[:, None, None] + (t1 - lo[:, None, None]) * x[None, None, :]
    wd = wts[:, :, None] * (t1 - lo[:, None, None]) * w[None, None, :]
    t1s.append(np.broadcast_to(t1, t2.shape).ravel())
    t2s.append(t2.ravel())
    ws.append(wd.ravel())
    return np.concatenate(t1s), np.concatenate(t2s), np.concatenate(ws)


def double_time_integral(f, delta_t, omega, tol=1e-10):
    """Integrate ``f(t1, t2)`` over ``0 <= t2 <= t1 <= delta_t``.

    The Gauss order is raised until successive results agree to ``tol``
    relative to ``int |f|``, which stays meaningful when the signed integral
    cancels (e.g. the total process at ``w dt = 2 pi``). Returns
    ``(value, error_estimate)`` with the estimate in the same relative units.
    """
    if delta_t == 0:
        return 0j, 0.0
    edges = _panel_edges(delta_t, omega)
    prev = None
    err = float("inf")
    for order in _GAUSS_ORDERS:
        t1, t2, w = _triangle_nodes(edges, order)
        vals = f(t1, t2)
        cur = complex(np.sum(w * vals))
        scale = float(np.sum(w * np.abs(vals)))
        if scale == 0.0:
            return 0j, 0.0
        if prev is not None:
            err = abs(cur - prev) / scale
            if err <= tol:
                return cur, err
        prev = cur
    raise ConvergenceFailure(
        f"double-time quadrature did not reach tol={tol:g} (last estimate {err:.3g})")


def _phase(process, omega, tau):
    if process == "forward":
        return np.exp(1j * omega * tau)
    if process == "reverse":
        return np.exp(-1j * omega * tau)
    if process == "total":
        return 2.0 * np.cos(omega * tau)
    raise DomainError(f"unknown process {process!r}")


def _kernel(cfg, propagator_choice):
    r = cfg.separation
    if propagator_choice == FAR_ZONE:
        d_far = feynman_propagator_far(r)
        return lambda tau: np.full(np.shape(tau), d_far, dtype=complex)
    if propagator_choice == FULL_EQ10:
        if not r > cfg.delta_t:
            raise DomainError("full propagator quadrature requires r > c dt "
                              "(the window would reach the light cone)")
        return lambda tau: -1.0 / (4j * math.pi**2 * ((r - tau) * (r + tau)))
    raise DomainError(f"unknown propagator choice {propagator_choice!r}")


def _amplitude_prefactor(cfg):
    # -(1/i) alpha (d w)^2
    return 1j * cfg.alpha * (cfg.dipole * cfg.omega_a) ** 2


def amplitude_quadrature(cfg: AtomPairConfig, propagator_choice: str = FAR_ZONE,
                         tol: float = 1e-10, process: str = "forward") -> AmplitudeResult:
    """Numerically integrate the time-ordered second-order amplitude.

    Parameters
    ----------
    cfg : AtomPairConfig
    propagator_choice : {"far_zone", "full_eq10"}
        Use the constant far-zone propagator or the full ``1/(r^2 - tau^2)`` form.
    tol : float
        Accuracy target for the double integral, relative to the integral of
        the absolute integrand.
    process : {"forward", "reverse", "total"}
        Which exchange process to include.
    """
    if not tol > 0:
        raise DomainError("tol must be > 0")
    kernel = _kernel(cfg, propagator_choice)
    w = cfg.omega_a

    def integrand(t1, t2):
        tau = t1 - t2
        return _phase(process, w, tau) * kernel(tau)

    val, err = double_time_integral(integrand, cfg.delta_t, w, tol)
    method = QUADRATURE_FAR if propagator_choice == FAR_ZONE else QUADRATURE_FULL
    return AmplitudeResult(complex(_amplitude_prefactor(cfg) * val), method, err, process)


# --------------------------------------------------------------------------
# far-zone correction law


@dataclass(frozen=True)
class FarzoneScan:
    ratios: tuple
    deviations: tuple
    slope: float
    intercept: float
    r_squared: float

    def rows(self):
        return list(zip(self.ratios, self.deviations))


def loglog_fit(x, y):
    """Least-squares line through ``(log x, log y)``: ``(slope, intercept, r^2)``."""
    lx, ly = np.log(np.asarray(x, float)), np.log(np.asarray(y, float))
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_tot = np.sum((ly - ly.mean()) ** 2)
    r2 = 1.0 - np.sum(resid**2) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), float(r2)


def farzone_deviation(cfg: AtomPairConfig, tol: float = 1e-12,
                      process: str = "forward") -> float:
    """``|b_full - b_far| / |b_far|`` at the separation stored in ``cfg``.

    The difference is integrated directly with the kernel
    ``D_full - D_far = (i/4pi^2) tau^2 / (r^2 (r^2 - tau^2))`` so that small
    deviations are not lost to cancellation.
    """
    r = cfg.separation
    if not r > cfg.delta_t:
        raise DomainError("far-zone deviation requires r > c dt")
    w = cfg.omega_a

    def far(t1, t2):
        return _phase(process, w, t1 - t2) * (1j / (4 * math.pi**2 * r * r))

    def diff(t1, t2):
        tau = t1 - t2
        return _phase(process, w, tau) * (1j / (4 * math.pi**2)) * tau**2 / (
            r * r * ((r - tau) * (r + tau)))

    b_far, _ = double_time_integral(far, cfg.delta_t, w, tol)
    delta, _ = double_time_integral(diff, cfg.delta_t, w, tol)
    return abs(delta) / abs(b_far)


def farzone_correction_scan(cfg: AtomPairConfig, ratios, tol: float = 1e-12,
                            process: str = "forward") -> FarzoneScan:
    """Relative size of the full-propagator correction versus ``c dt / r``.

    For each ratio the separation is reset to ``delta_t / ratio``. A log-log
    fit of deviation against ratio is attached; the far-zone approximation
    drops terms of relative order ``(dt/r)^2``, so the slope should be 2.
    """
    ratios = tuple(float(x) for x in ratios)
    for x in ratios:
        if not 0 < x < 0.5:
            raise DomainError(f"ratio {x} outside (0, 0.5)")
    if cfg.delta_t <= 0:
        raise DomainError("scan needs delta_t > 0")
    devs = tuple(farzone_deviation(cfg.replace(separation=cfg.delta_t / x), tol, process)
                 for x in ratios)
    if len(ratios) >= 2:
        slope, intercept, r2 = loglog_fit(ratios, devs)
    else:
        slope = intercept = r2 = float("nan")
    return FarzoneScan(ratios, devs, slope, intercept, r2)


def amplitude_sweep(cfg: AtomPairConfig, omega_dts, tol: float = 1e-10):
    """Closed forms against far-zone quadrature for a list of ``w dt`` values.

    Returns rows following :data:`SWEEP_COLUMNS`. The quadrature of the total
    process is tagged ``quadrature_far_total``.
    """
    rows = []
    for x in omega_dts:
        c = cfg.replace(delta_t=float(x) / cfg.omega_a)
        ratio = c.far_zone_ratio()
        results = [
            amplitude_forward_closed(c),
            amplitude_quadrature(c, FAR_ZONE, tol, "forward"),
            amplitude_total_closed(c),
            amplitude_quadrature(c, FAR_ZONE, tol, "total"),
        ]
        for res in results:
            method = res.method
            if method == QUADRATURE_FAR and res.process == "total":
                method = "quadrature_far_total"
            rows.append((float(x), ratio, res.b.real, res.b.imag, abs(res.b), method,
                         res.error_estimate))
    return rows
