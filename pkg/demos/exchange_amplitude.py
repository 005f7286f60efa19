"""
Photon exchange between two atoms that cannot signal each other
===============================================================

Atom 1 starts excited, atom 2 in its ground state, and both couple for a time
shorter than the light travel time between them. The amplitude for atom 2 to
end up excited is small but nonzero.
"""

import math

import numpy as np

from lightcone import amplitude as amp

alpha = 1 / 137.035999084
cfg = amp.AtomPairConfig(alpha, 0.1, 10.0, 1.0, math.pi)

# closed forms against direct quadrature of the far-zone double time integral
fwd = amp.amplitude_forward_closed(cfg).b
tot = amp.amplitude_total_closed(cfg).b
q = amp.amplitude_quadrature(cfg, amp.FAR_ZONE, 1e-10, process="total").b
print(f"forward-only  b = {fwd:.6e}")
print(f"total         b = {tot:.6e}  (quadrature {q:.6e})")

# the total vanishes whenever omega * delta_t is a multiple of 2 pi
for x in np.linspace(0.0, 4 * math.pi, 9):
    b = amp.amplitude_total_closed(cfg.replace(delta_t=x)).b
    print(f"omega*dt = {x:6.3f}   |b| = {abs(b):.4e}")

# Keeping the full kernel adds a correction of order (delta_t / r)^2.
scan = amp.farzone_correction_scan(cfg.replace(separation=1000.0),
                                   (1e-3, 3e-3, 1e-2, 3e-2, 1e-1))
for x, dev in zip(scan.ratios, scan.deviations):
    print(f"dt/r = {x:.0e}   relative deviation {dev:.3e}")
print(f"fitted exponent {scan.slope:.4f}")
