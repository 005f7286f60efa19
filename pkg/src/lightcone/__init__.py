"""Photon exchange between space-like separated atoms.

Submodules
----------
propagator
    Closed-form, far-zone and mode-sum evaluations of the massless propagator.
amplitude
    Second-order exchange amplitude by closed form and double-time quadrature.
quantum_state
    Joint atom-field states, vacuum projection, Schmidt values, concurrence.
protocols
    Post-selection, entanglement concentration, mutual information, time capsule.
dynamics
    Exact evolution of two atoms on a truncated ring of field modes.
multipole
    Taylor expansion of the kernel about the atom centres.
cli
    Scenario runner behind the ``lightcone`` command.
"""
from . import amplitude, dynamics, multipole, propagator, protocols, quantum_state
from .errors import LightconeError, NumericalError

__version__ = "0.1.0"

__all__ = ["amplitude", "dynamics", "multipole", "propagator", "protocols",
           "quantum_state", "LightconeError", "NumericalError", "__version__"]
