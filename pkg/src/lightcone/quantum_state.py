"""Joint atom-field states and two-qubit entanglement measures.

Basis ordering is fixed: atom 1 level (slowest), atom 2 level, then photon
occupation vectors in lexicographic order, with levels ordered ``G, E, F``.
The two-qubit basis used by :class:`TwoQubitDensity` is ``GG, GE, EG, EE``
(atom 1 label first).
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping

import numpy as np

from .errors import DomainError, InvalidLevels, ZeroState

LEVELS = ("G", "E", "F")
TWO_LEVEL = ("G", "E")
THREE_LEVEL = ("G", "E", "F")

PRODUCT_TOL = 1e-10
NORM_TOL = 1e-12
EMPTY_TOL = 1e-15

TWO_QUBIT_LABELS = ("GG", "GE", "EG", "EE")

# spin-flip Y (x) Y in the GG, GE, EG, EE basis; real and symmetric
_YY = np.array([[0, 0, 0, -1],
                [0, 0, 1, 0],
                [0, 1, 0, 0],
                [-1, 0, 0, 0]], dtype=float)


def occupation_vectors(n_modes: int, n_max: int) -> list[tuple[int, ...]]:
    """All occupation tuples over ``n_modes`` with total photon number <= ``n_max``."""
    if n_modes == 0:
        return [()]
    out = []
    for n in range(n_max + 1):
        for combo in itertools.combinations_with_replacement(range(n_modes), n):
            occ = [0] * n_modes
            for m in combo:
                occ[m] += 1
            out.append(tuple(occ))
    out.sort()
    return out


@dataclass(frozen=True)
class Basis:
    """Product basis of two atoms and a number-truncated set of field modes."""

    levels: tuple = TWO_LEVEL
    n_modes: int = 0
    n_max: int = 0

    def __post_init__(self):
        if tuple(self.levels) not in (TWO_LEVEL, THREE_LEVEL):
            raise DomainError(f"levels must be {TWO_LEVEL} or {THREE_LEVEL}")
        object.__setattr__(self, "levels", tuple(self.levels))
        if self.n_modes < 0 or self.n_max < 0:
            raise DomainError("n_modes and n_max must be >= 0")

    @cached_property
    def occupations(self) -> list[tuple[int, ...]]:
        return occupation_vectors(self.n_modes, self.n_max)

    @cached_property
    def _occ_index(self) -> dict:
        return {occ: i for i, occ in enumerate(self.occupations)}

    @property
    def n_levels(self) -> int:
        return len(self.levels)

    @property
    def photon_dim(self) -> int:
        return len(self.occupations)

    @property
    def dim(self) -> int:
        return self.n_levels**2 * self.photon_dim

    @property
    def vacuum(self) -> tuple[int, ...]:
        return (0,) * self.n_modes

    def occupation_index(self, occ) -> int:
        return self._occ_index[tuple(occ)]

    def index(self, atom1: str, atom2: str, occ=None) -> int:
        occ = self.vacuum if occ is None else tuple(occ)
        l1 = self.levels.index(atom1)
        l2 = self.levels.index(atom2)
        return (l1 * self.n_levels + l2) * self.photon_dim + self._occ_index[occ]

    def label(self, i: int):
        p = self.photon_dim
        lvl, k = divmod(i, p)
        l1, l2 = divmod(lvl, self.n_levels)
        return self.levels[l1], self.levels[l2], self.occupations[k]

    def labels(self):
        for l1 in self.levels:
            for l2 in self.levels:
                for occ in self.occupations:
                    yield l1, l2, occ

    @cached_property
    def photon_numbers(self) -> np.ndarray:
        return np.array([sum(o) for o in self.occupations], dtype=int)


class JointState:
    """Complex amplitudes over a :class:`Basis`.

    Instances are treated as values: the amplitude array is copied on
    construction and marked read-only.
    """

    __slots__ = ("basis", "amplitudes")

    def __init__(self, basis: Basis, amplitudes):
        amps = np.array(amplitudes, dtype=complex).reshape(-1)
        if amps.shape != (basis.dim,):
            raise DomainError(f"expected {basis.dim} amplitudes, got {amps.shape[0]}")
        amps.setflags(write=False)
        self.basis = basis
        self.amplitudes = amps

    @classmethod
    def from_labels(cls, basis: Basis, values: Mapping) -> "JointState":
        """Build from ``{(atom1, atom2, occ): amplitude}``; ``occ=None`` means vacuum."""
        amps = np.zeros(basis.dim, dtype=complex)
        for key, val in values.items():
            a1, a2, occ = key if len(key) == 3 else (*key, None)
            amps[basis.index(a1, a2, occ)] += val
        return cls(basis, amps)

    @classmethod
    def basis_state(cls, basis: Basis, atom1: str, atom2: str, occ=None) -> "JointState":
        return cls.from_labels(basis, {(atom1, atom2, occ): 1.0})

    def __repr__(self):
        nz = np.flatnonzero(np.abs(self.amplitudes) > 0)
        parts = [f"{self.amplitudes[i]:.4g}|{''.join(self.basis.label(i)[:2])},"
                 f"{self.basis.label(i)[2]}>" for i in nz[:6]]
        more = " + ..." if len(nz) > 6 else ""
        return f"JointState({' + '.join(parts) or '0'}{more})"

    def __eq__(self, other):
        return (isinstance(other, JointState) and other.basis == self.basis
                and np.array_equal(other.amplitudes, self.amplitudes))

    __hash__ = None

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    @property
    def normalized(self) -> bool:
        return abs(self.norm() ** 2 - 1.0) <= NORM_TOL

    def amplitude(self, atom1: str, atom2: str, occ=None) -> complex:
        return complex(self.amplitudes[self.basis.index(atom1, atom2, occ)])

    def tensor(self) -> np.ndarray:
        """Amplitudes shaped ``(levels, levels, photon_dim)``."""
        L = self.basis.n_levels
        return self.amplitudes.reshape(L, L, self.basis.photon_dim)

    def with_amplitudes(self, amps) -> "JointState":
        return JointState(self.basis, amps)

    def embed(self, basis: Basis) -> "JointState":
        """Copy the amplitudes into a larger basis (more levels, modes or photons)."""
        amps = np.zeros(basis.dim, dtype=complex)
        for i in np.flatnonzero(self.amplitudes):
            a1, a2, occ = self.basis.label(i)
            occ = tuple(occ) + (0,) * (basis.n_modes - len(occ))
            amps[basis.index(a1, a2, occ)] = self.amplitudes[i]
        return JointState(basis, amps)

    # -- fixture format -----------------------------------------------------

    def to_records(self, include_zeros: bool = False) -> list[dict]:
        recs = []
        for i, a in enumerate(self.amplitudes):
            if a == 0 and not include_zeros:
                continue
            a1, a2, occ = self.basis.label(i)
            recs.append({"atom1": a1, "atom2": a2, "occupations": list(occ),
                         "re": float(a.real), "im": float(a.imag)})
        return recs

    @classmethod
    def from_records(cls, records: Iterable[Mapping], basis: Basis | None = None
                     ) -> "JointState":
        records = list(records)
        if basis is None:
            levels = THREE_LEVEL if any(
                r["atom1"] == "F" or r["atom2"] == "F" for r in records) else TWO_LEVEL
            n_modes = max((len(r["occupations"]) for r in records), default=0)
            n_max = max((sum(r["occupations"]) for r in records), default=0)
            basis = Basis(levels, n_modes, n_max)
        values = {}
        for r in records:
            key = (r["atom1"], r["atom2"], tuple(r["occupations"]))
            if key in values:
                raise DomainError(f"duplicate basis label {key}")
            values[key] = complex(r["re"], r["im"])
        return cls.from_labels(basis, values)

    def dumps(self) -> str:
        b = self.basis
        return json.dumps({"levels": list(b.levels), "n_modes": b.n_modes,
                           "n_max": b.n_max, "amplitudes": self.to_records()})

    @classmethod
    def loads(cls, text: str) -> "JointState":
        data = json.loads(text)
        basis = Basis(tuple(data["levels"]), data["n_modes"], data["n_max"])
        return cls.from_records(data["amplitudes"], basis)


def normalize(state: JointState) -> JointState:
    n = state.norm()
    if n < 1e-300:
        raise ZeroState("cannot normalize the zero vector")
    return state.with_amplitudes(state.amplitudes / n)


# --------------------------------------------------------------------------
# projection and bipartite structure

_QUBIT_BASIS = Basis(TWO_LEVEL, 0, 0)


@dataclass(frozen=True)
class VacuumProjection:
    """Zero-photon, {G,E}-level part of a joint state (not renormalized)."""

    state: JointState
    residual_norm: float
    empty: bool

    @property
    def vector(self) -> np.ndarray:
        """Amplitudes on ``GG, GE, EG, EE``."""
        return self.state.amplitudes.copy()

    @property
    def weight(self) -> float:
        return self.state.norm() ** 2

    def renormalized(self) -> JointState:
        return normalize(self.state)


def qubit_state(gg=0.0, ge=0.0, eg=0.0, ee=0.0) -> JointState:
    """Two-qubit pure state with no field degrees of freedom."""
    return JointState(_QUBIT_BASIS, [gg, ge, eg, ee])


def project_vacuum(state: JointState) -> VacuumProjection:
    """Project onto the field vacuum and atom levels ``{G, E}``.

    ``residual_norm`` is the norm of everything discarded, so that
    ``weight + residual_norm**2`` equals the squared input norm.
    """
    b = state.basis
    t = state.tensor()
    vac = b.occupation_index(b.vacuum)
    kept = t[:2, :2, vac].reshape(4)
    total = state.norm() ** 2
    residual2 = max(total - float(np.vdot(kept, kept).real), 0.0)
    empty = bool(np.all(np.abs(kept) < EMPTY_TOL))
    return VacuumProjection(JointState(_QUBIT_BASIS, kept), math.sqrt(residual2), empty)


def _factor_keys(basis: Basis, side_a):
    side_a = set(side_a)
    factors = {"atom1", "atom2", *range(basis.n_modes)}
    unknown = side_a - factors
    if unknown:
        raise DomainError(f"unknown tensor factors {sorted(map(str, unknown))}")
    modes_a = [m for m in range(basis.n_modes) if m in side_a]
    modes_b = [m for m in range(basis.n_modes) if m not in side_a]
    rows, cols = {}, {}
    ri = np.empty(basis.dim, dtype=int)
    ci = np.empty(basis.dim, dtype=int)
    for i, (l1, l2, occ) in enumerate(basis.labels()):
        ka = (l1 if "atom1" in side_a else None, l2 if "atom2" in side_a else None,
              tuple(occ[m] for m in modes_a))
        kb = (l1 if "atom1" not in side_a else None, l2 if "atom2" not in side_a else None,
              tuple(occ[m] for m in modes_b))
        ri[i] = rows.setdefault(ka, len(rows))
        ci[i] = cols.setdefault(kb, len(cols))
    return ri, ci, len(rows), len(cols)


def schmidt_values(state: JointState, side_a: Iterable = ("atom1",)) -> np.ndarray:
    """Singular values across the cut ``side_a | rest``, non-increasing.

    ``side_a`` names tensor factors on one side: ``"atom1"``, ``"atom2"`` and
    integer mode indices. Everything not named is on the other side. The
    number-truncated photon space is a subspace of the full mode tensor
    product, so reshaping by sub-labels gives exact Schmidt values.
    """
    ri, ci, nr, nc = _factor_keys(state.basis, side_a)
    m = np.zeros((nr, nc), dtype=complex)
    m[ri, ci] = state.amplitudes
    return np.linalg.svd(m, compute_uv=False)


def schmidt_rank(values, tol: float = PRODUCT_TOL) -> int:
    return int(np.sum(np.asarray(values) > tol))


def is_product(state: JointState, side_a: Iterable = ("atom1",),
               tol: float = PRODUCT_TOL) -> bool:
    return schmidt_rank(schmidt_values(state, side_a), tol) == 1


# --------------------------------------------------------------------------
# two-qubit density matrices


@dataclass(frozen=True, eq=False)
class TwoQubitDensity:
    """4x4 density matrix over ``GG, GE, EG, EE``; validated on construction."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.shape != (4, 4):
            raise DomainError(f"expected a 4x4 matrix, got {m.shape}")
        if np.max(np.abs(m - m.conj().T)) > NORM_TOL:
            raise DomainError("density matrix is not Hermitian")
        m = 0.5 * (m + m.conj().T)
        if abs(np.trace(m).real - 1.0) > NORM_TOL:
            raise DomainError(f"trace {np.trace(m).real!r} != 1")
        if np.min(np.linalg.eigvalsh(m)) < -NORM_TOL:
            raise DomainError("density matrix is not positive semidefinite")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_pure(cls, vector) -> "TwoQubitDensity":
        v = np.asarray(vector, dtype=complex).reshape(4)
        v = v / np.linalg.norm(v)
        return cls(np.outer(v, v.conj()))

    def to_fixture(self) -> dict:
        return {"re": self.matrix.real.tolist(), "im": self.matrix.imag.tolist()}

    @classmethod
    def from_fixture(cls, data: Mapping) -> "TwoQubitDensity":
        return cls(np.asarray(data["re"], float) + 1j * np.asarray(data["im"], float))

    def rank(self, tol: float = 1e-10) -> int:
        return int(np.sum(np.linalg.eigvalsh(self.matrix) > tol))


def partial_trace_field(state: JointState) -> TwoQubitDensity:
    """Trace out the field, leaving the two-atom density matrix.

    The result is divided by its trace, so unnormalized inputs are accepted.
    """
    t = state.tensor()
    if state.basis.n_levels == 3:
        f_amp = np.concatenate([t[2].ravel(), t[:, 2].ravel()])
        if np.max(np.abs(f_amp)) > NORM_TOL:
            raise InvalidLevels("state has population in level F")
    a = t[:2, :2].reshape(4, -1)
    rho = a @ a.conj().T
    tr = np.trace(rho).real
    if tr < 1e-300:
        raise ZeroState("no weight in the {G,E} sector")
    return TwoQubitDensity(rho / tr)


def concurrence(rho) -> float:
    """Wootters concurrence.

    Accepts a :class:`TwoQubitDensity`, a 4x4 array, a length-4 pure-state
    vector (``GG, GE, EG, EE``) or a :class:`JointState` (field traced out).
    Pure states use ``|psi^T (Y x Y) psi|`` exactly; mixed states use
    singular values of ``sqrt(rho) sqrt(rho~)``.
    """
    if isinstance(rho, JointState):
        if rho.basis.n_modes == 0 and rho.basis.n_levels == 2:
            rho = rho.amplitudes
        else:
            rho = partial_trace_field(rho)
    if isinstance(rho, TwoQubitDensity):
        m = rho.matrix
    else:
        m = np.asarray(rho, dtype=complex)
        if m.shape == (4,) or m.shape == (4, 1):
            v = m.reshape(4) / np.linalg.norm(m)
            return float(min(1.0, abs(v @ _YY @ v)))
    w, u = np.linalg.eigh(m)
    w = np.where(w > 1e-13, w, 0.0)
    sq = (u * np.sqrt(w)) @ u.conj().T
    tilde = _YY @ m.conj() @ _YY
    wt, ut = np.linalg.eigh(0.5 * (tilde + tilde.conj().T))
    wt = np.where(wt > 1e-13, wt, 0.0)
    sqt = (ut * np.sqrt(wt)) @ ut.conj().T
    lam = np.linalg.svd(sq @ sqt, compute_uv=False)
    return float(min(1.0, max(0.0, lam[0] - lam[1] - lam[2] - lam[3])))


def eq1_state(a: complex, b: complex, gamma: complex | None = None,
              basis: Basis | None = None, photon_mode: int = 0,
              photon_levels=("G", "G")) -> JointState:
    """``a|E G,0> + b|G E,0> + gamma|phi_perp>``.

    ``phi_perp`` is one photon in ``photon_mode`` with the atoms in
    ``photon_levels`` (by default atom 1 emitted a photon that atom 2 did not
    absorb). If ``gamma`` is None it is chosen real and non-negative to
    normalize the state.
    """
    if basis is None:
        basis = Basis(TWO_LEVEL, max(1, photon_mode + 1), 1)
    if gamma is None:
        rest = 1.0 - abs(a) ** 2 - abs(b) ** 2
        if rest < -NORM_TOL:
            raise DomainError("|a|^2 + |b|^2 exceeds 1")
        gamma = math.sqrt(max(rest, 0.0))
    occ = [0] * basis.n_modes
    occ[photon_mode] = 1
    return JointState.from_labels(basis, {
        ("E", "G", None): a,
        ("G", "E", None): b,
        (*photon_levels, tuple(occ)): gamma,
    })
