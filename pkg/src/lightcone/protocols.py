"""Post-selection, entanglement concentration, mutual information and the
XOR time capsule.

All sampling goes through :func:`numpy.random.default_rng` seeded with a
caller-supplied 64-bit integer, so every Monte Carlo result is reproducible.
The photon detector array is an ideal no-photon projector.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import (DegenerateInput, DomainError, EmptyCounts, LengthMismatch,
                     OrderingError, PlanMismatch, ZeroState)
from .quantum_state import (THREE_LEVEL, Basis, JointState, concurrence, normalize,
                            project_vacuum, qubit_state)

PLAN_TOL = 1e-9

_GEF = Basis(THREE_LEVEL, 0, 0)


def _rng(seed):
    if seed is None or isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(int(seed))


@dataclass(frozen=True)
class Outcome:
    """One protocol stage: the kept branch (if drawn) and both probabilities."""

    kept: bool
    p_kept: float
    p_rejected: float
    state: JointState | None = None

    @property
    def probability(self) -> float:
        """Probability of the branch that was reported."""
        return self.p_kept if self.kept else self.p_rejected


# --------------------------------------------------------------------------
# post-selection on no photon


def postselect_no_photon(state: JointState, seed=None) -> Outcome:
    """Reject the pair if any photon is present after the interaction window.

    Without ``seed`` the kept branch is returned together with its probability
    (the vacuum-sector weight). With a seed or ``Generator`` the branch is
    sampled and the rejected branch carries no state.
    """
    if not state.normalized:
        raise DomainError("post-selection needs a normalized state")
    proj = project_vacuum(state)
    p_keep = min(1.0, proj.weight)
    p_reject = 1.0 - p_keep
    rng = _rng(seed)
    if rng is None:
        if p_keep < 1e-300:
            raise ZeroState("vacuum sector has zero weight")
        return Outcome(True, p_keep, p_reject, normalize(proj.state))
    if rng.random() < p_keep:
        return Outcome(True, p_keep, p_reject, normalize(proj.state))
    return Outcome(False, p_keep, p_reject, None)


# --------------------------------------------------------------------------
# entanglement concentration


@dataclass(frozen=True)
class ConcentrationPlan:
    """Laser pulse moving amplitude from ``|G>`` to ``|F>`` on one atom.

    ``theta`` is the transfer angle (``G -> cos(theta) G + sin(theta) F``),
    ``phase`` the extra phase put on the remaining ``G`` amplitude and
    ``success_prob`` the probability that the atom is not found in ``F``.
    ``atom`` is 2 for the standard protocol and 1 for the mirrored one.
    """

    theta: float
    phase: float
    success_prob: float
    atom: int = 2
    a: complex = field(default=0j, repr=False)
    b: complex = field(default=0j, repr=False)

    @property
    def gamma_prime(self) -> complex:
        """Amplitude left in the rejected ``F`` branch."""
        big = self.a if self.atom == 2 else self.b
        n = math.hypot(abs(self.a), abs(self.b))
        return big / n * math.sin(self.theta) if n else 0j


def _plan(big, small, atom, a, b):
    if small == 0:
        raise DegenerateInput("b = 0: nothing to concentrate")
    ratio = min(1.0, abs(small) / abs(big))
    theta = math.acos(ratio)
    phase = cmath.phase(small) - cmath.phase(big)
    norm2 = abs(a) ** 2 + abs(b) ** 2
    success = 2.0 * min(abs(a) ** 2, abs(b) ** 2) / norm2
    return ConcentrationPlan(theta, phase, success, atom, complex(a), complex(b))


def plan_concentration(a: complex, b: complex) -> ConcentrationPlan:
    """Pulse on atom 2 equalizing ``a|E G> + b|G E>`` when ``|a| >= |b| > 0``."""
    if b == 0:
        raise DegenerateInput("b = 0: nothing to concentrate")
    if abs(b) > abs(a):
        raise OrderingError("|b| > |a|; use plan_concentration_mirrored (pulse atom 1)")
    return _plan(a, b, 2, a, b)


def plan_concentration_mirrored(a: complex, b: complex) -> ConcentrationPlan:
    """Same as :func:`plan_concentration` with the pulse on atom 1, for ``|b| >= |a| > 0``."""
    if a == 0:
        raise DegenerateInput("a = 0: nothing to concentrate")
    if abs(a) > abs(b):
        raise OrderingError("|a| > |b|; use plan_concentration (pulse atom 2)")
    return _plan(b, a, 1, a, b)


def plan_for(a: complex, b: complex) -> ConcentrationPlan:
    """Pick the standard or mirrored plan from the amplitude ordering."""
    if abs(a) >= abs(b):
        return plan_concentration(a, b)
    return plan_concentration_mirrored(a, b)


def pulse_matrix(plan: ConcentrationPlan) -> np.ndarray:
    """Single-atom unitary on ``G, E, F`` realizing the plan."""
    c, s = math.cos(plan.theta), math.sin(plan.theta)
    ph = cmath.exp(1j * plan.phase)
    u = np.eye(3, dtype=complex)
    u[0, 0] = c * ph
    u[2, 0] = s
    u[0, 2] = -s * ph
    u[2, 2] = c
    return u


def apply_concentration(state: JointState, plan: ConcentrationPlan, seed=None) -> Outcome:
    """Apply the pulse, then reject the pair if the pulsed atom is in ``F``.

    ``state`` must be the post-selected two-atom state ``a|E G> + b|G E>``
    (no field modes) that the plan was made for.
    """
    if state.basis.n_modes != 0:
        raise DomainError("concentration acts on the post-selected two-atom state")
    psi = normalize(state).embed(_GEF).tensor()[:, :, 0]
    a, b = psi[1, 0], psi[0, 1]
    n = math.hypot(abs(plan.a), abs(plan.b))
    pa, pb = plan.a / n, plan.b / n
    other = np.abs(psi).sum() - abs(a) - abs(b)
    if other > PLAN_TOL or abs(a - pa) > PLAN_TOL or abs(b - pb) > PLAN_TOL:
        raise PlanMismatch("plan was made for a different state")
    u = pulse_matrix(plan)
    if plan.atom == 2:
        out = psi @ u.T
    else:
        out = u @ psi
    f_weight = float(np.sum(np.abs(out[2, :]) ** 2) if plan.atom == 1
                     else np.sum(np.abs(out[:, 2]) ** 2))
    p_keep = 1.0 - f_weight
    kept_vec = out[:2, :2].reshape(4)
    rng = _rng(seed)
    if rng is None or rng.random() < p_keep:
        if p_keep < 1e-300:
            raise ZeroState("concentration rejects every pair")
        kept = normalize(qubit_state(*kept_vec))
        return Outcome(True, p_keep, f_weight, kept)
    return Outcome(False, p_keep, f_weight, None)


# --------------------------------------------------------------------------
# mutual information


def entropy_bits(p) -> float:
    p = np.asarray(p, dtype=float).ravel()
    p = p[p > 0]
    return float(-np.sum(p * np.log2(p)))


def mutual_information(joint_counts) -> float:
    """Mutual information in bits from a 2x2 (or any 2-D) table of counts.

    Empirical probabilities are used; empty cells contribute nothing.
    """
    n = np.asarray(joint_counts, dtype=float)
    if n.ndim != 2:
        raise DomainError("joint_counts must be a 2-D table")
    if np.any(n < 0):
        raise DomainError("counts must be non-negative")
    total = n.sum()
    if total <= 0:
        raise EmptyCounts("joint counts sum to zero")
    p = n / total
    px = p.sum(axis=1, keepdims=True)
    py = p.sum(axis=0, keepdims=True)
    mask = p > 0
    mi = np.sum(p[mask] * np.log2(p[mask] / (px @ py)[mask]))
    return float(max(mi, 0.0))


def binary_entropy(q: float) -> float:
    return entropy_bits([q, 1.0 - q])


# --------------------------------------------------------------------------
# ensemble


@dataclass(frozen=True)
class PairSource:
    """Amplitudes of the state produced for every pair.

    ``a`` on ``|E G,0>``, ``b`` on ``|G E,0>`` and ``gamma`` on a one-photon
    component with both atoms in ``G`` (atom 1 emitted, nothing absorbed).
    """

    a: complex
    b: complex
    gamma: complex = 0j

    def __post_init__(self):
        n2 = abs(self.a) ** 2 + abs(self.b) ** 2 + abs(self.gamma) ** 2
        if abs(n2 - 1.0) > 1e-12:
            raise DomainError(f"pair source is not normalized (norm^2 = {n2})")

    @classmethod
    def from_amplitude(cls, b: complex, photon_weight: float = 0.0) -> "PairSource":
        """Fill in ``a`` from unitarity given ``b`` and the photon-branch weight."""
        rest = 1.0 - abs(b) ** 2 - photon_weight
        if rest < 0 or photon_weight < 0:
            raise DomainError("|b|^2 + photon_weight must lie in [0, 1]")
        return cls(complex(math.sqrt(rest)), complex(b), complex(math.sqrt(photon_weight)))

    def state(self) -> JointState:
        basis = Basis(("G", "E"), 1, 1)
        return JointState.from_labels(basis, {
            ("E", "G", (0,)): self.a, ("G", "E", (0,)): self.b,
            ("G", "G", (1,)): self.gamma})

    def predicted_keep_fraction(self) -> float:
        """Vacuum weight times the concentration success probability."""
        # (|a|^2 + |b|^2) * 2 min(|a|^2, |b|^2) / (|a|^2 + |b|^2)
        return 2.0 * min(abs(self.a) ** 2, abs(self.b) ** 2)


@dataclass(frozen=True)
class EnsembleStats:
    n_input: int
    n_photon_rejected: int
    n_f_rejected: int
    n_kept: int
    mean_concurrence: float
    mutual_info_bits: float
    seed: int
    joint_counts: tuple = ((0, 0), (0, 0))

    def __post_init__(self):
        if self.n_input != self.n_photon_rejected + self.n_f_rejected + self.n_kept:
            raise DomainError("ensemble counts do not add up")

    @property
    def kept_fraction(self) -> float:
        return self.n_kept / self.n_input

    def as_dict(self) -> dict:
        d = asdict(self)
        d["joint_counts"] = [list(r) for r in self.joint_counts]
        return d


def run_ensemble(source: PairSource, n: int, seed: int) -> EnsembleStats:
    """Post-select, concentrate and measure ``n`` independent pairs.

    Every pair is prepared in ``source.state()``. The branch probabilities of
    each stage are computed once with the deterministic protocol functions;
    a single seeded stream then draws, pair by pair in order, the
    post-selection outcome, the concentration outcome and the {G,E}
    measurement of both atoms. Kept-pair outcomes feed a 2x2 table
    (atom 1 excited, atom 2 excited) whose mutual information is reported.
    """
    if n <= 0:
        raise DomainError("n must be > 0")
    rng = np.random.default_rng(int(seed))
    psi = source.state()
    post = postselect_no_photon(psi) if abs(source.a) + abs(source.b) > 0 else None
    p1 = post.p_kept if post else 0.0
    if post is not None and source.a != 0 and source.b != 0:
        v = post.state.amplitudes
        plan = plan_for(v[2], v[1])
        conc = apply_concentration(post.state, plan)
        p2 = conc.p_kept
        final = conc.state.amplitudes
    elif post is not None:
        # product state: nothing to concentrate, keep as is
        p2 = 1.0
        final = post.state.amplitudes
    else:
        p2, final = 0.0, np.zeros(4, complex)
    c_final = concurrence(final) if post is not None else float("nan")
    # measurement distribution over GG, GE, EG, EE
    pm = np.abs(final) ** 2
    pm = pm / pm.sum() if pm.sum() > 0 else pm

    u = rng.random((n, 3))
    photon_rej = u[:, 0] >= p1
    f_rej = ~photon_rej & (u[:, 1] >= p2)
    kept = ~photon_rej & ~f_rej
    n_kept = int(kept.sum())
    counts = np.zeros((2, 2), dtype=int)
    if n_kept:
        idx = np.searchsorted(np.cumsum(pm), u[kept, 2], side="right")
        idx = np.minimum(idx, 3)
        # index bits: atom1 excited = idx // 2, atom2 excited = idx % 2
        np.add.at(counts, (idx // 2, idx % 2), 1)
        mi = mutual_information(counts)
        mean_c = c_final
    else:
        mi = float("nan")
        mean_c = float("nan")
    return EnsembleStats(n_input=n, n_photon_rejected=int(photon_rej.sum()),
                         n_f_rejected=int(f_rej.sum()), n_kept=n_kept,
                         mean_concurrence=mean_c, mutual_info_bits=mi, seed=int(seed),
                         joint_counts=tuple(tuple(int(x) for x in r) for r in counts))


# --------------------------------------------------------------------------
# time capsule


def _bits(x) -> np.ndarray:
    if isinstance(x, str):
        if set(x) - {"0", "1"}:
            raise DomainError("bit strings may only contain '0' and '1'")
        return np.array([c == "1" for c in x], dtype=bool)
    return np.asarray(x, dtype=bool).ravel()


def bits_to_str(bits) -> str:
    return "".join("1" if b else "0" for b in _bits(bits))


@dataclass(frozen=True, eq=False)
class CapsuleRecord:
    ciphertext: np.ndarray
    pair_count: int

    def __post_init__(self):
        if len(self.ciphertext) != self.pair_count:
            raise LengthMismatch("ciphertext length != pair count")

    def __str__(self):
        return bits_to_str(self.ciphertext)


def capsule_encode(message, local_outcomes) -> CapsuleRecord:
    """XOR the message into the local halves of the entangled pairs."""
    m, k = _bits(message), _bits(local_outcomes)
    if m.shape != k.shape:
        raise LengthMismatch(f"message has {m.size} bits, outcomes {k.size}")
    return CapsuleRecord(m ^ k, int(m.size))


def capsule_decode(record: CapsuleRecord, remote_outcomes) -> np.ndarray:
    """Second XOR with the remote halves; recovers the message for correlated pairs."""
    k = _bits(remote_outcomes)
    if k.size != record.pair_count:
        raise LengthMismatch(f"record has {record.pair_count} bits, outcomes {k.size}")
    return record.ciphertext ^ k


def bell_pair_outcomes(n: int, seed, correlation: str = "correlated"):
    """Measurement records of ``n`` pairs at the two memories.

    ``correlated`` reproduces the perfectly correlated {G,E} statistics of the
    concentrated pairs; ``independent`` and ``anticorrelated`` are controls.
    """
    rng = _rng(seed)
    local = rng.integers(0, 2, size=n).astype(bool)
    if correlation == "correlated":
        remote = local.copy()
    elif correlation == "anticorrelated":
        remote = ~local
    elif correlation == "independent":
        remote = rng.integers(0, 2, size=n).astype(bool)
    else:
        raise DomainError(f"unknown correlation {correlation!r}")
    return local, remote
