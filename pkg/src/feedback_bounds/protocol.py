"""Projective measurement on the ancilla followed by unitary feedback on the system."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .metrics import von_neumann_entropy
from .numerics import TOL, DomainError
from .tensor import (
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    DensityMatrix,
    eig_hermitian,
    PartitionedPureState,
    partial_trace,
)


def _frozen(m) -> np.ndarray:
    a = np.array(m, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class ProjectiveMeasurement:
    """Complete set of orthogonal projectors on A, indexed by outcome."""

    projectors: tuple[np.ndarray, ...]

    def __post_init__(self):
        ps = tuple(_frozen(p) for p in self.projectors)
        if not ps:
            raise DomainError("measurement needs at least one projector")
        d = ps[0].shape[0]
        eye = np.eye(d)
        for mu, p in enumerate(ps):
            if p.shape != (d, d):
                raise DomainError(f"projector {mu} has shape {p.shape}, expected {(d, d)}")
            if np.max(np.abs(p - p.conj().T)) > TOL.projector:
                raise DomainError(f"projector {mu} is not Hermitian:\n{p}")
            if np.max(np.abs(p @ p - p)) > TOL.projector:
                raise DomainError(f"projector {mu} is not idempotent:\n{p}")
            for nu in range(mu):
                if np.max(np.abs(p @ ps[nu])) > TOL.projector:
                    raise DomainError(f"projectors {nu} and {mu} are not orthogonal")
        if np.max(np.abs(sum(ps) - eye)) > TOL.projector:
            raise DomainError("projectors do not sum to the identity")
        object.__setattr__(self, "projectors", ps)

    @property
    def dim(self) -> int:
        return self.projectors[0].shape[0]

    def __len__(self) -> int:
        return len(self.projectors)

    @classmethod
    def from_basis(cls, unitary) -> "ProjectiveMeasurement":
        """Rank-1 projectors onto the columns of ``unitary``."""
        u = np.asarray(unitary, dtype=complex)
        return cls(tuple(np.outer(u[:, k], u[:, k].conj()) for k in range(u.shape[1])))

    @classmethod
    def bloch(cls, n) -> "ProjectiveMeasurement":
        """Qubit measurement P(mu) = (1 + (-1)^mu n.sigma) / 2."""
        n = np.asarray(n, dtype=float)
        if abs(np.linalg.norm(n) - 1.0) > 1e-10:
            raise DomainError(f"Bloch vector {n} is not a unit vector")
        ns = n[0] * SIGMA_X + n[1] * SIGMA_Y + n[2] * SIGMA_Z
        eye = np.eye(2, dtype=complex)
        return cls(((eye + ns) / 2, (eye - ns) / 2))

    @classmethod
    def trivial(cls, dim: int) -> "ProjectiveMeasurement":
        return cls((np.eye(dim, dtype=complex),))

    def refined_basis(self) -> np.ndarray:
        """Unitary whose columns span each projector's range in turn.

        Splitting a coarse projector into rank-1 pieces never raises the
        average post-measurement entropy, so searches can use this basis.
        """
        cols = []
        for p in self.projectors:
            spec = eig_hermitian(p)
            cols.extend(spec.eigenvectors[:, k] for k in np.flatnonzero(spec.eigenvalues > 0.5))
        return np.column_stack(cols)


@dataclass(frozen=True)
class FeedbackPolicy:
    """One unitary on S per measurement outcome."""

    unitaries: tuple[np.ndarray, ...]

    def __post_init__(self):
        us = tuple(_frozen(u) for u in self.unitaries)
        for mu, u in enumerate(us):
            if u.ndim != 2 or u.shape[0] != u.shape[1]:
                raise DomainError(f"feedback unitary {mu} is not square")
            if np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))) > TOL.unitary:
                raise DomainError(f"feedback operator {mu} is not unitary:\n{u}")
        object.__setattr__(self, "unitaries", us)

    @classmethod
    def identity(cls, dim: int, n_outcomes: int) -> "FeedbackPolicy":
        return cls(tuple(np.eye(dim, dtype=complex) for _ in range(n_outcomes)))

    @classmethod
    def constant(cls, unitary, n_outcomes: int) -> "FeedbackPolicy":
        return cls(tuple(np.asarray(unitary, dtype=complex) for _ in range(n_outcomes)))


@dataclass(frozen=True)
class Hamiltonian:
    matrix: np.ndarray

    def __post_init__(self):
        h = _frozen(self.matrix)
        if h.ndim != 2 or h.shape[0] != h.shape[1]:
            raise DomainError(f"Hamiltonian must be square, got shape {h.shape}")
        if np.max(np.abs(h - h.conj().T)) > TOL.hermiticity:
            raise DomainError("Hamiltonian is not Hermitian")
        if not np.any(np.abs(h) > 0):
            raise DomainError("Hamiltonian must be nonzero")
        object.__setattr__(self, "matrix", h)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def energy(self, rho) -> float:
        m = rho.entries if isinstance(rho, DensityMatrix) else rho
        return float(np.trace(m @ self.matrix).real)


@dataclass(frozen=True)
class Outcome:
    probability: float
    system_state: DensityMatrix | None  # None when the outcome has zero weight
    global_state: DensityMatrix | None

    @property
    def absent(self) -> bool:
        return self.system_state is None


@dataclass(frozen=True)
class OutcomeEnsemble:
    initial_system: DensityMatrix
    outcomes: tuple[Outcome, ...]

    @property
    def probabilities(self) -> np.ndarray:
        return np.array([o.probability for o in self.outcomes])

    def average_entropy(self) -> float:
        return sum(o.probability * von_neumann_entropy(o.system_state) for o in self.outcomes if not o.absent)


@dataclass(frozen=True)
class ProtocolResult:
    E_S_initial: float
    E_S_final: float
    E_ext: float
    I_QC: float
    delta_S: float
    S_initial: float
    S_final: float
    rho_S_final: DensityMatrix
    ensemble: OutcomeEnsemble

    @property
    def I_QC_clamped(self) -> float:
        return min(max(self.I_QC, 0.0), self.S_initial)


def _lift_to_ancilla(state: PartitionedPureState, projector: np.ndarray) -> np.ndarray:
    """Apply ``projector`` to the A factor, returning amplitudes in the original ordering."""
    lay = state.layout
    order = lay.indices("S") + lay.indices("A") + lay.indices("E")
    shuffled = tuple(lay.dims[i] for i in order)
    t = state.grouped()
    t = np.einsum("ab,sbe->sae", projector, t)
    inverse = np.argsort(order)
    return t.reshape(shuffled).transpose(inverse).reshape(-1)


def measure(state: PartitionedPureState, m: ProjectiveMeasurement) -> OutcomeEnsemble:
    lay = state.layout
    if m.dim != lay.dim("A"):
        raise DomainError(f"measurement acts on dimension {m.dim}, ancilla has {lay.dim('A')}")
    keep_s = lay.indices("S")
    rho_s = state.reduced("S")
    outcomes = []
    for p_mu in m.projectors:
        phi = _lift_to_ancilla(state, p_mu)
        prob = float(np.vdot(phi, phi).real)
        if prob <= TOL.null_outcome:
            outcomes.append(Outcome(max(prob, 0.0), None, None))
            continue
        glob = DensityMatrix.pure(phi / np.sqrt(prob), lay.dims)
        outcomes.append(Outcome(prob, partial_trace(glob, keep_s), glob))
    return OutcomeEnsemble(rho_s, tuple(outcomes))


def apply_feedback(ens: OutcomeEnsemble, policy: FeedbackPolicy) -> DensityMatrix:
    if len(policy.unitaries) < len(ens.outcomes):
        raise DomainError(f"policy has {len(policy.unitaries)} unitaries for {len(ens.outcomes)} outcomes")
    d = ens.initial_system.dim
    out = np.zeros((d, d), dtype=complex)
    for o, u in zip(ens.outcomes, policy.unitaries):
        if u.shape != (d, d):
            raise DomainError(f"feedback unitary has shape {u.shape}, system is {d}-dimensional")
        if o.absent:
            continue
        out += o.probability * (u @ o.system_state.entries @ u.conj().T)
    return DensityMatrix(out, ens.initial_system.dims)


def qc_mutual_information(state: PartitionedPureState, m: ProjectiveMeasurement) -> float:
    ens = measure(state, m)
    return von_neumann_entropy(ens.initial_system) - ens.average_entropy()


def run_protocol(
    state: PartitionedPureState,
    m: ProjectiveMeasurement,
    policy: FeedbackPolicy,
    h: Hamiltonian,
) -> ProtocolResult:
    ens = measure(state, m)
    if h.dim != ens.initial_system.dim:
        raise DomainError(f"Hamiltonian is {h.dim}-dimensional, system is {ens.initial_system.dim}")
    rho_f = apply_feedback(ens, policy)
    e_i = h.energy(ens.initial_system)
    e_f = h.energy(rho_f)
    s_i = von_neumann_entropy(ens.initial_system)
    s_f = von_neumann_entropy(rho_f)
    return ProtocolResult(
        E_S_initial=e_i,
        E_S_final=e_f,
        E_ext=e_i - e_f,
        I_QC=s_i - ens.average_entropy(),
        delta_S=s_f - s_i,
        S_initial=s_i,
        S_final=s_f,
        rho_S_final=rho_f,
        ensemble=ens,
    )
