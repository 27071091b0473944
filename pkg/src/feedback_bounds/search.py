"""Searches over ancilla measurement bases and system feedback unitaries.

Rank-1 bases are enough for both searches: merging outcomes of a rank-1
measurement can only raise the average post-measurement entropy (entropy is
concave) and can only lower the feedback-optimised extraction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import logm
from scipy.optimize import minimize
from scipy.spatial.transform import Rotation
from scipy.stats import qmc

from .metrics import von_neumann_entropy
from .numerics import TOL, DomainError
from .protocol import FeedbackPolicy, Hamiltonian, ProjectiveMeasurement, measure
from .tensor import DensityMatrix, PartitionedPureState, eig_hermitian, fast_eigvalsh


@dataclass(frozen=True)
class SearchConfig:
    grid_size: int = 64
    multistarts: int = 16
    tol: float = 1e-10
    max_iter: int = 2000
    seed: int = 0
    simplex_step: float = 0.3

    def __post_init__(self):
        if self.grid_size < 1 or self.multistarts < 1 or self.max_iter < 1:
            raise DomainError("grid_size, multistarts and max_iter must all be >= 1")
        if not self.tol > 0:
            raise DomainError("tol must be positive")


@dataclass(frozen=True)
class OptimizationOutcome:
    value: float
    params: np.ndarray
    basis: np.ndarray
    measurement: ProjectiveMeasurement
    evaluations: int
    converged: bool
    start_index: int
    # True when the winning start was a caller-supplied measurement
    from_injected: bool = field(default=False)


# -- parameterizations -------------------------------------------------------


def bloch_basis(theta: float, phi: float) -> np.ndarray:
    """Columns are the +1 and -1 eigenvectors of n.sigma."""
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    e = complex(math.cos(phi), math.sin(phi))
    return np.array([[c, -s * e.conjugate()], [s * e, c]], dtype=complex)


def bloch_angles(basis: np.ndarray) -> np.ndarray:
    v = basis[:, 0]
    p = np.outer(v, v.conj())
    nx, ny, nz = 2 * p[1, 0].real, 2 * p[1, 0].imag, (p[0, 0] - p[1, 1]).real
    return np.array([math.acos(max(-1.0, min(1.0, nz))), math.atan2(ny, nx)])


def bloch_vector(m: ProjectiveMeasurement) -> np.ndarray:
    """Bloch vector n of a two-outcome qubit measurement, P(0) = (1 + n.sigma)/2."""
    p = m.projectors[0]
    return np.array([2 * p[1, 0].real, 2 * p[1, 0].imag, (p[0, 0] - p[1, 1]).real])


def generator_basis(d: int) -> list[np.ndarray]:
    """d^2 Hermitian generators: symmetric, antisymmetric and diagonal units."""
    gens = []
    for j in range(d):
        for k in range(j + 1, d):
            g = np.zeros((d, d), dtype=complex)
            g[j, k] = g[k, j] = 1.0
            gens.append(g)
            g = np.zeros((d, d), dtype=complex)
            g[j, k], g[k, j] = -1j, 1j
            gens.append(g)
    for j in range(d):
        g = np.zeros((d, d), dtype=complex)
        g[j, j] = 1.0
        gens.append(g)
    return gens


def unitary_from_params(x: np.ndarray, d: int) -> np.ndarray:
    """exp(i sum_k x_k G_k) via the Hermitian eigensolver."""
    h = np.zeros((d, d), dtype=complex)
    n = 0
    for j in range(d):
        for k in range(j + 1, d):
            h[j, k] += x[n] - 1j * x[n + 1]
            h[k, j] += x[n] + 1j * x[n + 1]
            n += 2
    h[np.diag_indices(d)] += x[n : n + d]
    spec = eig_hermitian(h)
    v = spec.eigenvectors
    return (v * np.exp(1j * spec.eigenvalues)) @ v.conj().T


def params_from_unitary(u: np.ndarray) -> np.ndarray:
    d = u.shape[0]
    h = -1j * logm(u)
    h = 0.5 * (h + h.conj().T)
    x = []
    for j in range(d):
        for k in range(j + 1, d):
            x.extend([h[k, j].real, h[k, j].imag])
    x.extend(h[np.diag_indices(d)].real)
    return np.array(x)


class _Basis:
    """Maps a real parameter vector to a measurement basis on the ancilla."""

    def __init__(self, d: int):
        self.d = d
        self.n_params = 2 if d == 2 else d * d

    def __call__(self, x: np.ndarray) -> np.ndarray:
        if self.d == 2:
            return bloch_basis(x[0], x[1])
        return unitary_from_params(x, self.d)

    def params_of(self, basis: np.ndarray) -> np.ndarray:
        return bloch_angles(basis) if self.d == 2 else params_from_unitary(basis)

    def grid(self, cfg: SearchConfig) -> np.ndarray:
        if self.d == 2:
            # Fibonacci sphere, rotated by a seed-dependent rotation
            i = np.arange(cfg.grid_size) + 0.5
            z = 1 - 2 * i / cfg.grid_size
            r = np.sqrt(1 - z * z)
            ang = math.pi * (3 - math.sqrt(5)) * i
            pts = np.column_stack([r * np.cos(ang), r * np.sin(ang), z])
            pts = Rotation.random(random_state=cfg.seed).apply(pts)
            return np.column_stack([np.arccos(np.clip(pts[:, 2], -1, 1)), np.arctan2(pts[:, 1], pts[:, 0])])
        sob = qmc.Sobol(d=self.n_params, scramble=True, seed=cfg.seed)
        return (2 * sob.random(cfg.grid_size) - 1) * math.pi


# -- objectives ---------------------------------------------------------------


def conditional_blocks(psi: np.ndarray, basis: np.ndarray):
    """Outcome probabilities and unnormalized conditional system states.

    ``psi`` is the (S, A, E)-grouped amplitude array; column k of ``basis``
    is the ancilla vector of outcome k.
    """
    blocks = np.einsum("ak,sae->kse", basis.conj(), psi)
    probs = np.einsum("kse,kse->k", blocks, blocks.conj()).real
    rhos = blocks @ blocks.conj().transpose(0, 2, 1)
    return probs, rhos


def _average_entropy(psi: np.ndarray, basis: np.ndarray) -> float:
    probs, rhos = conditional_blocks(psi, basis)
    total = 0.0
    for p, r in zip(probs, rhos):
        if p <= TOL.null_outcome:
            continue
        # p S(r/p) = -sum mu ln mu + p ln p, mu the eigenvalues of r
        for mu in fast_eigvalsh(r):
            if mu > TOL.rank_cutoff * p:
                total -= mu * math.log(mu)
        total += p * math.log(p)
    return total


def _min_feedback_energy(psi: np.ndarray, basis: np.ndarray, levels: np.ndarray) -> float:
    """sum_mu p_mu * (passive energy of rho_S^m(mu))."""
    probs, rhos = conditional_blocks(psi, basis)
    total = 0.0
    for p, r in zip(probs, rhos):
        if p <= TOL.null_outcome:
            continue
        total += float(np.dot(fast_eigvalsh(r)[::-1], levels))
    return total


def _multistart(
    fun: Callable[[np.ndarray], float],
    space: _Basis,
    cfg: SearchConfig,
    injected: Sequence[np.ndarray] = (),
) -> tuple[float, np.ndarray, int, bool, int, bool]:
    count = 0

    def f(x):
        nonlocal count
        count += 1
        return fun(x)

    grid = space.grid(cfg)
    scores = np.array([f(x) for x in grid])
    picks = np.argsort(scores, kind="stable")[: cfg.multistarts]
    starts = [space.params_of(b) for b in injected] + [grid[i] for i in picks]
    n_inj = len(injected)

    k = space.n_params
    opts = {"xatol": 1e-9, "fatol": cfg.tol, "maxiter": cfg.max_iter, "adaptive": k > 2}
    best = (math.inf, None, -1, False)
    for idx, x0 in enumerate(starts):
        simplex = np.vstack([x0, x0 + cfg.simplex_step * np.eye(k)])
        res = minimize(f, x0, method="Nelder-Mead", options={**opts, "initial_simplex": simplex})
        x, val = res.x, float(res.fun)
        if idx < n_inj:
            v0 = f(x0)
            if v0 <= val:
                x, val = np.asarray(x0, dtype=float), v0
        if val < best[0]:
            best = (val, x, idx, bool(res.success))
    val, x, idx, ok = best
    return val, np.asarray(x, dtype=float), count, ok, idx, idx < n_inj


def _ancilla_dim(state: PartitionedPureState) -> int:
    d = state.layout.dim("A")
    if d < 2:
        raise DomainError("ancilla dimension must be at least 2")
    return d


def _injected_bases(include: Sequence[ProjectiveMeasurement], d: int) -> list[np.ndarray]:
    out = []
    for m in include:
        if m.dim != d:
            raise DomainError(f"injected measurement acts on dimension {m.dim}, ancilla has {d}")
        out.append(m.refined_basis())
    return out


# -- public operations --------------------------------------------------------


def optimal_feedback(rho, h: Hamiltonian) -> tuple[np.ndarray, float]:
    """Unitary taking ``rho`` to its passive state, and that passive energy.

    The k-th largest eigenvector of rho is sent to the k-th lowest energy
    eigenvector of h.
    """
    m = rho.entries if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    hm = h.matrix if isinstance(h, Hamiltonian) else np.asarray(h, dtype=complex)
    if m.shape != hm.shape:
        raise DomainError(f"state shape {m.shape} does not match Hamiltonian {hm.shape}")
    sr = eig_hermitian(m)
    sh = eig_hermitian(hm)
    pops = sr.eigenvalues[::-1]
    u = sh.eigenvectors @ sr.eigenvectors[:, ::-1].conj().T
    return u, float(np.dot(pops, sh.eigenvalues))


def optimal_policy(state: PartitionedPureState, m: ProjectiveMeasurement, h: Hamiltonian) -> FeedbackPolicy:
    ens = measure(state, m)
    d = h.dim
    us = []
    for o in ens.outcomes:
        us.append(np.eye(d, dtype=complex) if o.absent else optimal_feedback(o.system_state, h)[0])
    return FeedbackPolicy(tuple(us))


def daemonic_ergotropy(state: PartitionedPureState, m: ProjectiveMeasurement, h: Hamiltonian) -> float:
    ens = measure(state, m)
    e_i = h.energy(ens.initial_system)
    e_f = sum(o.probability * optimal_feedback(o.system_state, h)[1] for o in ens.outcomes if not o.absent)
    return e_i - e_f


def maximize_extraction(
    state: PartitionedPureState,
    h: Hamiltonian,
    cfg: SearchConfig = SearchConfig(),
    include: Sequence[ProjectiveMeasurement] = (),
) -> OptimizationOutcome:
    """Largest daemonic ergotropy over rank-1 projective measurements on A."""
    d = _ancilla_dim(state)
    space = _Basis(d)
    psi = state.grouped()
    if h.dim != psi.shape[0]:
        raise DomainError(f"Hamiltonian is {h.dim}-dimensional, system is {psi.shape[0]}")
    levels = eig_hermitian(h.matrix).eigenvalues
    e_i = h.energy(state.reduced("S"))

    def neg(x):
        return _min_feedback_energy(psi, space(x), levels) - e_i

    val, x, n, ok, idx, inj = _multistart(neg, space, cfg, _injected_bases(include, d))
    basis = space(x)
    return OptimizationOutcome(-val, x, basis, ProjectiveMeasurement.from_basis(basis), n, ok, idx, inj)


def eof_projective(
    state: PartitionedPureState,
    cfg: SearchConfig = SearchConfig(),
    include: Sequence[ProjectiveMeasurement] = (),
) -> OptimizationOutcome:
    """S-E entanglement of formation: least average post-measurement entropy of S.

    Measurements in ``include`` seed the search, so the result never exceeds
    their own average entropy.
    """
    d = _ancilla_dim(state)
    space = _Basis(d)
    psi = state.grouped()

    def avg(x):
        return _average_entropy(psi, space(x))

    val, x, n, ok, idx, inj = _multistart(avg, space, cfg, _injected_bases(include, d))
    basis = space(x)
    val = max(0.0, val)  # an entropy; drop rounding residue below zero
    return OptimizationOutcome(val, x, basis, ProjectiveMeasurement.from_basis(basis), n, ok, idx, inj)


def asymmetric_entanglement(
    state: PartitionedPureState,
    cfg: SearchConfig = SearchConfig(),
    include: Sequence[ProjectiveMeasurement] = (),
) -> float:
    return von_neumann_entropy(state.reduced("S")) - eof_projective(state, cfg, include).value
