"""Dense linear algebra on small tensor-product Hilbert spaces.

Basis ordering: subsystem 0 is the most significant digit, so the level
tuple (b_0, ..., b_{n-1}) sits at index sum_i b_i * prod_{j>i} dims[j].
For qubits level 0 is spin up and level 1 is spin down.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .numerics import TOL, DomainError

ROLES = ("S", "A", "E")

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
UP = np.array([1, 0], dtype=complex)
DOWN = np.array([0, 1], dtype=complex)


@dataclass(frozen=True)
class HilbertLayout:
    """Subsystem dimensions plus an S/A/E role per subsystem."""

    dims: tuple[int, ...]
    roles: tuple[str, ...]
    allow_empty_environment: bool = False

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        object.__setattr__(self, "roles", tuple(str(r) for r in self.roles))
        if len(self.dims) != len(self.roles):
            raise DomainError(f"{len(self.dims)} dims but {len(self.roles)} roles")
        if any(d < 2 for d in self.dims):
            raise DomainError(f"every subsystem dimension must be >= 2, got {self.dims}")
        bad = [r for r in self.roles if r not in ROLES]
        if bad:
            raise DomainError(f"unknown roles {bad}; allowed {ROLES}")
        if "S" not in self.roles or "A" not in self.roles:
            raise DomainError("layout needs at least one S and one A subsystem")
        if "E" not in self.roles and not self.allow_empty_environment:
            raise DomainError("layout has no E subsystem (pass allow_empty_environment=True)")

    @classmethod
    def from_role_map(cls, dims: Sequence[int], role_map: dict[str, Iterable[int]], **kw):
        roles: list[str | None] = [None] * len(dims)
        for role, idxs in role_map.items():
            for i in idxs:
                if not 0 <= i < len(dims):
                    raise DomainError(f"role {role!r} names subsystem {i}, outside 0..{len(dims) - 1}")
                if roles[i] is not None:
                    raise DomainError(f"subsystem {i} assigned both {roles[i]!r} and {role!r}")
                roles[i] = role
        missing = [i for i, r in enumerate(roles) if r is None]
        if missing:
            raise DomainError(f"subsystems {missing} have no role")
        return cls(tuple(dims), tuple(roles), **kw)  # type: ignore[arg-type]

    @property
    def total_dim(self) -> int:
        return math.prod(self.dims)

    def indices(self, role: str) -> tuple[int, ...]:
        return tuple(i for i, r in enumerate(self.roles) if r == role)

    def dim(self, role: str) -> int:
        return math.prod(self.dims[i] for i in self.indices(role))

    def role_map(self) -> dict[str, list[int]]:
        return {r: list(self.indices(r)) for r in ROLES}


@dataclass(frozen=True)
class PartitionedPureState:
    layout: HilbertLayout
    amplitudes: np.ndarray

    def __post_init__(self):
        psi = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if psi.size != self.layout.total_dim:
            raise DomainError(f"{psi.size} amplitudes for total dimension {self.layout.total_dim}")
        norm = np.linalg.norm(psi)
        if abs(norm - 1.0) > TOL.norm:
            raise DomainError(f"state norm is {norm!r}, expected 1")
        psi.setflags(write=False)
        object.__setattr__(self, "amplitudes", psi)

    def density_matrix(self) -> "DensityMatrix":
        return DensityMatrix.pure(self.amplitudes, self.layout.dims)

    def grouped(self) -> np.ndarray:
        """Amplitudes as a (dim S, dim A, dim E) array."""
        lay = self.layout
        order = lay.indices("S") + lay.indices("A") + lay.indices("E")
        t = self.amplitudes.reshape(lay.dims).transpose(order)
        return t.reshape(lay.dim("S"), lay.dim("A"), lay.dim("E"))

    def reduced(self, *roles: str) -> "DensityMatrix":
        keep = sorted(i for r in roles for i in self.layout.indices(r))
        return partial_trace(self.density_matrix(), keep)


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, positive semidefinite, unit-trace matrix with subsystem dims."""

    entries: np.ndarray
    dims: tuple[int, ...] = field(default=())
    # exact eigendecomposition when the constructor already knows it (Gibbs states)
    spectrum: "HermitianSpectrum | None" = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        m = np.array(self.entries, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DomainError(f"density matrix must be square, got shape {m.shape}")
        dims = tuple(int(d) for d in self.dims) or (m.shape[0],)
        if math.prod(dims) != m.shape[0]:
            raise DomainError(f"dims {dims} do not multiply to {m.shape[0]}")
        dev = np.max(np.abs(m - m.conj().T))
        if dev > TOL.hermiticity:
            raise DomainError(f"not Hermitian (max deviation {dev:.3e})")
        tr = np.trace(m).real
        if abs(tr - 1.0) > TOL.trace:
            raise DomainError(f"trace is {tr!r}, expected 1")
        m = 0.5 * (m + m.conj().T)
        lo = eig_hermitian(m).eigenvalues[0]
        if lo < TOL.psd_floor:
            raise DomainError(f"not positive semidefinite (eigenvalue {lo:.3e})")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)
        object.__setattr__(self, "dims", dims)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def pure(cls, vec, dims: Sequence[int] = ()) -> "DensityMatrix":
        v = np.asarray(vec, dtype=complex).reshape(-1)
        norm = np.linalg.norm(v)
        if abs(norm - 1.0) > TOL.norm:
            raise DomainError(f"vector norm is {norm!r}, expected 1")
        # a normalized outer product is PSD by construction: skip the eigen check
        return cls._trusted(np.outer(v, v.conj()), tuple(dims) or (v.size,))

    @classmethod
    def _trusted(cls, entries: np.ndarray, dims: tuple[int, ...], spectrum=None) -> "DensityMatrix":
        obj = object.__new__(cls)
        m = np.array(entries, dtype=complex)
        m.setflags(write=False)
        object.__setattr__(obj, "entries", m)
        object.__setattr__(obj, "dims", tuple(dims))
        object.__setattr__(obj, "spectrum", spectrum)
        return obj


@dataclass(frozen=True)
class HermitianSpectrum:
    eigenvalues: np.ndarray  # ascending
    eigenvectors: np.ndarray  # columns

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def kron(a, b) -> np.ndarray:
    return np.kron(np.asarray(a), np.asarray(b))


def kron_all(*factors) -> np.ndarray:
    out = np.ones((1,) * np.asarray(factors[0]).ndim, dtype=complex)
    for f in factors:
        out = np.kron(out, np.asarray(f))
    return out


def basis_state(levels: Sequence[int], dims: Sequence[int]) -> np.ndarray:
    """Computational basis vector for the given per-subsystem levels."""
    idx = 0
    for b, d in zip(levels, dims):
        if not 0 <= b < d:
            raise DomainError(f"level {b} outside 0..{d - 1}")
        idx = idx * d + b
    v = np.zeros(math.prod(dims), dtype=complex)
    v[idx] = 1.0
    return v


def partial_trace(rho: DensityMatrix, keep: Iterable[int]) -> DensityMatrix:
    """Trace out every subsystem not in ``keep``; kept ones stay in original order."""
    dims = rho.dims
    keep = sorted(set(keep))
    if not keep:
        raise DomainError("keep must name at least one subsystem")
    if keep[0] < 0 or keep[-1] >= len(dims):
        raise DomainError(f"keep {keep} has indices outside 0..{len(dims) - 1}")
    gone = [i for i in range(len(dims)) if i not in keep]
    n = len(dims)
    dk = math.prod(dims[i] for i in keep)
    dg = math.prod(dims[i] for i in gone)
    t = rho.entries.reshape(dims + dims)
    perm = keep + gone
    t = t.transpose(perm + [n + i for i in perm]).reshape(dk, dg, dk, dg)
    out = np.trace(t, axis1=1, axis2=3)
    return DensityMatrix(out, tuple(dims[i] for i in keep))


def _check_hermitian(m: np.ndarray, tol: float) -> None:
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {m.shape}")
    dev = np.max(np.abs(m - m.conj().T)) if m.size else 0.0
    if dev > tol:
        raise DomainError(f"matrix is not Hermitian (max deviation {dev:.3e})")


def _jacobi_2x2(m: np.ndarray):
    a = m[0, 0].real
    d = m[1, 1].real
    b = complex(m[0, 1])
    r = abs(b)
    if r == 0.0:
        vals = np.array([a, d])
        vecs = np.eye(2, dtype=complex)
    else:
        theta = (d - a) / (2.0 * r)
        t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
        c = 1.0 / math.sqrt(t * t + 1.0)
        s = t * c
        ph = cmath.exp(-1j * cmath.phase(b))
        lo, hi = a - t * r, d + t * r
        if lo <= hi:
            return np.array([lo, hi]), np.array([[c, s], [-s * ph, c * ph]], dtype=complex)
        return np.array([hi, lo]), np.array([[s, c], [c * ph, -s * ph]], dtype=complex)
    if a <= d:
        return vals, vecs
    return vals[::-1].copy(), vecs[:, ::-1].copy()


def _jacobi(m: np.ndarray):
    """Cyclic complex Jacobi sweeps until the off-diagonal mass vanishes."""
    a = m.astype(complex, copy=True)
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    scale = max(1.0, float(np.linalg.norm(a)))
    offmask = ~np.eye(n, dtype=bool)
    for _ in range(TOL.jacobi_max_sweeps):
        off = float(np.linalg.norm(a[offmask]))
        if off < TOL.jacobi_offdiag * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                b = a[p, q]
                r = abs(b)
                if r < 1e-300:
                    continue
                theta = (a[q, q].real - a[p, p].real) / (2.0 * r)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                ph = b.conjugate() / r
                rot = np.array([[c, s], [-s * ph, c * ph]], dtype=complex)
                cols = [p, q]
                a[:, cols] = a[:, cols] @ rot
                a[cols, :] = rot.conj().T @ a[cols, :]
                a[p, q] = a[q, p] = 0.0
                v[:, cols] = v[:, cols] @ rot
    else:
        raise ArithmeticError("Jacobi eigensolver did not converge")
    vals = np.diag(a).real.copy()
    order = np.argsort(vals, kind="stable")
    return vals[order], v[:, order]


def eig_hermitian(m, *, tol: float = 1e-8) -> HermitianSpectrum:
    """Eigen-decomposition of a small Hermitian matrix, eigenvalues ascending."""
    m = np.asarray(m, dtype=complex)
    _check_hermitian(m, tol)
    m = 0.5 * (m + m.conj().T)
    if m.shape[0] == 1:
        return HermitianSpectrum(np.array([m[0, 0].real]), np.ones((1, 1), dtype=complex))
    if m.shape[0] == 2:
        vals, vecs = _jacobi_2x2(m)
    else:
        vals, vecs = _jacobi(m)
    return HermitianSpectrum(vals, vecs)


def eigvalsh(m) -> np.ndarray:
    return eig_hermitian(m).eigenvalues


def fast_eigvalsh(m: np.ndarray) -> tuple[float, ...]:
    """Ascending eigenvalues of an already-Hermitian matrix, no input checks.

    Used inside optimizer objectives; the 2x2 case is the closed form of one Jacobi rotation.
    """
    if m.shape[0] == 2:
        a = m[0, 0].real
        d = m[1, 1].real
        r = abs(m[0, 1])
        mid = 0.5 * (a + d)
        rad = math.hypot(0.5 * (a - d), r)
        return (mid - rad, mid + rad)
    return tuple(_jacobi(0.5 * (m + m.conj().T))[0])


def hermitian_function(m, f: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """V f(diag(lambda)) V^dagger for Hermitian ``m``; ``f`` acts elementwise."""
    spec = eig_hermitian(m)
    with np.errstate(all="ignore"):
        fx = np.asarray(f(spec.eigenvalues))
    if not np.all(np.isfinite(fx)):
        bad = spec.eigenvalues[~np.isfinite(fx)]
        raise DomainError(f"function undefined at eigenvalues {bad}")
    v = spec.eigenvectors
    return (v * fx) @ v.conj().T


def random_pure_amplitudes(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Normalized complex-Gaussian vector (Haar-distributed pure state)."""
    z = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return z / np.linalg.norm(z)


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary from the QR decomposition of a Ginibre matrix."""
    z = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / math.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))
