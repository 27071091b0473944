"""Von Neumann entropy and quantum relative entropy, in nats."""

from __future__ import annotations

import numpy as np

from .numerics import TOL, InfiniteDivergence, DomainError
from .tensor import DensityMatrix, eig_hermitian


def _matrix(rho) -> np.ndarray:
    return rho.entries if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)


def spectrum_entropy(eigenvalues) -> float:
    """-sum p ln p, with eigenvalues below the rank cutoff counted as zero."""
    lam = np.asarray(eigenvalues, dtype=float)
    lam = lam[lam > TOL.rank_cutoff]
    # clamp the rounding residue of a pure spectrum at zero
    return max(0.0, float(-np.sum(lam * np.log(lam))))


def von_neumann_entropy(rho) -> float:
    return spectrum_entropy(eig_hermitian(_matrix(rho)).eigenvalues)


def kl_divergence(rho, sigma) -> float:
    """D(rho || sigma) = tr rho (ln rho - ln sigma).

    Raises InfiniteDivergence when rho has weight outside the support of sigma.
    """
    a, b = _matrix(rho), _matrix(sigma)
    if a.shape != b.shape:
        raise DomainError(f"shape mismatch {a.shape} vs {b.shape}")
    sr = eig_hermitian(a)
    exact = getattr(sigma, "spectrum", None)
    # a known spectrum keeps full relative accuracy on tiny eigenvalues
    ss = exact if exact is not None else eig_hermitian(b)
    keep_s = ss.eigenvalues > (0.0 if exact is not None else TOL.rank_cutoff)
    w = ss.eigenvectors[:, keep_s]
    keep_r = sr.eigenvalues > TOL.rank_cutoff
    v = sr.eigenvectors[:, keep_r]
    residual = v - w @ (w.conj().T @ v)
    if residual.size and np.max(np.linalg.norm(residual, axis=0)) > TOL.support_residual:
        raise InfiniteDivergence("support of rho is not contained in support of sigma")
    lam = sr.eigenvalues[keep_r]
    rho_log_rho = float(np.sum(lam * np.log(lam)))
    # tr rho ln sigma restricted to supp(sigma)
    weights = np.einsum("ij,jk,ki->i", w.conj().T, a, w).real
    rho_log_sigma = float(np.sum(weights * np.log(ss.eigenvalues[keep_s])))
    return rho_log_rho - rho_log_sigma
