"""Shared numeric tolerances and error types."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class NumericPolicy:
    hermiticity: float = 1e-10
    trace: float = 1e-10
    psd_floor: float = -1e-10
    reconstruction: float = 1e-9
    norm: float = 1e-10
    projector: float = 1e-10
    unitary: float = 1e-10
    # eigenvalues below this are treated as exact zeros (0 ln 0 = 0)
    rank_cutoff: float = 1e-12
    support_residual: float = 1e-9
    # outcomes at or below this probability carry no post-measurement state
    null_outcome: float = 1e-14
    jacobi_offdiag: float = 1e-14
    jacobi_max_sweeps: int = 100


TOL = NumericPolicy()


class DomainError(ValueError):
    """An input lies outside the domain an operation is defined on."""


class InfiniteDivergence(ArithmeticError):
    """Relative entropy is +inf because supp(rho) is not inside supp(sigma)."""


class ConsistencyError(RuntimeError):
    """Two algebraically equivalent evaluation routes disagreed."""
