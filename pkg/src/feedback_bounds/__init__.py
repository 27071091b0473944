"""Thermodynamic bounds on energy extraction by measurement and feedback.

A system S, an ancilla A and an environment E share a pure state. Measuring A
and rotating S conditioned on the outcome extracts energy from S; the bounds
here cap that energy through an effective temperature fixed by the S-E
entanglement of formation.
"""

__version__ = "0.1.0"

from .numerics import TOL, ConsistencyError, DomainError, InfiniteDivergence, NumericPolicy
from .tensor import DensityMatrix, HilbertLayout, PartitionedPureState, eig_hermitian, partial_trace
from .metrics import kl_divergence, von_neumann_entropy
from .protocol import (
    FeedbackPolicy,
    Hamiltonian,
    OutcomeEnsemble,
    ProjectiveMeasurement,
    ProtocolResult,
    measure,
    qc_mutual_information,
    run_protocol,
)
from .search import (
    OptimizationOutcome,
    SearchConfig,
    asymmetric_entanglement,
    daemonic_ergotropy,
    eof_projective,
    maximize_extraction,
    optimal_policy,
)
from .thermo import BoundReport, GibbsState, TemperatureLimit, evaluate_bounds, gibbs, solve_beta_eff

__all__ = [name for name in dir() if not name.startswith("_")]
