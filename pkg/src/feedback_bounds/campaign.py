"""Seeded randomized checks of the bound chain on random pure states."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .files import complex_pairs, parse_state, state_to_dict
from .fourqubit import LAYOUT, FamilyCoefficients, build_family_state
from .protocol import Hamiltonian, ProjectiveMeasurement
from .search import SearchConfig, maximize_extraction, optimal_policy
from .tensor import HilbertLayout, PartitionedPureState, random_pure_amplitudes, random_unitary
from .thermo import BoundReport, evaluate_bounds

VIOLATION_TOL = 1e-8
NEAR_EQUALITY = 1e-6


@dataclass(frozen=True)
class CampaignSpec:
    seed: int
    dims: tuple[int, ...] = (2, 2, 2, 2)
    roles: tuple[str, ...] = ("S", "A", "E", "E")
    # "haar": random pure states; "symmetric": random mu-independent four-qubit family
    ensemble: str = "haar"
    # "random": Haar-random ancilla basis; "optimal": extraction-maximizing basis
    measurement: str = "random"
    hamiltonian: str = "ladder"
    search: SearchConfig = SearchConfig(grid_size=32, multistarts=4)

    def layout(self) -> HilbertLayout:
        return LAYOUT if self.ensemble == "symmetric" else HilbertLayout(self.dims, self.roles)

    def echo(self) -> dict:
        d = asdict(self)
        d["dims"] = list(self.dims)
        d["roles"] = list(self.roles)
        return d


def ladder_hamiltonian(d: int) -> Hamiltonian:
    """Evenly spaced levels from +1 down to -1; sigma^z when d = 2."""
    return Hamiltonian(np.diag(np.linspace(1.0, -1.0, d)).astype(complex))


def trial_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng([seed, index])


def sample_trial(spec: CampaignSpec, index: int):
    rng = trial_rng(spec.seed, index)
    lay = spec.layout()
    if spec.ensemble == "symmetric":
        state = build_family_state(FamilyCoefficients.random_symmetric(rng))
    elif spec.ensemble == "haar":
        state = PartitionedPureState(lay, random_pure_amplitudes(lay.total_dim, rng))
    else:
        raise ValueError(f"unknown ensemble {spec.ensemble!r}")
    d_s = lay.dim("S")
    if spec.hamiltonian == "ladder":
        h = ladder_hamiltonian(d_s)
    elif spec.hamiltonian == "random":
        z = rng.normal(size=(d_s, d_s)) + 1j * rng.normal(size=(d_s, d_s))
        h = Hamiltonian((z + z.conj().T) / 2)
    else:
        raise ValueError(f"unknown hamiltonian {spec.hamiltonian!r}")
    basis = random_unitary(lay.dim("A"), rng)
    if spec.measurement == "optimal":
        basis = maximize_extraction(state, h, spec.search).basis
    elif spec.measurement != "random":
        raise ValueError(f"unknown measurement mode {spec.measurement!r}")
    return state, h, ProjectiveMeasurement.from_basis(basis), basis


def violations(r: BoundReport, tol: float = VIOLATION_TOL) -> list[str]:
    bad = []
    if -r.delta_S > r.I_QC + tol:
        bad.append("entropy_change_exceeds_I_QC")
    if r.I_QC > r.E_SA_asym + tol:
        bad.append("I_QC_exceeds_E_SA")
    if r.defined:
        if r.E_ext > r.bound_first + tol:
            bad.append("E_ext_exceeds_bound_first")
        if r.bound_first > r.bound_second + tol:
            bad.append("bound_first_exceeds_bound_second")
        if r.gap_second < NEAR_EQUALITY and not r.equality_condition_met:
            bad.append("equality_without_mu_independent_spectra")
    return bad


def replay_payload(state, h: Hamiltonian, basis) -> dict:
    return {
        "state": state_to_dict(state),
        "hamiltonian": complex_pairs(h.matrix),
        "measurement_basis": complex_pairs(basis),
    }


def run_trial(spec: CampaignSpec, index: int) -> dict:
    state, h, m, basis = sample_trial(spec, index)
    policy = optimal_policy(state, m, h)
    report = evaluate_bounds(state, h, m, policy, spec.search)
    bad = violations(report)
    rec = {"trial": index, "report": report.as_dict(), "violations": bad}
    if bad:
        rec["replay"] = replay_payload(state, h, basis)
    return rec


def replay_trial(payload: dict, search: SearchConfig = CampaignSpec.search) -> BoundReport:
    """Re-evaluate a serialized trial from its stored state, Hamiltonian and basis."""
    state = parse_state(payload["state"], "<replay>")
    d = state.layout.dim("S")
    h = Hamiltonian(np.array([complex(*z) for z in payload["hamiltonian"]]).reshape(d, d))
    da = state.layout.dim("A")
    basis = np.array([complex(*z) for z in payload["measurement_basis"]]).reshape(da, da)
    m = ProjectiveMeasurement.from_basis(basis)
    return evaluate_bounds(state, h, m, optimal_policy(state, m, h), search)


def _job(args):
    return run_trial(*args)


def run_campaign(spec: CampaignSpec, trials: int, workers: int = 1) -> list[dict]:
    jobs = [(spec, i) for i in range(trials)]
    if workers <= 1:
        return [run_trial(*j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_job, jobs, chunksize=max(1, trials // (8 * workers))))
