"""Bound decomposition and maximal extraction across the eta family."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from typing import Sequence

from .fourqubit import build_eta_state
from .protocol import Hamiltonian
from .search import SearchConfig, eof_projective, maximize_extraction
from .tensor import SIGMA_Z
from .thermo import TemperatureLimit, gibbs, solve_beta_eff
from .metrics import kl_divergence, von_neumann_entropy

COLUMNS = ("eta", "E_F", "beta_eff", "D_term", "E_SA_term", "bound_second", "max_E_ext", "gap", "status")


@dataclass(frozen=True)
class SweepRow:
    eta: float
    E_F: float
    beta_eff: float
    D_term: float
    E_SA_term: float
    bound_second: float
    max_E_ext: float
    gap: float
    status: str = "ok"

    @property
    def defined(self) -> bool:
        return self.status == "ok"

    def as_dict(self) -> dict:
        return asdict(self)


def default_grid() -> list[float]:
    return [round(-0.99 + 0.01 * k, 2) for k in range(199)]


def sweep_row(eta: float, cfg: SearchConfig = SearchConfig()) -> SweepRow:
    h = Hamiltonian(SIGMA_Z)
    state = build_eta_state(eta)
    best = maximize_extraction(state, h, cfg)
    # the extraction-optimal measurement seeds the EoF search so E_SA >= its I_QC
    eof = eof_projective(state, cfg, include=(best.measurement,))
    rho_i = state.reduced("S")
    try:
        beta = solve_beta_eff(h, eof.value)
    except TemperatureLimit:
        nan = math.nan
        return SweepRow(eta, eof.value, nan, nan, nan, nan, best.value, nan, "undefined")
    d_term = kl_divergence(rho_i, gibbs(h, beta).sigma) / beta
    e_sa_term = (von_neumann_entropy(rho_i) - eof.value) / beta
    bound = d_term + e_sa_term
    return SweepRow(eta, eof.value, beta, d_term, e_sa_term, bound, best.value, bound - best.value)


def _row_job(args):
    return sweep_row(*args)


def sweep_eta(grid: Sequence[float] | None = None, cfg: SearchConfig = SearchConfig(), workers: int = 1) -> list[SweepRow]:
    grid = default_grid() if grid is None else list(grid)
    grid = sorted(grid)
    jobs = [(eta, cfg) for eta in grid]
    if workers <= 1:
        return [sweep_row(*j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_row_job, jobs))
