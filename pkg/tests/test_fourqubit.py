import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from feedback_bounds.fourqubit import (
    KINK, ExampleParameters, FamilyCoefficients, analytic_beta_eff_at_zero, analytic_bound,
    analytic_divergence, analytic_eof, analytic_max_extraction, analytic_quantities,
    build_eta_state, build_family_state, check_family_conditions, family_outcome,
)
from feedback_bounds.numerics import DomainError
from feedback_bounds.protocol import Hamiltonian, ProjectiveMeasurement, measure, qc_mutual_information
from feedback_bounds.tensor import SIGMA_Z, eigvalsh
from feedback_bounds.thermo import ZeroTemperature, gibbs, solve_beta_eff
from feedback_bounds.metrics import kl_divergence
from feedback_bounds.search import eof_projective

R5 = math.sqrt(5)
HZ = Hamiltonian(SIGMA_Z)


def unit_vectors():
    return st.tuples(st.floats(0, math.pi), st.floats(0, 2 * math.pi)).map(
        lambda a: (math.sin(a[0]) * math.cos(a[1]), math.sin(a[0]) * math.sin(a[1]), math.cos(a[0]))
    )


def test_eta_state_amplitudes():
    amps = np.abs(build_eta_state(0.0).amplitudes)
    nz = amps[amps > 0]
    assert len(nz) == 8
    assert np.all(np.isclose(nz, 2 / math.sqrt(14)) | np.isclose(nz, 1 / math.sqrt(14)))
    assert np.allclose(build_eta_state(0.0).reduced("S").entries, np.eye(2) / 2)
    assert np.allclose(build_eta_state(ExampleParameters(0.5)).reduced("S").entries, np.diag([0.75, 0.25]))


@pytest.mark.parametrize("eta", [1.0, -1.0, 1.5, float("nan")])
def test_eta_domain(eta):
    with pytest.raises(DomainError):
        build_eta_state(eta)


def test_family_specializes_to_eta_state():
    assert np.array_equal(build_family_state(FamilyCoefficients.from_eta(0.0)).amplitudes, build_eta_state(0.0).amplitudes)
    with pytest.raises(DomainError):
        FamilyCoefficients(1, 1, 0, 0, 0, 0, 0, 0)


def test_product_family_member_has_no_eof():
    state = build_family_state(FamilyCoefficients(1, 0, 0, 0, 0, 0, 0, 0))
    assert eof_projective(state).value == pytest.approx(0, abs=1e-12)
    with pytest.raises(ZeroTemperature):
        solve_beta_eff(HZ, eof_projective(state).value)


@given(st.integers(0, 2**32 - 1), unit_vectors())
def test_family_outcome_matches_measurement(seed, n):
    v = np.random.default_rng(seed).normal(size=8)
    c = FamilyCoefficients(*(v / np.linalg.norm(v)))
    ens = measure(build_family_state(c), ProjectiveMeasurement.bloch(n))
    for mu in (0, 1):
        p, up, down = family_outcome(c, n, mu)
        assert ens.outcomes[mu].probability == pytest.approx(p, abs=1e-12)
        if p > 1e-9:
            assert np.allclose(ens.outcomes[mu].system_state.entries, np.diag([up, down]), atol=1e-9)


def test_family_conditions_examples():
    assert check_family_conditions(FamilyCoefficients.from_eta(0.0))
    assert not check_family_conditions(FamilyCoefficients.from_eta(0.3))
    # all equal: the two halves balance but a c + b d + e g + f h = 1/2
    assert not check_family_conditions(FamilyCoefficients(*[1 / math.sqrt(8)] * 8))


@given(st.integers(0, 2**32 - 1), unit_vectors())
def test_symmetric_family_has_mu_independent_spectra(seed, n):
    c = FamilyCoefficients.random_symmetric(np.random.default_rng(seed))
    assert check_family_conditions(c)
    (p0, u0, d0), (p1, u1, d1) = family_outcome(c, n, 0), family_outcome(c, n, 1)
    if min(p0, p1) > 1e-6:
        assert sorted((u0, d0)) == pytest.approx(sorted((u1, d1)), abs=1e-9)


def test_max_extraction_branches():
    assert analytic_max_extraction(-0.99) == 0
    assert analytic_max_extraction(0.0) == pytest.approx(3 * R5 / 7)
    assert analytic_max_extraction(0.97) == pytest.approx(1.94)
    # continuous at both kinks
    for k in (-KINK, KINK):
        assert analytic_max_extraction(k - 1e-12) == pytest.approx(analytic_max_extraction(k + 1e-12), abs=1e-10)


def test_closed_forms_at_zero():
    rec = analytic_quantities(0.0, (2 / R5, 0, 1 / R5))
    assert rec.I_QC == pytest.approx(rec.E_SA_asym, abs=1e-15)
    assert rec.E_SA_asym == pytest.approx(0.591846778493220742, abs=1e-14)
    assert rec.E_F == pytest.approx(0.101300402066724567, abs=1e-14)
    assert rec.S_initial == pytest.approx(math.log(2))
    assert rec.p_mu == pytest.approx((0.5, 0.5))
    assert analytic_beta_eff_at_zero() == pytest.approx(1.92484730023841379, abs=1e-14)


def test_divergence_closed_form_matches_numeric():
    for eta in (-0.6, 0.0, 0.4):
        for beta in (0.2, 1.0, 3.0):
            rho = build_eta_state(eta).reduced("S")
            assert analytic_divergence(eta, beta) == pytest.approx(kl_divergence(rho, gibbs(HZ, beta).sigma), abs=1e-12)
    b = analytic_beta_eff_at_zero()
    assert analytic_divergence(0.0, b) == pytest.approx(math.log(3.5), abs=1e-14)


@given(st.floats(-0.95, 0.95), unit_vectors())
def test_closed_forms_match_numeric_pipeline(eta, n):
    rec = analytic_quantities(eta, n)
    state = build_eta_state(eta)
    m = ProjectiveMeasurement.bloch(n)
    ens = measure(state, m)
    assert ens.probabilities == pytest.approx(rec.p_mu, abs=1e-10)
    for o, spec in zip(ens.outcomes, rec.post_spectra):
        assert eigvalsh(o.system_state.entries) == pytest.approx(sorted(spec), abs=1e-10)
    assert ens.average_entropy() == pytest.approx(rec.avg_post_entropy, abs=1e-10)
    assert qc_mutual_information(state, m) == pytest.approx(rec.I_QC, abs=1e-10)


def test_analytic_bound_at_zero():
    beta, d_term, e_term = analytic_bound(0.0)
    assert beta == pytest.approx(analytic_beta_eff_at_zero(), abs=1e-13)
    assert d_term + e_term == pytest.approx(3 * R5 / 7, abs=1e-12)


def test_eof_closed_form_symmetric_in_eta_sign():
    for eta in (0.1, 0.5, 0.9):
        assert analytic_eof(eta) == pytest.approx(analytic_eof(-eta), abs=1e-15)
