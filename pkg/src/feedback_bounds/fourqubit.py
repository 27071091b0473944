"""Four-qubit worked example: qubit 1 is S, qubit 2 is A, qubits 3-4 are E.

The closed-form functions here use only scalar arithmetic, so they serve as
an independent oracle for the matrix pipeline.
"""

from __future__ import annotations

import math
from dataclasses import astuple, dataclass

import numpy as np

from .numerics import DomainError
from .tensor import HilbertLayout, PartitionedPureState

SQRT5 = math.sqrt(5.0)
KINK = 3 * SQRT5 / 7
# basis indices of |b1 b2 b3 b4> carrying the coefficients a..h (up=0, down=1)
FAMILY_SUPPORT = (0b0000, 0b0001, 0b0100, 0b0101, 0b1010, 0b1011, 0b1110, 0b1111)
LAYOUT = HilbertLayout((2, 2, 2, 2), ("S", "A", "E", "E"))


@dataclass(frozen=True)
class ExampleParameters:
    eta: float

    def __post_init__(self):
        if not abs(self.eta) < 1:
            raise DomainError(f"eta must lie in (-1, 1), got {self.eta}")


@dataclass(frozen=True)
class FamilyCoefficients:
    a: float
    b: float
    c: float
    d: float
    e: float
    f: float
    g: float
    h: float

    def __post_init__(self):
        norm2 = sum(x * x for x in astuple(self))
        if abs(norm2 - 1.0) > 1e-12:
            raise DomainError(f"coefficients have squared norm {norm2!r}, expected 1")

    @classmethod
    def from_eta(cls, eta: float) -> "FamilyCoefficients":
        ExampleParameters(eta)
        s = math.sqrt((1 + eta) / 14)
        t = math.sqrt((1 - eta) / 14)
        return cls(2 * s, s, s, s, t, t, -t, -2 * t)

    @classmethod
    def random_symmetric(cls, rng: np.random.Generator) -> "FamilyCoefficients":
        """Random coefficients obeying the mu-independence conditions.

        Split into u1=(a,b), u2=(c,d), v1=(e,f), v2=(g,h). The conditions ask
        |v1|^2 = |u2|^2, |v2|^2 = |u1|^2, v1.v2 = -u1.u2, |u1|^2+|u2|^2 = 1/2.
        """
        u = rng.normal(size=4)
        u *= math.sqrt(0.5) / np.linalg.norm(u)
        u1, u2 = u[:2], u[2:]
        n1, n2 = np.linalg.norm(u1), np.linalg.norm(u2)
        cos_gap = -float(np.dot(u1, u2)) / (n1 * n2)
        alpha = rng.uniform(0, 2 * math.pi)
        gamma = alpha + math.acos(max(-1.0, min(1.0, cos_gap)))
        v1 = n2 * np.array([math.cos(alpha), math.sin(alpha)])
        v2 = n1 * np.array([math.cos(gamma), math.sin(gamma)])
        return cls(*u1, *u2, *v1, *v2)


def build_family_state(c: FamilyCoefficients) -> PartitionedPureState:
    psi = np.zeros(16, dtype=complex)
    psi[list(FAMILY_SUPPORT)] = astuple(c)
    return PartitionedPureState(LAYOUT, psi)


def build_eta_state(p: ExampleParameters | float) -> PartitionedPureState:
    eta = p.eta if isinstance(p, ExampleParameters) else ExampleParameters(p).eta
    return build_family_state(FamilyCoefficients.from_eta(eta))


def check_family_conditions(c: FamilyCoefficients, tol: float = 1e-10) -> bool:
    a, b, cc, d, e, f, g, h = astuple(c)
    up = a * a + b * b + cc * cc + d * d
    down = e * e + f * f + g * g + h * h
    return (
        abs(up - 0.5) <= tol
        and abs(down - 0.5) <= tol
        and abs((a * cc + b * d) + (e * g + f * h)) <= tol
        and abs((a * a + b * b - cc * cc - d * d) + (e * e + f * f - g * g - h * h)) <= tol
    )


def family_outcome(c: FamilyCoefficients, n, mu: int) -> tuple[float, float, float]:
    """(p_mu, lambda_up(mu), lambda_down(mu)) for the qubit-2 measurement along n."""
    a, b, cc, d, e, f, g, h = astuple(c)
    nx, _, nz = n
    sgn = 1 if mu == 0 else -1
    p = 0.5 + sgn * ((a * cc + b * d + e * g + f * h) * nx + 0.5 * (a * a + b * b - cc * cc - d * d + e * e + f * f - g * g - h * h) * nz)
    up = a * a + b * b + cc * cc + d * d + sgn * (2 * (a * cc + b * d) * nx + (a * a + b * b - cc * cc - d * d) * nz)
    down = e * e + f * f + g * g + h * h + sgn * (2 * (e * g + f * h) * nx + (e * e + f * f - g * g - h * h) * nz)
    return p, up / (2 * p), down / (2 * p)


def analytic_max_extraction(p: ExampleParameters | float) -> float:
    eta = p.eta if isinstance(p, ExampleParameters) else ExampleParameters(p).eta
    if eta <= -KINK:
        return 0.0
    if eta <= KINK:
        return eta + KINK
    return 2 * eta


def _xlogx(x: float) -> float:
    return x * math.log(x) if x > 0 else 0.0


def _g(y: float) -> float:
    """(1/14)[(7+3y) ln(7+3y) + (7-3y) ln(7-3y)]."""
    return (_xlogx(7 + 3 * y) + _xlogx(7 - 3 * y)) / 14


def _binary_entropy(eta: float) -> float:
    return -_xlogx((1 + eta) / 2) - _xlogx((1 - eta) / 2)


def analytic_gibbs_entropy(beta: float) -> float:
    """Entropy of the sigma^z Gibbs state."""
    ep, em = math.exp(2 * beta), math.exp(-2 * beta)
    return math.log1p(ep) / (1 + ep) + math.log1p(em) / (1 + em)


def analytic_divergence(eta: float, beta: float) -> float:
    """D(rho_S^i || sigma_beta) for the eta state and H = sigma^z."""
    out = -math.log(2)
    if eta > -1:
        out += (1 + eta) / 2 * (math.log(1 + eta) + math.log1p(math.exp(2 * beta)))
    if eta < 1:
        out += (1 - eta) / 2 * (math.log(1 - eta) + math.log1p(math.exp(-2 * beta)))
    return out


def analytic_beta_eff_at_zero() -> float:
    return 0.5 * math.log((7 + 3 * SQRT5) / (7 - 3 * SQRT5))


def analytic_eof(eta: float) -> float:
    return _binary_entropy(eta) - _g(SQRT5) + _g(SQRT5 * eta)


@dataclass(frozen=True)
class AnalyticRecord:
    eta: float
    n: tuple[float, float, float]
    p_mu: tuple[float, float]
    post_spectra: tuple[tuple[float, float], tuple[float, float]]  # (up, down) per outcome
    S_initial: float
    avg_post_entropy: float
    I_QC: float
    E_F: float
    E_SA_asym: float

    def divergence(self, beta: float) -> float:
        return analytic_divergence(self.eta, beta)


def analytic_quantities(p: ExampleParameters | float, n) -> AnalyticRecord:
    eta = p.eta if isinstance(p, ExampleParameters) else ExampleParameters(p).eta
    n = tuple(float(x) for x in n)
    if abs(math.sqrt(sum(x * x for x in n)) - 1) > 1e-10:
        raise DomainError(f"Bloch vector {n} is not a unit vector")
    x = 2 * n[0] + n[2]
    probs = []
    spectra = []
    for mu in (0, 1):
        sgn = 1 if mu == 0 else -1
        p_mu = (7 + sgn * 3 * eta * x) / 14
        up = (1 + eta) / 14 * (7 + sgn * 3 * x) / (2 * p_mu)
        down = (1 - eta) / 14 * (7 - sgn * 3 * x) / (2 * p_mu)
        probs.append(p_mu)
        spectra.append((up, down))
    s_i = _binary_entropy(eta)
    avg = s_i - _g(x) + _g(eta * x)
    e_f = analytic_eof(eta)
    return AnalyticRecord(
        eta=eta,
        n=n,
        p_mu=(probs[0], probs[1]),
        post_spectra=(spectra[0], spectra[1]),
        S_initial=s_i,
        avg_post_entropy=avg,
        I_QC=_g(x) - _g(eta * x),
        E_F=e_f,
        E_SA_asym=s_i - e_f,
    )


def analytic_bound(eta: float) -> tuple[float, float, float]:
    """(beta_eff, D/beta_eff, E_SA/beta_eff) from the closed forms.

    beta_eff comes from Brent's method on the closed-form Gibbs entropy,
    independent of the bisection solver used by the numeric pipeline.
    """
    from scipy.optimize import brentq

    rec = analytic_quantities(eta, (1.0, 0.0, 0.0))
    beta = brentq(lambda b: analytic_gibbs_entropy(b) - rec.E_F, 1e-9, 60.0, xtol=1e-15, rtol=1e-15)
    return beta, analytic_divergence(eta, beta) / beta, rec.E_SA_asym / beta
