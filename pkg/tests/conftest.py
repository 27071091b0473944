import numpy as np
import pytest
from hypothesis import settings

from feedback_bounds.tensor import DensityMatrix

settings.register_profile("default", deadline=None, max_examples=40, derandomize=True)
settings.load_profile("default")


def random_density(d: int, rng: np.random.Generator, rank: int | None = None) -> DensityMatrix:
    rank = d if rank is None else rank
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    m = g @ g.conj().T
    return DensityMatrix(m / np.trace(m).real)


def random_hermitian(d: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return (z + z.conj().T) / 2


@pytest.fixture
def rng():
    return np.random.default_rng(20260101)


# -- acceptance bookkeeping: one PASS/FAIL line per criterion in the summary --

ACCEPTANCE_LINES: dict[int, str] = {}


class criterion:
    """Context manager recording whether an acceptance criterion held."""

    def __init__(self, number: int, title: str):
        self.number, self.title = number, title
        self.detail = ""

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        verdict = "PASS" if exc_type is None else "FAIL"
        line = f"{verdict} criterion {self.number}: {self.title}"
        if self.detail:
            line += f" [{self.detail}]"
        if exc_type is not None:
            line += f" -- {exc_type.__name__}: {str(exc).splitlines()[0] if str(exc) else ''}"
        ACCEPTANCE_LINES[self.number] = line
        print(line)
        return False


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
