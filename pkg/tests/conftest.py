import dataclasses

import numpy as np
import pytest

from phs import BoundarySpec1D, CoefficientSet, ContinuousModel, QuadraticDensity

# acceptance lines collected by tests/test_acceptance.py
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def random_spd(rng, n):
    m = rng.standard_normal((n, n))
    return m @ m.T + n * np.eye(n)


def random_model_1d(rng, n_p, n_q, at_a="p", at_b="q", length=1.0):
    p1 = rng.standard_normal((n_p, n_q))
    return ContinuousModel(
        dimension=1,
        domain=(0.0, length),
        coefficients=CoefficientSet(p1=p1, p0=rng.standard_normal((n_p, n_q))),
        density_p=QuadraticDensity(random_spd(rng, n_p)),
        density_q=QuadraticDensity(random_spd(rng, n_q)),
        boundary=BoundarySpec1D(at_a, at_b),
        name="random_1d",
    )


def shifted(model, a, b):
    """Same model on the interval [a, b]."""
    return dataclasses.replace(model, domain=(float(a), float(b)))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
