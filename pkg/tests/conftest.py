import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from starquant.poly import CANONICAL, HOLOMORPHIC, PhasePoly, PhysParams

settings.register_profile("default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


gauss_int = st.builds(complex, st.integers(-3, 3), st.integers(-3, 3))


@st.composite
def polys(draw, max_degree=4, basis=CANONICAL, max_terms=5):
    n = draw(st.integers(1, max_terms))
    terms = {}
    for _ in range(n):
        i = draw(st.integers(0, max_degree))
        j = draw(st.integers(0, max_degree - i))
        terms[(i, j, 0)] = draw(gauss_int)
    return PhasePoly(terms, basis)


def holo_polys(max_degree=4, max_terms=5):
    return polys(max_degree, HOLOMORPHIC, max_terms)


@pytest.fixture
def unit():
    return PhysParams()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def assert_poly_close(f, g, tol=1e-12):
    diff = (f - g).max_abs() if not (f - g).is_zero() else 0.0
    scale = max(1.0, f.max_abs() if not f.is_zero() else 0.0)
    assert diff <= tol * scale, f"{f} != {g} (diff {diff:.3g})"


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
