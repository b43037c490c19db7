import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def mra6():
    from broadfocus.geometry import make_mra6
    return make_mra6()


@pytest.fixture(scope="session")
def mra6_coarray(mra6):
    from broadfocus.geometry import difference_coarray
    return difference_coarray(mra6)


def brute_force_weights(indices):
    """Pair count per lag from an explicit double loop."""
    w = {}
    for a in indices:
        for b in indices:
            w[a - b] = w.get(a - b, 0) + 1
    return w


def random_hermitian(rng, n, scale=1.0):
    A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    R = scale * (A @ A.conj().T) / n
    return 0.5 * (R + R.conj().T)


ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])
