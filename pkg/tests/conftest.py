import numpy as np
import pytest
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from calibkit.simplex import LabeledDataset


def prob_vectors(min_l=2, max_l=6):
    """Strictly positive probability vectors with a random class count."""
    return st.integers(min_l, max_l).flatmap(
        lambda L: hnp.arrays(np.float64, L, elements=st.floats(1e-3, 1.0))
    ).map(lambda v: v / v.sum())


def random_dataset(rng, n, L, concentration=1.0):
    """Dirichlet predictions with labels drawn from a sharpened copy."""
    z = rng.dirichlet(np.full(L, concentration), size=n)
    p = z ** 0.6
    p /= p.sum(axis=1, keepdims=True)
    y = np.array([rng.choice(L, p=row) for row in p])
    return LabeledDataset(z, y)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(test_acceptance.RESULTS, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
