import numpy as np
import pytest
from hypothesis import settings

from hcross.freq_index import cross_indices
from hcross.polynomial import TrigPolynomial

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


def random_poly(freqs, seed):
    rng = np.random.default_rng(seed)
    n = freqs.shape[0]
    return TrigPolynomial(freqs, rng.standard_normal(n) + 1j * rng.standard_normal(n), d=freqs.shape[1])


def random_cross_poly(n, d, seed):
    return random_poly(cross_indices(n, d), seed)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance")
        for line in mod.RESULTS:
            terminalreporter.write_line(line)
