import numpy as np
import pytest

from kohnen.forms import ShimuraLiftOracle, build_plus_cusp_form
from kohnen.sieve import FactorSieve


@pytest.fixture(scope="session")
def sieve_1e6():
    return FactorSieve.build(10**6, use_cache=False)


@pytest.fixture(scope="session")
def form_5000():
    return build_plus_cusp_form(6, 5000)


@pytest.fixture(scope="session")
def big_form():
    # covers experiments up to x = 10^5
    return build_plus_cusp_form(6, 100_001)


@pytest.fixture(scope="session")
def oracle_small():
    return ShimuraLiftOracle.build(200)


@pytest.fixture(scope="session")
def tau_13k():
    # long enough for Gaussian-kernel scans up to |D| = 200
    return np.asarray(ShimuraLiftOracle.build(64 * 200 + 1).tau, dtype=np.float64)
