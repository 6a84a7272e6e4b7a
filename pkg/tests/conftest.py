import numpy as np
import pytest

from tracefn_lab.arith import make_prime_modulus, sieve_tables


@pytest.fixture(scope="session")
def q5():
    return make_prime_modulus(5)


@pytest.fixture(scope="session")
def q7():
    return make_prime_modulus(7)


@pytest.fixture(scope="session")
def q101():
    return make_prime_modulus(101)


@pytest.fixture(scope="session")
def tables_2k():
    return sieve_tables(2000)


@pytest.fixture()
def rng():
    return np.random.default_rng(0x5EEDF00D)
