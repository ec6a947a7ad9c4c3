import numpy as np
import pytest

from bosehub import basis as basis_mod
from bosehub.hamiltonian import ModelParams, build_full, build_reduced

SITES = 6
BOSONS = 5


@pytest.fixture(scope="session")
def full6():
    return basis_mod.full_basis(SITES, BOSONS)


@pytest.fixture(scope="session")
def reduced26():
    return basis_mod.reduced_basis(SITES, BOSONS)


@pytest.fixture(scope="session")
def h_full():
    def make(t=1.0, U=2.0):
        return build_full(ModelParams(t, U, SITES, BOSONS))
    return make


@pytest.fixture(scope="session")
def h_reduced(reduced26):
    def make(t=1.0, U=2.0):
        return build_reduced(ModelParams(t, U, SITES, BOSONS), reduced26)
    return make


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
