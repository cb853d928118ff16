import numpy as np
import pytest

from clusterspt.channels import ChannelSpec, apply_channels
from clusterspt.cluster_state import pure_state_expansion
from clusterspt.lattice import build_lattice


@pytest.fixture(scope="session")
def torus2():
    return build_lattice(2, "periodic")


@pytest.fixture(scope="session")
def disk2():
    return build_lattice(2, "open")


@pytest.fixture(scope="session")
def torus4():
    return build_lattice(4, "periodic")


def _decohere(lattice, p_x=0.0, p_z=0.0, x_support="all", z_support="all"):
    return apply_channels(pure_state_expansion(lattice),
                          [ChannelSpec("x", p_x, x_support), ChannelSpec("z", p_z, z_support)])


@pytest.fixture(scope="session")
def decohere():
    return _decohere


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
