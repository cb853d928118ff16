import numpy as np
import pytest

from clusterspt.channels import (
    ChannelError, ChannelSpec, apply_channel, apply_channel_dense, classify_symmetry,
    dense_symmetry_check, kraus_operators, one_form_generators, zero_form_generator,
)
from clusterspt.cluster_state import dense_density_matrix, projector_state_dense, pure_state_expansion
from clusterspt.pauli import commutes


@pytest.fixture(scope="module")
def rho0(torus2):
    return projector_state_dense(torus2)


@pytest.mark.parametrize("spec", [ChannelSpec("x", 0.13, "all"), ChannelSpec("z", 0.3, "A"),
                                  ChannelSpec("x", 0.45, "B"), ChannelSpec("z", 0.2, [0, 5, 7])])
def test_expansion_matches_kraus(torus2, rho0, spec):
    rho = dense_density_matrix(apply_channel(pure_state_expansion(torus2), spec))
    np.testing.assert_allclose(rho, apply_channel_dense(rho0, spec, torus2), atol=1e-13)


def test_kraus_completeness():
    ops = kraus_operators(ChannelSpec("x", 0.2), 3, 1)
    assert sum(a * a for a, _ in ops) == pytest.approx(1.0)


@pytest.mark.parametrize("kind,p,support", [("y", 0.1, "all"), ("x", -0.1, "all"), ("x", 0.6, "all"),
                                            ("z", 0.1, "C")])
def test_spec_validation(kind, p, support):
    with pytest.raises(ChannelError):
        ChannelSpec(kind, p, support)


def test_support_outside_lattice(torus2):
    with pytest.raises(ChannelError):
        ChannelSpec("x", 0.1, [99]).qubits(torus2)


def test_generators_are_symmetries_of_pure_state(torus2, rho0):
    assert dense_symmetry_check(rho0, zero_form_generator(torus2)) == "exact"
    for g in one_form_generators(torus2):
        assert dense_symmetry_check(rho0, g) == "exact"


def test_generators_commute(torus4):
    gens = [zero_form_generator(torus4)] + one_form_generators(torus4)
    assert all(commutes(a, b) for a in gens for b in gens)


@pytest.mark.parametrize("spec,expected", [
    (ChannelSpec("x", 0.2, "all"), ("exact", "exact")),
    (ChannelSpec("z", 0.2, "A"), ("average", "exact")),
    (ChannelSpec("z", 0.2, "B"), ("exact", "average")),
    (ChannelSpec("z", 0.0, "all"), ("exact", "exact")),
])
def test_classify_symmetry(torus4, spec, expected):
    v = classify_symmetry(torus4, spec)
    assert (v.zero_form, v.one_form) == expected

