import itertools

import numpy as np
import pytest

from clusterspt.cluster_state import (
    boundary_flip_state, boundary_pi, dense_density_matrix, fwht, projector_state_dense,
    pure_state_expansion, stabilizer_generators, string_operator, xor_closed_sum,
)
from clusterspt.lattice import boundary_string, build_lattice
from clusterspt.pauli import commutes


@pytest.mark.parametrize("N,kind", [(2, "periodic"), (3, "periodic"), (3, "open"), (4, "open")])
def test_stabilizers_commute(N, kind):
    gens = stabilizer_generators(build_lattice(N, kind))
    assert all(commutes(a, b) for a, b in itertools.combinations(gens, 2))


@pytest.mark.parametrize("kind", ["periodic", "open"])
def test_expansion_equals_projector(kind):
    lat = build_lattice(2, kind)
    rho = dense_density_matrix(pure_state_expansion(lat))
    ref = projector_state_dense(lat)
    np.testing.assert_allclose(rho, ref, atol=1e-14)
    assert np.trace(rho) == pytest.approx(1.0)
    assert np.sum(rho * rho) == pytest.approx(1.0)


def test_pure_state_traces(torus2):
    st = pure_state_expansion(torus2)
    for n in (2, 3, 4):
        assert st.trace_power(n) == pytest.approx(1.0, rel=1e-12)


def test_boundary_spin_algebra():
    lat = build_lattice(3, "open")
    gens = stabilizer_generators(lat)
    for u in lat.boundary_vertices:
        px, py, pz = boundary_pi(lat, u)
        for a, b in ((px, py), (py, pz), (pz, px)):
            assert not commutes(a, b)
        for p in (px, py, pz):
            assert (p * p).is_identity
        prod = px * py
        assert prod.x == pz.x and prod.z == pz.z


def test_boundary_pi_rejects_bulk_vertex():
    lat = build_lattice(3, "open")
    with pytest.raises(ValueError):
        boundary_pi(lat, lat.vertex(1, 1))


def test_boundary_string_flips_only_endpoints():
    lat = build_lattice(3, "open")
    u, u2 = lat.vertex(0, 0), lat.vertex(0, 2)
    S = string_operator(lat, boundary_string(lat, u, u2))
    gens = stabilizer_generators(lat)
    anti = [v for v, g in enumerate(gens[: lat.n_vertices]) if not commutes(S, g)]
    assert anti == sorted([u, u2])
    assert all(commutes(S, g) for g in gens[lat.n_vertices:])


def test_flipped_pure_states_are_orthogonal(disk2):
    st = pure_state_expansion(disk2)
    fl = boundary_flip_state(st, 0, 3)
    a = dense_density_matrix(st)
    b = dense_density_matrix(fl)
    assert abs(np.sum(a * b)) < 1e-14
    assert np.trace(b) == pytest.approx(1.0)


def test_fwht_involution(rng):
    a = rng.standard_normal(64)
    np.testing.assert_allclose(fwht(fwht(a)) / 64, a, atol=1e-12)


def test_xor_closed_sum_brute_force(rng):
    fs = [rng.random(8) for _ in range(3)]
    brute = sum(fs[0][i] * fs[1][j] * fs[2][i ^ j] for i in range(8) for j in range(8))
    assert xor_closed_sum(fs) == pytest.approx(brute, rel=1e-12)
    assert float(xor_closed_sum(fs, np.longdouble)) == pytest.approx(brute, rel=1e-12)
