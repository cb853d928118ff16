import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from clusterspt.classical import (
    P_C2, P_CINF, ModelError, SpinModel, constrained_model, couplings_from_errors, cut_bond_model,
    exact_partition, gauge_model, grid_transfer, ising_model, ising_model_from_couplings,
    lattice_grid_couplings, lock_constraints, locked_replica_model, rate_from_coupling,
    restricted_partition, transpose_constraint_rows,
)
from clusterspt.lattice import build_lattice, rectangular_loop


@given(st.floats(0.0, 0.49))
def test_rate_roundtrip(p):
    J = couplings_from_errors(p)[0]
    assert rate_from_coupling(J) == pytest.approx(p, abs=1e-12)


def test_critical_constants():
    assert P_C2 == pytest.approx(0.1782, abs=5e-5)
    assert P_CINF == pytest.approx(0.2929, abs=5e-5)
    # n=2 criticality is the Ising point
    assert couplings_from_errors(P_C2)[0] == pytest.approx(0.5 * math.log(1 + math.sqrt(2)))


@pytest.mark.parametrize("p", [-0.1, 0.5, 0.7])
def test_rate_out_of_range(p):
    with pytest.raises(ModelError):
        couplings_from_errors(p)


def test_one_flavor_is_plain_ising(torus2):
    m = ising_model(torus2, 0.2)
    assert m.flavors == 1 and m.is_pairwise and not m.has_field
    J = couplings_from_errors(0.2)[0]
    np.testing.assert_allclose(m.K, J)


def test_zero_coupling_partition(torus4):
    m = ising_model(torus4, 0.0)
    assert exact_partition(m).log_partition == pytest.approx(16 * math.log(2))


@pytest.mark.parametrize("p", [0.05, 0.2, 0.4])
def test_decoupled_factorises(torus2, p):
    full = exact_partition(ising_model(torus2, p, n=4, decoupled=True)).log_partition
    J = couplings_from_errors(p)[0]
    single = ising_model_from_couplings(torus2, np.full(torus2.n_edges, J / 2), np.zeros(4), 2)
    assert full == pytest.approx(3 * exact_partition(single).log_partition, rel=1e-12)


def test_gauge_model_structure(torus2):
    m = gauge_model(torus2, 0.1, 0.1, n=3)
    assert m.flavors == 2 and m.n_sites == torus2.n_edges
    assert not m.is_pairwise


@pytest.mark.parametrize("kind", ["periodic", "open"])
@pytest.mark.parametrize("seed", [0, 1])
def test_transfer_matches_enumeration(kind, seed):
    lat = build_lattice(4, kind)
    rng = np.random.default_rng(seed)
    J = rng.uniform(-0.8, 0.8, lat.n_edges)
    h = rng.uniform(-0.3, 0.3, lat.n_vertices)
    m = ising_model_from_couplings(lat, J, h, 2)
    u, v = lat.vertex(0, 0), lat.vertex(2, 3)
    ex = exact_partition(m, correlators=[(u, v)])
    lnZ, corr = grid_transfer(*lattice_grid_couplings(lat, J, h), kind == "periodic", kind == "periodic",
                              insert=[(0, 0), (2, 3)])
    assert lnZ == pytest.approx(ex.log_partition, rel=1e-12)
    assert corr == pytest.approx(ex.observables[(u, v)], abs=1e-12)


def test_anti_fraction_matches_correlator(torus4):
    m = ising_model(torus4, 0.15)
    ex = exact_partition(m, correlators=[(0, 5)])
    assert ex.observables[(0, 5)] == pytest.approx(1 - 2 * ex.observables[("anti", (0, 5))], abs=1e-14)


def test_moments_binder_limits(torus4):
    hot = exact_partition(ising_model(torus4, 0.0), moments=True).observables
    cold = exact_partition(ising_model(torus4, 0.45), moments=True).observables
    assert hot["binder"] < 0.1
    assert cold["binder"] == pytest.approx(2 / 3, abs=1e-3)


def test_budget_guard():
    with pytest.raises(ModelError):
        exact_partition(ising_model(build_lattice(6), 0.1))


def test_json_roundtrip(torus2):
    m = ising_model(build_lattice(3, "open"), 0.2, 0.05, n=3)
    back = SpinModel.from_dict(json.loads(json.dumps(m.to_dict())))
    np.testing.assert_array_equal(back.K, m.K)
    assert back.term_vars == m.term_vars and back.tags == m.tags
    assert back.log_prefactor == m.log_prefactor


def test_cut_bond_zeroes_only_loop_edges(torus4):
    m = ising_model(torus4, 0.2, n=3)
    loop = rectangular_loop(torus4, (1, 1), 2, 2)
    cut = cut_bond_model(m, loop)
    for k0, k1, tag in zip(m.K, cut.K, m.tags):
        if tag[0] == "bond" and tag[1] in set(loop.edges):
            assert k1 == 0
        else:
            assert k1 == k0
    assert len(loop.edges) == 8


def test_constrained_model_matches_restriction(torus4):
    m = ising_model(torus4, 0.12)
    bonds = [e for e, (a, b) in enumerate(torus4.edge_endpoints) if a == 0][:2]
    pairs = [torus4.edge_endpoints[e] for e in bonds]

    def allowed(c):
        ok = np.ones(len(c), dtype=bool)
        for a, b in pairs:
            ok &= ((c >> np.uint64(a)) & np.uint64(1)) == ((c >> np.uint64(b)) & np.uint64(1))
        return ok

    merged = exact_partition(constrained_model(m, bonds, torus4)).log_partition
    assert merged == pytest.approx(restricted_partition(m, allowed), rel=1e-12)


@settings(max_examples=10, deadline=None)
@given(st.lists(st.integers(0, 11), min_size=1, max_size=6, unique=True), st.floats(0.02, 0.45))
def test_lock_merge_matches_violated_fraction(region, p):
    lat = build_lattice(2, "open")
    m = ising_model(lat, p, n=4)
    rows = transpose_constraint_rows(lat, region)
    base = exact_partition(m, constraints=lock_constraints(m, rows))
    locked = exact_partition(locked_replica_model(m, rows)).log_partition
    assert locked - base.log_partition == pytest.approx(math.log1p(-base.observables["violated"]), abs=1e-12)
