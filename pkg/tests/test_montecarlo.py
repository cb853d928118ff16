import math

import numpy as np
import pytest

from clusterspt.classical import cut_bond_model, exact_partition, ising_model, ising_model_from_couplings
from clusterspt.lattice import build_lattice, rectangular_loop
from clusterspt.montecarlo import (
    McError, SpinConfig, binder, block_means, blocked_error, boundary_correlator, chain_seeds,
    compile_model, free_energy_difference, jackknife, metropolis_sweep, observables, sample,
    staged_lock_ratio, wolff_update,
)


def _model(lat, J, h=0.0):
    return ising_model_from_couplings(lat, np.full(lat.n_edges, J), np.full(lat.n_vertices, h), 2)


@pytest.mark.parametrize("method", ["metropolis", "wolff"])
@pytest.mark.parametrize("J", [0.3, 0.6])
def test_sampler_matches_enumeration(torus4, method, J):
    m = _model(torus4, J)
    ex = exact_partition(m, moments=True, energy=True).observables
    obs = observables(sample(m, 40000, 4000, method, seed=11))
    for key, ref in (("energy", ex["energy"]), ("m2", ex["m2"]), ("binder", ex["binder"])):
        v, e = obs[key]
        assert abs(v - ref) < 4 * e, (key, v, e, ref)


def test_energy_cache_does_not_drift(torus4, rng):
    m = _model(torus4, 0.5)
    cm = compile_model(m)
    cfg = SpinConfig.initial(cm, "hot", seed=3)
    for _ in range(50):
        metropolis_sweep(cfg, cm, rng)
        wolff_update(cfg, cm, rng)
    assert cfg.drift(cm) < 1e-9


def test_wolff_refuses_fields_and_frustration(torus4):
    with pytest.raises(McError):
        sample(_model(torus4, 0.3, h=0.1), 100, 0, "wolff")
    with pytest.raises(McError):
        sample(_model(torus4, -0.3), 100, 0, "wolff")


def test_zero_coupling_clusters_are_single_spins(torus4):
    s = sample(_model(torus4, 0.0), 200, 0, "wolff", seed=1)
    assert s.mean_cluster == pytest.approx(1.0)


def test_reproducible(torus4):
    m = _model(torus4, 0.4)
    a = sample(m, 500, 50, "hybrid", seed=5)
    b = sample(m, 500, 50, "hybrid", seed=5)
    np.testing.assert_array_equal(a.energy, b.energy)
    assert chain_seeds(1, 3) == chain_seeds(1, 3)
    assert len(set(chain_seeds(1, 8))) == 8


def test_unknown_method(torus4):
    with pytest.raises(McError):
        sample(_model(torus4, 0.3), 10, 0, "gibbs")


def test_block_statistics(rng):
    x = rng.standard_normal(64000)
    v, e = blocked_error(x)
    assert e == pytest.approx(1 / math.sqrt(64000), rel=0.35)
    assert len(block_means(x)) >= 32
    with pytest.raises(ValueError):
        blocked_error(x[:10])
    m, err = jackknife(lambda a: a * a, [x + 2])
    assert m == pytest.approx(4.0, abs=6 * err)


def test_binder_limits():
    assert binder(1.0, 1.0) == pytest.approx(2 / 3)
    assert binder(1.0, 3.0) == pytest.approx(0.0)


def test_boundary_correlator(torus4):
    m = _model(torus4, 0.35)
    assert boundary_correlator(m, 3, 3).value == 1.0
    ref = exact_partition(m, correlators=[(0, 10)]).observables[(0, 10)]
    est = boundary_correlator(m, 0, 10, n_meas=40000, n_therm=2000, seed=2)
    assert abs(est.value - ref) < 4 * est.standard_error


def test_integration_matches_enumeration(torus4):
    m = ising_model(torus4, 0.15)
    cut = cut_bond_model(m, rectangular_loop(torus4, (1, 1), 2, 2))
    ref = exact_partition(m).log_partition - exact_partition(cut).log_partition
    est = free_energy_difference(m, cut, n_points=8, n_meas=20000, n_therm=2000, seed=4)
    assert abs(est.value - ref) < 4 * est.standard_error
    fep = free_energy_difference(m, cut, "fep", n_meas=40000, n_therm=2000, seed=4)
    assert abs(fep.value - ref) < 4 * fep.standard_error


def test_perturbation_refused_with_poor_overlap(torus4):
    m = ising_model(torus4, 0.3)
    cut = cut_bond_model(m, rectangular_loop(torus4, (1, 1), 2, 2))
    with pytest.raises(McError):
        free_energy_difference(m, cut, "fep", n_meas=4000, n_therm=500, min_ess=0.5)


def test_identical_models_have_zero_difference(torus4):
    m = ising_model(torus4, 0.2)
    assert free_energy_difference(m, m).value == 0.0


def test_structure_mismatch(torus4):
    with pytest.raises(McError):
        free_energy_difference(ising_model(torus4, 0.2), ising_model(torus4, 0.2, n=3))


def test_staged_locks_match_enumeration():
    lat = build_lattice(2, "open")
    m = ising_model(lat, 0.2, n=4)
    classes = [[m.var(v, f) for f in range(3)] for v in (0, 3)]
    from clusterspt.classical import merge_vars
    ref = exact_partition(merge_vars(m, classes)).log_partition - exact_partition(m).log_partition
    est = staged_lock_ratio(m, classes, n_meas=40000, n_therm=2000, seed=9)
    assert abs(est.value - ref) < 4 * est.standard_error
