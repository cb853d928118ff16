import math

import numpy as np
import pytest

from clusterspt.channels import ChannelSpec, apply_channels
from clusterspt.cluster_state import pure_state_expansion
from clusterspt.diagnostics import (
    DiagnosticError, DiagnosticsReport, correlation_length, fit_area_law, fit_slope, lock_rank,
    phase_call, relative_entropy, renyi_negativity, strange_correlator, strange_correlator_quantum,
    tripartite_negativity,
)
from clusterspt.lattice import build_lattice, partition_disk, rectangular_loop


@pytest.mark.parametrize("p", [0.05, 0.3])
@pytest.mark.parametrize("n", [2, 3])
def test_relative_entropy_routes_agree(disk2, decohere, p, n):
    st = decohere(disk2, p, 0.1, "B", "A")
    a = relative_entropy(st, 0, 3, n, "expansion").value
    b = relative_entropy(st, 0, 3, n, "classical").value
    assert a == pytest.approx(b, rel=1e-10)
    assert a > 0


def test_relative_entropy_dense_route(disk2, decohere):
    st = decohere(disk2, 0.2, 0.0)
    assert relative_entropy(st, 0, 1, 2, "dense").value == pytest.approx(
        relative_entropy(st, 0, 1, 2, "expansion").value, rel=1e-10)


def test_relative_entropy_diverges_for_pure_state(disk2):
    v = relative_entropy(pure_state_expansion(disk2), 0, 3, 2, "expansion")
    assert math.isinf(v.value) and v.flags["divergent"]


def test_relative_entropy_same_endpoint(disk2, decohere):
    assert relative_entropy(decohere(disk2, 0.1, 0.0), 2, 2).value == 0.0


def test_relative_entropy_rejects_torus_and_n1(torus2, disk2, decohere):
    with pytest.raises(DiagnosticError):
        relative_entropy(decohere(torus2, 0.1, 0.0), 0, 1)
    with pytest.raises(DiagnosticError):
        relative_entropy(decohere(disk2, 0.1, 0.0), 0, 1, 1, "expansion")


def test_relative_entropy_grows_with_separation():
    lat = build_lattice(4, "open")
    st = apply_channels(pure_state_expansion(lat), [ChannelSpec("x", 0.05, "B")])
    d = [relative_entropy(st, 0, k, 2, "classical").value for k in (1, 2, 3)]
    assert d[0] < d[1] < d[2]


def test_strange_correlator_pure_state(torus4):
    loop = rectangular_loop(torus4, (1, 1), 2, 2)
    assert strange_correlator(torus4, 0.0, loop).value == 1.0
    assert strange_correlator_quantum(pure_state_expansion(torus4), loop).value == pytest.approx(1.0)


def test_strange_correlator_decays_with_loop_size():
    lat = build_lattice(8)
    c = [strange_correlator(lat, 0.3, rectangular_loop(lat, (2, 2), w, w)).flags["log"] for w in (1, 2, 3)]
    assert 0 > c[0] > c[1] > c[2]


def test_strange_correlator_needs_dual_loop(torus4):
    with pytest.raises(DiagnosticError):
        strange_correlator(build_lattice(4, "open"), 0.1, rectangular_loop(torus4, (1, 1), 2, 2))


@pytest.mark.parametrize("region", [(0, 3, 4, 7, 10), (1, 2, 3, 9, 11)])
def test_negativity_routes_agree(disk2, decohere, region):
    st = decohere(disk2, 0.12, 0.1, "B", "A")
    ex = renyi_negativity(st, region, 4, "exact").value
    assert ex == pytest.approx(renyi_negativity(st, region, 4, "classical").value, rel=1e-10)
    assert ex == pytest.approx(renyi_negativity(st, region, 4, "dense").value, rel=1e-9)


def test_negativity_closed_form_at_zero_rate(disk2):
    st = pure_state_expansion(disk2)
    for region in [(0, 3, 4, 7, 10), (0, 1, 4, 5, 6, 8)]:
        z = renyi_negativity(st, region, 4, "zero").value
        assert z == pytest.approx(renyi_negativity(st, region, 4, "exact").value, abs=1e-12)
        assert z == pytest.approx(-2 * lock_rank(disk2, region) * math.log(2))


def test_negativity_trivial_regions(disk2, decohere):
    st = decohere(disk2, 0.1, 0.0, "B", "A")
    assert renyi_negativity(st, [], 4).value == 0.0
    assert renyi_negativity(st, range(disk2.n_qubits), 4).value == 0.0


@pytest.mark.parametrize("order", [1, 3, 5])
def test_negativity_rejects_odd_order(disk2, order):
    with pytest.raises(DiagnosticError):
        renyi_negativity(pure_state_expansion(disk2), [0], order)


def test_classical_negativity_needs_error_free_sublattices(disk2, decohere):
    with pytest.raises(DiagnosticError):
        renyi_negativity(decohere(disk2, 0.1, 0.0), [0, 4], 4, "classical")


def test_tripartite_combination():
    lat = build_lattice(6, "open")
    part = partition_disk(lat, (2, 4))
    v = tripartite_negativity(pure_state_expansion(lat), part, 4, "zero", xi=0.0)
    assert v.value == pytest.approx(v.flags["LM"] + v.flags["MR"] - v.flags["M"] - v.flags["LMR"])
    assert v.flags["unreliable"] is False
    assert v.value / (2 * math.log(2)) == pytest.approx(round(v.value / (2 * math.log(2))))


def test_fit_area_law_recovers_slope(rng):
    l = np.arange(4, 16)
    c, b, res = fit_area_law(l, 0.7 * l + 0.3 + 1e-3 * rng.standard_normal(len(l)))
    assert c == pytest.approx(0.7, abs=1e-2) and res < 5e-3
    with pytest.raises(DiagnosticError):
        fit_area_law([3], [1.0])


def test_fit_slope_weighted():
    s, e = fit_slope([1, 2, 3, 4], [2.0, 4.0, 6.0, 8.0], [0.1] * 4)
    assert s == pytest.approx(2.0) and e > 0


def test_correlation_length_monotone():
    xi = [correlation_length(p) for p in (0.05, 0.1, 0.15)]
    assert correlation_length(0.0) == 0.0
    assert xi[0] < xi[1] < xi[2]


def _report(p, re_rows=(), sc_rows=(), neg=None):
    return DiagnosticsReport(p, 0.0, {"N": 4}, list(re_rows), list(sc_rows), neg or {})


def test_phase_call_cases():
    linear = [(d, 0.4 * d, 0.01) for d in (1, 2, 3, 4)]
    flat = [(d, 1.0 + 0.001 * d, 0.01) for d in (1, 2, 3, 4)]
    assert phase_call(_report(0.05, linear, neg={"N": (math.log(2), 0.01)})) == "SPT"
    steep = [(g, 0, -1.0 * g, 0.01) for g in (4, 8, 12)]
    assert phase_call(_report(0.3, flat, steep, {"N": (0.0, 0.01)})) == "trivial"
    assert phase_call(_report(0.178, linear)) == "near-critical"
    assert phase_call(_report(0.3)) == "near-critical"


def test_report_serialisation():
    rep = _report(0.1, [(1, 0.2, 0.0)], [(4, 0.9, -0.1, 0.0)], {"N": (0.5, 0.1)})
    rep.phase = "SPT"
    text = rep.to_csv()
    assert text.splitlines()[0] == "diagnostic,p_x,p_z,key,value,error,provenance"
    assert len(text.splitlines()) == 5
    assert '"phase": "SPT"' in rep.to_json()
