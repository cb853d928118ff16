import json

import pytest

from clusterspt.lattice import (
    LatticeError, boundary_string, build_lattice, face_loop, one_form_loops, partition_disk,
    rectangular_loop,
)


@pytest.mark.parametrize("N", [2, 3, 5, 8])
def test_counts_periodic(N):
    lat = build_lattice(N)
    assert lat.n_vertices == N * N
    assert lat.n_edges == 2 * N * N
    assert lat.n_qubits == 3 * N * N
    assert all(len(inc) == 4 for inc in lat.incidence)


@pytest.mark.parametrize("N", [2, 3, 6])
def test_open_every_boundary_vertex_has_three_edges(N):
    lat = build_lattice(N, "open")
    ring = set(lat.boundary_vertices)
    assert len(ring) == 4 * (N - 1)
    for v in range(lat.n_vertices):
        expected = 3 if v in ring else 4
        assert len(lat.incidence[v]) == expected
    stubs = [e for e, k in enumerate(lat.edge_kind) if k == "stub"]
    assert len(stubs) == 4
    assert all(lat.edge_endpoints[e][1] == -1 for e in stubs)


def test_rejects_bad_sizes():
    with pytest.raises(LatticeError):
        build_lattice(1)
    with pytest.raises(LatticeError):
        build_lattice(3, "twisted")


def test_boundary_ring_is_closed_walk():
    lat = build_lattice(4, "open")
    ring = lat.boundary_vertices
    for a, b in zip(ring, ring[1:] + ring[:1]):
        ra, ca = lat.coords(a)
        rb, cb = lat.coords(b)
        assert abs(ra - rb) + abs(ca - cb) == 1


def test_boundary_string_takes_short_arc():
    lat = build_lattice(4, "open")
    s = boundary_string(lat, lat.vertex(0, 0), lat.vertex(0, 2))
    assert len(s.edges) == 2
    assert s.endpoints == (lat.vertex(0, 0), lat.vertex(0, 2))
    with pytest.raises(LatticeError):
        boundary_string(lat, 0, 0)
    with pytest.raises(LatticeError):
        boundary_string(build_lattice(4), 0, 1)


@pytest.mark.parametrize("w,h", [(1, 1), (2, 3), (6, 6)])
def test_rectangular_loop_crosses_perimeter_bonds(w, h):
    lat = build_lattice(10)
    loop = rectangular_loop(lat, (2, 2), w, h)
    assert len(loop.edges) == 2 * (w + h)
    inside = set(loop.vertices)
    for e in loop.edges:
        a, b = lat.edge_endpoints[e]
        assert (a in inside) != (b in inside)


def test_rectangular_loop_rejects_wrapping():
    lat = build_lattice(4)
    with pytest.raises(LatticeError):
        rectangular_loop(lat, (0, 0), 4, 1)


def test_one_form_loops_are_cycles():
    lat = build_lattice(3)
    for loop in one_form_loops(lat):
        deg = {}
        for e in loop.edges:
            for v in lat.edge_endpoints[e]:
                deg[v] = deg.get(v, 0) + 1
        assert all(d % 2 == 0 for d in deg.values())
    assert len(face_loop(lat, 0, 0).edges) == 4


def test_partition_disk_counts_cut_bonds():
    lat = build_lattice(10, "open")
    part = partition_disk(lat, (3, 7))
    assert part.l1 == part.l2 == 10
    labels = set(part.assignment)
    assert labels == {"L", "M", "R"}
    assert part.qubits("LMR") == frozenset(range(lat.n_qubits))


def test_partition_disk_rejects_touching_regions():
    lat = build_lattice(6, "open")
    with pytest.raises(LatticeError):
        partition_disk(lat, {"cuts": (2, 3), "margin": 2})
    with pytest.raises(LatticeError):
        partition_disk(build_lattice(6), (2, 4))


def test_serialization_round_trip():
    lat = build_lattice(3, "open")
    d = json.loads(lat.to_json())
    assert d["N"] == 3
    assert len(d["edges"]) == lat.n_edges
