"""Edge-decorated square (Lieb) lattice geometry.

Indexing is fixed so that golden files stay stable:

* vertices (sub-lattice A) are row-major, ``v = r * N + c``;
* edges (sub-lattice B) come next: horizontal edges, then vertical edges,
  then (open boundary only) the four corner stubs;
* qubit ``q`` is vertex ``q`` for ``q < n_vertices`` and edge
  ``q - n_vertices`` otherwise.

Periodic lattices have ``N**2`` vertices and ``2 N**2`` edges.  Open lattices
keep the ``2 N (N - 1)`` interior edges and attach one dangling stub edge to
each corner, so every vertex on the outer ring has exactly three incident
edges.  A stub has a single endpoint; its second endpoint is stored as ``-1``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property

import numpy as np

PERIODIC = "periodic"
OPEN = "open"


class LatticeError(ValueError):
    pass


@dataclass(frozen=True)
class EdgePath:
    """Ordered list of B-edges.

    Open paths run along primal edges from ``endpoints[0]`` to
    ``endpoints[1]``.  Closed loops produced by :func:`rectangular_loop` are
    dual loops: the ring of B-sites surrounding a block of vertices, which is
    also the set of Ising bonds the loop crosses.
    """

    edges: tuple[int, ...]
    closed: bool
    endpoints: tuple[int, int] | None = None
    vertices: tuple[int, ...] = ()
    dual: bool = False

    @property
    def edge_set(self) -> frozenset[int]:
        return frozenset(self.edges)

    def __len__(self) -> int:
        return len(self.edges)


@dataclass(frozen=True)
class LiebLattice:
    N: int
    boundary_kind: str
    edge_endpoints: tuple[tuple[int, int], ...]
    edge_kind: tuple[str, ...]  # "h", "v" or "stub"
    edge_cell: tuple[tuple[int, int], ...]

    @property
    def n_vertices(self) -> int:
        return self.N * self.N

    @property
    def n_edges(self) -> int:
        return len(self.edge_endpoints)

    @property
    def n_qubits(self) -> int:
        return self.n_vertices + self.n_edges

    @property
    def periodic(self) -> bool:
        return self.boundary_kind == PERIODIC

    def vertex(self, r: int, c: int) -> int:
        if self.periodic:
            r, c = r % self.N, c % self.N
        elif not (0 <= r < self.N and 0 <= c < self.N):
            raise LatticeError(f"vertex ({r}, {c}) outside open lattice")
        return r * self.N + c

    def coords(self, v: int) -> tuple[int, int]:
        return divmod(v, self.N)

    def vertex_qubit(self, v: int) -> int:
        return v

    def edge_qubit(self, e: int) -> int:
        return self.n_vertices + e

    def h_edge(self, r: int, c: int) -> int:
        N = self.N
        if self.periodic:
            return (r % N) * N + (c % N)
        if not (0 <= r < N and 0 <= c < N - 1):
            raise LatticeError(f"no horizontal edge at ({r}, {c})")
        return r * (N - 1) + c

    def v_edge(self, r: int, c: int) -> int:
        N = self.N
        if self.periodic:
            return N * N + (r % N) * N + (c % N)
        if not (0 <= r < N - 1 and 0 <= c < N):
            raise LatticeError(f"no vertical edge at ({r}, {c})")
        return N * (N - 1) + r * N + c

    @cached_property
    def incidence(self) -> tuple[tuple[int, ...], ...]:
        inc: list[list[int]] = [[] for _ in range(self.n_vertices)]
        for e, (a, b) in enumerate(self.edge_endpoints):
            inc[a].append(e)
            if b >= 0:
                inc[b].append(e)
        return tuple(tuple(x) for x in inc)

    @cached_property
    def boundary_vertices(self) -> tuple[int, ...]:
        """Outer ring, clockwise from the top-left corner (empty for PBC)."""
        if self.periodic:
            return ()
        N = self.N
        ring = [(0, c) for c in range(N)]
        ring += [(r, N - 1) for r in range(1, N)]
        ring += [(N - 1, c) for c in range(N - 2, -1, -1)]
        ring += [(r, 0) for r in range(N - 2, 0, -1)]
        return tuple(self.vertex(r, c) for r, c in ring)

    @cached_property
    def interior_edges(self) -> tuple[int, ...]:
        return tuple(e for e, (_, b) in enumerate(self.edge_endpoints) if b >= 0)

    def edge_between(self, a: int, b: int) -> int:
        for e in self.incidence[a]:
            x, y = self.edge_endpoints[e]
            if {x, y} == {a, b}:
                return e
        raise LatticeError(f"vertices {a} and {b} are not adjacent")

    # bit masks over A (vertex) indices, used by the enumeration engines
    @cached_property
    def edge_vertex_masks(self) -> np.ndarray:
        out = np.zeros(self.n_edges, dtype=np.uint64)
        for e, (a, b) in enumerate(self.edge_endpoints):
            m = 1 << a
            if b >= 0:
                m ^= 1 << b
            out[e] = m
        return out

    @cached_property
    def vertex_edge_masks(self) -> list[int]:
        # python ints: there may be more than 64 edges
        out = []
        for v in range(self.n_vertices):
            m = 0
            for e in self.incidence[v]:
                m ^= 1 << e
            out.append(m)
        return out

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "boundary_kind": self.boundary_kind,
            "n_vertices": self.n_vertices,
            "n_edges": self.n_edges,
            "edges": [
                {"index": e, "kind": k, "cell": list(cell), "endpoints": list(ep)}
                for e, (ep, k, cell) in enumerate(
                    zip(self.edge_endpoints, self.edge_kind, self.edge_cell))
            ],
            "incidence": [list(x) for x in self.incidence],
            "boundary_vertices": list(self.boundary_vertices),
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def build_lattice(N: int, boundary_kind: str = PERIODIC) -> LiebLattice:
    if int(N) != N or N < 2:
        raise LatticeError("N must be an integer >= 2")
    if boundary_kind not in (PERIODIC, OPEN):
        raise LatticeError(f"unknown boundary kind {boundary_kind!r}")
    N = int(N)
    endpoints: list[tuple[int, int]] = []
    kinds: list[str] = []
    cells: list[tuple[int, int]] = []
    if boundary_kind == PERIODIC:
        for r in range(N):
            for c in range(N):
                endpoints.append((r * N + c, r * N + (c + 1) % N))
                kinds.append("h")
                cells.append((r, c))
        for r in range(N):
            for c in range(N):
                endpoints.append((r * N + c, ((r + 1) % N) * N + c))
                kinds.append("v")
                cells.append((r, c))
    else:
        for r in range(N):
            for c in range(N - 1):
                endpoints.append((r * N + c, r * N + c + 1))
                kinds.append("h")
                cells.append((r, c))
        for r in range(N - 1):
            for c in range(N):
                endpoints.append((r * N + c, (r + 1) * N + c))
                kinds.append("v")
                cells.append((r, c))
        for r, c in ((0, 0), (0, N - 1), (N - 1, N - 1), (N - 1, 0)):
            endpoints.append((r * N + c, -1))
            kinds.append("stub")
            cells.append((r, c))
    return LiebLattice(N, boundary_kind, tuple(endpoints), tuple(kinds), tuple(cells))


def boundary_string(lattice: LiebLattice, u: int, u2: int) -> EdgePath:
    """Canonical string of B-edges joining two boundary vertices.

    Runs along the outer ring on the shorter arc; equal arcs are broken by the
    lexicographically smaller sorted edge list.
    """
    if lattice.periodic:
        raise LatticeError("boundary strings need an open lattice")
    ring = lattice.boundary_vertices
    if u == u2:
        raise LatticeError("boundary string endpoints must differ")
    if u not in ring or u2 not in ring:
        raise LatticeError("endpoints must be boundary vertices")
    i, j = ring.index(u), ring.index(u2)
    L = len(ring)
    fwd = [ring[(i + k) % L] for k in range((j - i) % L + 1)]
    bwd = [ring[(i - k) % L] for k in range((i - j) % L + 1)]

    def edges_of(vs):
        return [lattice.edge_between(a, b) for a, b in zip(vs, vs[1:])]

    candidates = [(len(vs), sorted(edges_of(vs)), vs) for vs in (fwd, bwd)]
    candidates.sort(key=lambda t: (t[0], t[1]))
    vs = candidates[0][2]
    # the path is stored in canonical orientation so (u, u') and (u', u) agree
    if vs[0] > vs[-1]:
        vs = vs[::-1]
    return EdgePath(tuple(edges_of(vs)), False, (vs[0], vs[-1]), tuple(vs))


def vertex_path(lattice: LiebLattice, vertices: list[int]) -> EdgePath:
    """String along an explicit vertex sequence (for non-canonical paths)."""
    edges = tuple(lattice.edge_between(a, b) for a, b in zip(vertices, vertices[1:]))
    if len(set(edges)) != len(edges):
        raise LatticeError("path reuses an edge")
    return EdgePath(edges, False, (vertices[0], vertices[-1]), tuple(vertices))


def block_vertices(lattice: LiebLattice, anchor: tuple[int, int], width: int, height: int) -> list[int]:
    r0, c0 = anchor
    return [lattice.vertex(r0 + dr, c0 + dc) for dr in range(height) for dc in range(width)]


def rectangular_loop(lattice: LiebLattice, anchor: tuple[int, int], width: int, height: int) -> EdgePath:
    """Dual loop around a ``height x width`` block of vertices.

    The loop's B-sites are exactly the ``2 (width + height)`` Ising bonds
    joining the block to its outside.  ``anchor`` is the block's top-left
    vertex ``(row, col)``.
    """
    if not lattice.periodic:
        raise LatticeError("rectangular loops are defined on periodic lattices")
    N = lattice.N
    if width < 1 or height < 1:
        raise LatticeError("loop must enclose at least one vertex")
    if width >= N or height >= N:
        raise LatticeError("loop does not fit: wrapping loops are non-contractible")
    r0, c0 = anchor
    top = [lattice.v_edge(r0 - 1, c0 + k) for k in range(width)]
    right = [lattice.h_edge(r0 + k, c0 + width - 1) for k in range(height)]
    bottom = [lattice.v_edge(r0 + height - 1, c0 + k) for k in reversed(range(width))]
    left = [lattice.h_edge(r0 + k, c0 - 1) for k in reversed(range(height))]
    edges = tuple(top + right + bottom + left)
    if len(set(edges)) != len(edges):
        raise LatticeError("loop overlaps itself")
    return EdgePath(edges, True, None, tuple(block_vertices(lattice, anchor, width, height)), dual=True)


def face_loop(lattice: LiebLattice, r: int, c: int) -> EdgePath:
    """Primal cycle of the four edges around face (r, c); a one-form generator."""
    vs = [lattice.vertex(r, c), lattice.vertex(r, c + 1),
          lattice.vertex(r + 1, c + 1), lattice.vertex(r + 1, c), lattice.vertex(r, c)]
    edges = (lattice.h_edge(r, c), lattice.v_edge(r, c + 1),
             lattice.h_edge(r + 1, c), lattice.v_edge(r, c))
    return EdgePath(edges, True, None, tuple(vs))


def one_form_loops(lattice: LiebLattice) -> list[EdgePath]:
    """Basis of closed primal cycles: every face, plus the two windings (PBC)."""
    N = lattice.N
    faces = range(N) if lattice.periodic else range(N - 1)
    loops = [face_loop(lattice, r, c) for r in faces for c in faces]
    if lattice.periodic:
        loops.append(EdgePath(tuple(lattice.h_edge(0, c) for c in range(N)), True))
        loops.append(EdgePath(tuple(lattice.v_edge(r, 0) for r in range(N)), True))
    return loops


@dataclass(frozen=True)
class RegionPartition:
    """Assignment of every qubit to ``"L"``, ``"M"`` or ``"R"``.

    ``l1`` / ``l2`` count the interior bonds joining L-M / M-R vertices.  Stub
    edges live on the outer boundary and never count.
    """

    lattice: LiebLattice
    assignment: tuple[str, ...]
    l1: int
    l2: int
    cuts: tuple[int, int] = (0, 0)
    axis: str = "col"

    def qubits(self, labels: str) -> frozenset[int]:
        return frozenset(q for q, a in enumerate(self.assignment) if a in labels)

    def mask(self, labels: str) -> int:
        return sum(1 << q for q in self.qubits(labels))

    def vertices(self, labels: str) -> list[int]:
        return [v for v in range(self.lattice.n_vertices) if self.assignment[v] in labels]

    def edges(self, labels: str) -> list[int]:
        nv = self.lattice.n_vertices
        return [e for e in range(self.lattice.n_edges) if self.assignment[nv + e] in labels]


def partition_disk(lattice: LiebLattice, cut_spec, margin: int = 1) -> RegionPartition:
    """Three-band partition of an open lattice.

    ``cut_spec`` is ``(a, b)`` or ``{"cuts": (a, b), "axis": "col" | "row"}``:
    vertices with coordinate ``< a`` go to L, ``a <= x < b`` to M and
    ``>= b`` to R.  An edge follows its first (upper/left) endpoint.
    """
    if lattice.periodic:
        raise LatticeError("disk partitions need an open lattice")
    if isinstance(cut_spec, dict):
        a, b = cut_spec["cuts"]
        axis = cut_spec.get("axis", "col")
        margin = cut_spec.get("margin", margin)
    else:
        a, b = cut_spec
        axis = "col"
    N = lattice.N
    if axis not in ("col", "row"):
        raise LatticeError("axis must be 'col' or 'row'")
    if not (0 < a < b < N):
        raise LatticeError("cuts must satisfy 0 < a < b < N")
    if b - a < max(margin, 1):
        raise LatticeError("L and R are too close: M narrower than the margin")

    def label(v):
        r, c = lattice.coords(v)
        x = c if axis == "col" else r
        return "L" if x < a else ("M" if x < b else "R")

    assign = [label(v) for v in range(lattice.n_vertices)]
    assign += [assign[ep[0]] for ep in lattice.edge_endpoints]
    l1 = l2 = 0
    for x, y in lattice.edge_endpoints:
        if y < 0:
            continue
        pair = {assign[x], assign[y]}
        if pair == {"L", "M"}:
            l1 += 1
        elif pair == {"M", "R"}:
            l2 += 1
        elif pair == {"L", "R"}:
            raise LatticeError("L and R share a bond")
    return RegionPartition(lattice, tuple(assign), l1, l2, (a, b), axis)
