"""Cluster state on the Lieb lattice and its decohered Pauli expansion.

The stabilizer state is ``prod_v (1+A_v)/2 prod_e (1+B_e)/2``.  Expanding the
products gives one term per domain-wall configuration ``S`` (a subset of
vertices carrying ``tau^x``; ``sigma^z`` sits on every edge with an odd number
of endpoints in ``S``) times one term per gauge configuration ``G`` (a subset
of edges carrying ``sigma^x``; ``tau^z`` sits on every vertex surrounded by an
odd number of them).  Every term has coefficient ``2**-n_qubits``.

Pauli channels only rescale terms, so a decohered state is stored as two
per-qubit damping arrays: ``damp_x[q] = 1 - 2 p_x(q)`` multiplies every term
with a Z or Y on ``q``; ``damp_z[q] = 1 - 2 p_z(q)`` every term with an X or Y.

On an open lattice the boundary generators ``pi^x_u`` coincide with the
three-edge vertex generators ``A_u``, so the same expansion covers both
boundary conditions and ``tr rho = 1`` fixes the normalization.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .lattice import LiebLattice, boundary_string
from .pauli import PauliString, apply_left, dense_from_terms, multiply

ENUM_BUDGET = 24  # bits per enumerated sub-lattice


def stabilizer_generators(lattice: LiebLattice) -> list[PauliString]:
    """``A_v`` for every vertex followed by ``B_e`` for every edge."""
    n, nv = lattice.n_qubits, lattice.n_vertices
    gens = []
    for v in range(nv):
        z = 0
        for e in lattice.incidence[v]:
            z ^= 1 << (nv + e)
        gens.append(PauliString(n, 1 << v, z))
    for e, (a, b) in enumerate(lattice.edge_endpoints):
        z = 1 << a
        if b >= 0:
            z ^= 1 << b
        gens.append(PauliString(n, 1 << (nv + e), z))
    return gens


def boundary_pi(lattice: LiebLattice, u: int) -> tuple[PauliString, PauliString, PauliString]:
    """Boundary spin operators ``(pi^x, pi^y, pi^z)`` at boundary vertex ``u``."""
    if u not in lattice.boundary_vertices:
        raise ValueError(f"{u} is not a boundary vertex")
    n, nv = lattice.n_qubits, lattice.n_vertices
    z = 0
    for e in lattice.incidence[u]:
        z ^= 1 << (nv + e)
    px = PauliString(n, 1 << u, z)
    py = PauliString(n, 1 << u, z | (1 << u))
    pz = PauliString(n, 0, 1 << u)
    return px, py, pz


def string_operator(lattice: LiebLattice, path) -> PauliString:
    """``prod_{e in path} sigma^x_e``."""
    x = 0
    for e in path.edges:
        x ^= 1 << (lattice.n_vertices + e)
    return PauliString(lattice.n_qubits, x, 0)


def loop_z_operator(lattice: LiebLattice, loop) -> PauliString:
    """``prod_{e in loop} sigma^z_e``."""
    z = 0
    for e in loop.edges:
        z ^= 1 << (lattice.n_vertices + e)
    return PauliString(lattice.n_qubits, 0, z)


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class PauliExpansion:
    lattice: LiebLattice
    damp_x: np.ndarray = field(repr=False)
    damp_z: np.ndarray = field(repr=False)
    flipped: frozenset = frozenset()  # vertices whose domain-wall sign is attached

    @property
    def n_qubits(self) -> int:
        return self.lattice.n_qubits

    @property
    def log2_norm(self) -> int:
        return -self.n_qubits

    @property
    def is_pure(self) -> bool:
        return bool(np.all(self.damp_x == 1) and np.all(self.damp_z == 1))

    def rescaled(self, fx=None, fz=None) -> "PauliExpansion":
        dx = self.damp_x if fx is None else self.damp_x * fx
        dz = self.damp_z if fz is None else self.damp_z * fz
        return replace(self, damp_x=_frozen(dx), damp_z=_frozen(dz))

    # -- single configurations -------------------------------------------
    def wall_mask(self, S: int) -> int:
        """Edges (bit e) carrying ``sigma^z`` in domain-wall configuration ``S``."""
        m = 0
        for e, (a, b) in enumerate(self.lattice.edge_endpoints):
            par = (S >> a & 1) ^ ((S >> b & 1) if b >= 0 else 0)
            m |= par << e
        return m

    def flux_mask(self, G: int) -> int:
        """Vertices (bit v) carrying ``tau^z`` in gauge configuration ``G``."""
        m = 0
        for v, em in enumerate(self.lattice.vertex_edge_masks):
            m |= (bin(G & em).count("1") & 1) << v
        return m

    def dw_term(self, S: int) -> PauliString:
        nv = self.lattice.n_vertices
        return PauliString(self.n_qubits, S, self.wall_mask(S) << nv)

    def ga_term(self, G: int) -> PauliString:
        nv = self.lattice.n_vertices
        return PauliString(self.n_qubits, G << nv, self.flux_mask(G))

    def dw_sign(self, S: int) -> int:
        return -1 if sum(S >> v & 1 for v in self.flipped) % 2 else 1

    def dw_weight(self, S: int) -> float:
        nv = self.lattice.n_vertices
        w = 1.0
        wall = self.wall_mask(S)
        for e in range(self.lattice.n_edges):
            if wall >> e & 1:
                w *= self.damp_x[nv + e]
        for v in range(nv):
            if S >> v & 1:
                w *= self.damp_z[v]
        return w * self.dw_sign(S)

    def ga_weight(self, G: int) -> float:
        nv = self.lattice.n_vertices
        w = 1.0
        flux = self.flux_mask(G)
        for v in range(nv):
            if flux >> v & 1:
                w *= self.damp_x[v]
        for e in range(self.lattice.n_edges):
            if G >> e & 1:
                w *= self.damp_z[nv + e]
        return w

    # -- vectorized tables -------------------------------------------------
    def dw_configs(self) -> np.ndarray:
        nv = self.lattice.n_vertices
        if nv > ENUM_BUDGET:
            raise ValueError(f"{nv} vertices exceed the enumeration budget")
        return np.arange(1 << nv, dtype=np.uint64)

    def ga_configs(self) -> np.ndarray:
        ne = self.lattice.n_edges
        if ne > ENUM_BUDGET:
            raise ValueError(f"{ne} edges exceed the enumeration budget")
        return np.arange(1 << ne, dtype=np.uint64)

    def wall_bits(self, S: np.ndarray) -> np.ndarray:
        """Boolean ``(len(S), n_edges)`` wall indicator."""
        masks = self.lattice.edge_vertex_masks
        return (np.bitwise_count(S[:, None] & masks[None, :]) & 1).astype(bool)

    def flux_bits(self, G: np.ndarray) -> np.ndarray:
        masks = np.array(self.lattice.vertex_edge_masks, dtype=np.uint64)
        return (np.bitwise_count(G[:, None] & masks[None, :]) & 1).astype(bool)

    def dw_weights(self, signed: bool = True) -> np.ndarray:
        """Weights of all ``2**n_vertices`` domain-wall terms, indexed by ``S``."""
        S = self.dw_configs()
        nv = self.lattice.n_vertices
        walls = self.wall_bits(S)
        w = np.where(walls, self.damp_x[nv:][None, :], 1.0).prod(axis=1)
        sbits = ((S[:, None] >> np.arange(nv, dtype=np.uint64)[None, :]) & 1).astype(bool)
        w = w * np.where(sbits, self.damp_z[:nv][None, :], 1.0).prod(axis=1)
        if signed and self.flipped:
            fm = np.uint64(sum(1 << v for v in self.flipped))
            w = w * np.where(np.bitwise_count(S & fm) & 1, -1.0, 1.0)
        return w

    def ga_weights(self) -> np.ndarray:
        G = self.ga_configs()
        nv, ne = self.lattice.n_vertices, self.lattice.n_edges
        flux = self.flux_bits(G)
        w = np.where(flux, self.damp_x[:nv][None, :], 1.0).prod(axis=1)
        gbits = ((G[:, None] >> np.arange(ne, dtype=np.uint64)[None, :]) & 1).astype(bool)
        return w * np.where(gbits, self.damp_z[nv:][None, :], 1.0).prod(axis=1)

    # -- traces ------------------------------------------------------------
    def purity(self) -> float:
        """``tr rho^2 = 2**-n sum_S w_S^2 sum_G w_G^2``."""
        a = self.dw_weights()
        b = self.ga_weights()
        return 2.0 ** (-self.n_qubits) * float(np.sum(a * a)) * float(np.sum(b * b))

    def replica_sums(self, n: int) -> tuple[float, float]:
        """``sum_{S_1 ^ ... ^ S_n = 0} prod_a w(S_a)`` and the gauge analogue."""
        return xor_closed_sum([self.dw_weights()] * n), xor_closed_sum([self.ga_weights()] * n)

    def trace_power(self, n: int) -> float:
        """``tr rho^n`` from the expansion (product of the two replica sums)."""
        if n < 1:
            raise ValueError("n must be >= 1")
        ta, tb = self.replica_sums(n)
        return 2.0 ** (self.n_qubits * (1 - n)) * ta * tb

    # -- dense oracle --------------------------------------------------------
    def terms(self):
        """Yield ``(coefficient, PauliString)`` for every nonzero term."""
        wa = self.dw_weights()
        wb = self.ga_weights()
        norm = 2.0 ** (-self.n_qubits)
        ga_terms = [(G, self.ga_term(G)) for G in range(len(wb)) if wb[G] != 0]
        for S in range(len(wa)):
            if wa[S] == 0:
                continue
            pa = self.dw_term(S)
            for G, pb in ga_terms:
                yield norm * wa[S] * wb[G], multiply(pa, pb)


def pure_state_expansion(lattice: LiebLattice) -> PauliExpansion:
    n = lattice.n_qubits
    return PauliExpansion(lattice, _frozen(np.ones(n)), _frozen(np.ones(n)))


def boundary_flip_state(expansion: PauliExpansion, u: int, u2: int) -> PauliExpansion:
    """Expansion of ``S_{u,u'} rho S_{u,u'}``.

    Conjugating by the string flips the sign of every domain-wall term whose
    wall the string crosses an odd number of times, which is ``s_u s_{u'}``;
    gauge terms commute with the string.
    """
    lat = expansion.lattice
    if lat.periodic:
        raise ValueError("boundary flips need an open lattice")
    boundary_string(lat, u, u2)  # validates the endpoints
    return replace(expansion, flipped=expansion.flipped ^ frozenset((u, u2)))


def dense_density_matrix(expansion: PauliExpansion) -> np.ndarray:
    """Dense ``2**n x 2**n`` matrix assembled from the expansion (real)."""
    return dense_from_terms(expansion.n_qubits, expansion.terms(), real=True)


def projector_state_dense(lattice: LiebLattice) -> np.ndarray:
    """Independent oracle: the product of ``(1 + g)/2`` over all generators."""
    n = lattice.n_qubits
    dim = 1 << n
    rho = np.eye(dim)
    for g in stabilizer_generators(lattice):
        rho = 0.5 * (rho + apply_left(g, rho).real)
    return rho


def product_state_expectation(p: PauliString, x_plus_mask: int, z_plus_mask: int) -> complex:
    """``<Omega|P|Omega>`` for qubits in ``x_plus_mask`` prepared in ``|+>`` and
    qubits in ``z_plus_mask`` in the ``sigma^z = +1`` state."""
    if p.z & x_plus_mask or p.x & z_plus_mask:
        return 0.0
    return p.coefficient


def fwht(a: np.ndarray, dtype=float) -> np.ndarray:
    """Unnormalized Walsh-Hadamard transform along the last axis."""
    a = np.array(a, dtype=dtype, copy=True)
    n = a.shape[-1]
    if n & (n - 1):
        raise ValueError("length must be a power of two")
    h = 1
    lead = a.shape[:-1]
    while h < n:
        a = a.reshape(*lead, n // (2 * h), 2, h)
        x, y = a[..., 0, :].copy(), a[..., 1, :].copy()
        a[..., 0, :] = x + y
        a[..., 1, :] = x - y
        a = a.reshape(*lead, n)
        h *= 2
    return a


def xor_closed_sum(funcs, dtype=float):
    """``sum over x_1 ^ ... ^ x_k = 0 of prod_a f_a(x_a)`` via Walsh-Hadamard.

    With ``dtype=np.longdouble`` the result keeps extended precision, which
    matters when two such sums are compared near equality.
    """
    funcs = list(funcs)
    size = len(funcs[0])
    prod = np.ones(size, dtype=dtype)
    for f in funcs:
        prod = prod * fwht(f, dtype)
    total = np.sum(prod) / size
    return float(total) if dtype is float else total
