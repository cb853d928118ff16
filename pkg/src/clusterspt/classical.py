"""Classical spin models obtained from the decohered cluster state.

Every model is a list of multi-spin terms: a term ``(K, vars)`` contributes
``-K * prod(sigma[vars])`` to the energy, and configurations are weighted by
``exp(-H)``.  Ordinary bonds, fields, gauge plaquettes and the all-flavor
product couplings of the replica models are all terms of this one kind.

Replica variables are laid out flavor-major: ``var = flavor * n_sites + site``.
Spins use ``sigma = +1`` for "identity" (no ``tau^x`` / no ``sigma^x``), so a
domain wall on an edge costs ``J`` and ``tr rho^n`` reduces to the replica
partition function times the explicit constant ``exp(log_prefactor)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .lattice import LiebLattice

EXACT_BUDGET = 25
_CHUNK_BITS = 20


class ModelError(ValueError):
    pass


def couplings_from_errors(p_x: float, p_z: float = 0.0) -> tuple[float, float, float, float]:
    """``(J, h, U, t)`` with ``J = U = -ln(1 - 2 p_x)`` and ``h = t = -ln(1 - 2 p_z)``."""
    for p in (p_x, p_z):
        if not 0.0 <= p < 0.5:
            raise ModelError(f"error rate {p} outside [0, 1/2)")
    J = -math.log1p(-2.0 * p_x)
    h = -math.log1p(-2.0 * p_z)
    return J, h, J, h


def rate_from_coupling(J: float) -> float:
    return 0.5 * (1.0 - math.exp(-J))


ISING_JC = 0.5 * math.log(1.0 + math.sqrt(2.0))
P_C2 = (1.0 - math.sqrt(math.sqrt(2.0) - 1.0)) / 2.0
P_CINF = (2.0 - math.sqrt(2.0)) / 2.0


@dataclass(frozen=True)
class SpinModel:
    n_sites: int
    flavors: int
    K: np.ndarray = field(repr=False)
    term_vars: tuple[tuple[int, ...], ...] = field(repr=False)
    tags: tuple[tuple, ...] = field(repr=False)
    log_prefactor: float = 0.0
    kind: str = "ising"
    # original var -> model var; identity unless spins were merged
    var_map: tuple[int, ...] = ()
    # products of model vars that must equal +1 (exact enumeration only)
    parity_constraints: tuple[tuple[int, ...], ...] = ()
    grid: tuple | None = None  # (rows, cols, periodic) when sites form a grid
    boundary_kind: str = "periodic"

    @property
    def n_original(self) -> int:
        return self.n_sites * self.flavors

    @property
    def n_vars(self) -> int:
        return (max(self.var_map) + 1) if self.var_map else self.n_original

    def var(self, site: int, flavor: int = 0) -> int:
        i = flavor * self.n_sites + site
        return self.var_map[i] if self.var_map else i

    @property
    def is_pairwise(self) -> bool:
        return all(len(v) == 2 for v, k in zip(self.term_vars, self.K) if k != 0)

    @property
    def has_field(self) -> bool:
        return any(len(v) % 2 == 1 and k != 0 for v, k in zip(self.term_vars, self.K))

    def energy(self, sigma: np.ndarray) -> float:
        sigma = np.asarray(sigma)
        return -float(sum(k * np.prod(sigma[list(v)]) for k, v in zip(self.K, self.term_vars)))

    def magnetization_weights(self, flavor: int = 0) -> np.ndarray:
        """Per-variable weight so that ``m = w @ sigma`` is the mean flavor spin."""
        w = np.zeros(self.n_vars)
        for s in range(self.n_sites):
            w[self.var(s, flavor)] += 1.0 / self.n_sites
        return w

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "n_sites": self.n_sites,
            "flavors": self.flavors,
            "n_vars": self.n_vars,
            "log_prefactor": self.log_prefactor,
            "boundary_kind": self.boundary_kind,
            "grid": list(self.grid) if self.grid else None,
            "terms": [{"K": float(k), "vars": list(v), "tag": list(t)}
                      for k, v, t in zip(self.K, self.term_vars, self.tags)],
            "var_map": list(self.var_map),
            "parity_constraints": [list(c) for c in self.parity_constraints],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SpinModel":
        terms = d["terms"]
        return cls(
            n_sites=d["n_sites"], flavors=d["flavors"],
            K=np.array([t["K"] for t in terms], dtype=float),
            term_vars=tuple(tuple(t["vars"]) for t in terms),
            tags=tuple(tuple(t["tag"]) for t in terms),
            log_prefactor=d.get("log_prefactor", 0.0), kind=d.get("kind", "ising"),
            var_map=tuple(d.get("var_map", ())),
            parity_constraints=tuple(tuple(c) for c in d.get("parity_constraints", ())),
            grid=tuple(d["grid"]) if d.get("grid") else None,
            boundary_kind=d.get("boundary_kind", "periodic"),
        )


def _replica_terms(coupling, var_groups, flavors, tag, decoupled):
    """Terms ``(c/2)(sum_a O^a + prod_a O^a)`` for one replica-coupled operator.

    ``var_groups[a]`` lists the spins whose product is ``O^a``.  With one flavor
    this is just ``c * O``.  ``decoupled`` keeps only ``(c/2) sum_a O^a``.
    """
    out = []
    if flavors == 1 and not decoupled:
        out.append((coupling, tuple(var_groups[0]), tag))
        return out
    for a in range(flavors):
        out.append((coupling / 2.0, tuple(var_groups[a]), tag + (a,)))
    if not decoupled:
        prod: dict[int, int] = {}
        for g in var_groups:
            for v in g:
                prod[v] = prod.get(v, 0) ^ 1
        out.append((coupling / 2.0, tuple(sorted(v for v, b in prod.items() if b)), tag + ("all",)))
    return out


def _assemble(n_sites, flavors, terms, log_prefactor, kind, grid, boundary_kind):
    K = np.array([t[0] for t in terms], dtype=float)
    return SpinModel(n_sites, flavors, K, tuple(t[1] for t in terms), tuple(t[2] for t in terms),
                     log_prefactor, kind, (), (), grid, boundary_kind)


def ising_model_from_couplings(lattice: LiebLattice, J_edge, h_vertex, n: int = 2,
                               decoupled: bool = False) -> SpinModel:
    """``(n-1)``-flavor Ising model on the vertex graph with per-edge ``J`` and
    per-vertex ``h`` (both the per-replica wall / spin penalties).

    Corner stubs join a vertex to a frozen ghost spin ``+1`` and so act as
    fields.  ``log_prefactor`` is ``-n (sum J + sum h) / 2``, which makes
    ``exp(log_prefactor) * Z`` equal the n-fold domain-wall replica sum.
    """
    if n < 2:
        raise ModelError("replica index n must be >= 2")
    flavors = n - 1
    S = lattice.n_vertices
    J_edge = np.asarray(J_edge, dtype=float)
    h_vertex = np.asarray(h_vertex, dtype=float)
    terms = []
    for e, (a, b) in enumerate(lattice.edge_endpoints):
        if J_edge[e] == 0:
            continue
        if b >= 0:
            groups = [(f * S + a, f * S + b) for f in range(flavors)]
            terms += _replica_terms(J_edge[e], groups, flavors, ("bond", e), decoupled)
        else:
            groups = [(f * S + a,) for f in range(flavors)]
            terms += _replica_terms(J_edge[e], groups, flavors, ("stub", e), decoupled)
    for v in range(S):
        if h_vertex[v] != 0:
            groups = [(f * S + v,) for f in range(flavors)]
            terms += _replica_terms(h_vertex[v], groups, flavors, ("field", v), decoupled)
    pref = 0.0 if decoupled else -n * (float(J_edge.sum()) + float(h_vertex.sum())) / 2.0
    grid = (lattice.N, lattice.N, lattice.periodic)
    return _assemble(S, flavors, terms, pref, "ising", grid, lattice.boundary_kind)


def ising_model(lattice: LiebLattice, p_x: float, p_z: float = 0.0, n: int = 2,
                decoupled: bool = False) -> SpinModel:
    """Replica Ising model for uniform rates.

    ``n = 2`` is the nearest-neighbour Ising model with coupling ``J`` and field
    ``h``; larger ``n`` adds flavors and the all-flavor product bond with
    coupling ``J/2``.  ``decoupled=True`` drops the product term, leaving
    ``n - 1`` independent Ising copies at coupling ``J/2``: the large-``n``
    limit used for ``p_c`` at infinite replica index.
    """
    J, h, _, _ = couplings_from_errors(p_x, p_z)
    return ising_model_from_couplings(lattice, np.full(lattice.n_edges, J),
                                      np.full(lattice.n_vertices, h), n, decoupled)


def ising_model_from_expansion(expansion, n: int = 2) -> SpinModel:
    nv = expansion.lattice.n_vertices
    with np.errstate(divide="raise"):
        J = -np.log(np.asarray(expansion.damp_x[nv:]))
        h = -np.log(np.asarray(expansion.damp_z[:nv]))
    return ising_model_from_couplings(expansion.lattice, J, h, n)


def gauge_model_from_couplings(lattice: LiebLattice, U_vertex, t_edge, n: int = 2) -> SpinModel:
    """``(n-1)``-flavor Ising gauge model: spins on edges, flux terms on vertices."""
    if n < 2:
        raise ModelError("replica index n must be >= 2")
    flavors = n - 1
    S = lattice.n_edges
    U_vertex = np.asarray(U_vertex, dtype=float)
    t_edge = np.asarray(t_edge, dtype=float)
    terms = []
    for v in range(lattice.n_vertices):
        if U_vertex[v] != 0:
            groups = [tuple(f * S + e for e in lattice.incidence[v]) for f in range(flavors)]
            terms += _replica_terms(U_vertex[v], groups, flavors, ("plaq", v), False)
    for e in range(S):
        if t_edge[e] != 0:
            groups = [(f * S + e,) for f in range(flavors)]
            terms += _replica_terms(t_edge[e], groups, flavors, ("field", e), False)
    pref = -n * (float(U_vertex.sum()) + float(t_edge.sum())) / 2.0
    return _assemble(S, flavors, terms, pref, "gauge", None, lattice.boundary_kind)


def gauge_model(lattice: LiebLattice, p_x: float, p_z: float = 0.0, n: int = 2) -> SpinModel:
    _, _, U, t = couplings_from_errors(p_x, p_z)
    return gauge_model_from_couplings(lattice, np.full(lattice.n_vertices, U),
                                      np.full(lattice.n_edges, t), n)


def gauge_model_from_expansion(expansion, n: int = 2) -> SpinModel:
    nv = expansion.lattice.n_vertices
    with np.errstate(divide="raise"):
        U = -np.log(np.asarray(expansion.damp_x[:nv]))
        t = -np.log(np.asarray(expansion.damp_z[nv:]))
    return gauge_model_from_couplings(expansion.lattice, U, t, n)


# -- defects -------------------------------------------------------------------

def cut_bond_model(model: SpinModel, loop) -> SpinModel:
    """Zero every bond term (all flavors) on the edges the loop crosses."""
    edges = set(loop.edges) if hasattr(loop, "edges") else set(loop)
    K = model.K.copy()
    for i, tag in enumerate(model.tags):
        if tag[0] == "bond" and tag[1] in edges:
            K[i] = 0.0
    return replace(model, K=K)


def merge_vars(model: SpinModel, classes) -> SpinModel:
    """Identify the spins in each class (lists of current model vars)."""
    n = model.n_vars
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for cls in classes:
        cls = list(cls)
        for v in cls[1:]:
            ra, rb = find(cls[0]), find(v)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
    roots = sorted({find(i) for i in range(n)})
    new_index = {r: k for k, r in enumerate(roots)}
    remap = [new_index[find(i)] for i in range(n)]

    def reduce(vs):
        acc: dict[int, int] = {}
        for v in vs:
            acc[remap[v]] = acc.get(remap[v], 0) ^ 1
        return tuple(sorted(v for v, b in acc.items() if b))

    base = model.var_map or tuple(range(model.n_original))
    return replace(
        model,
        term_vars=tuple(reduce(v) for v in model.term_vars),
        var_map=tuple(remap[v] for v in base),
        parity_constraints=tuple(reduce(c) for c in model.parity_constraints),
    )


def constrained_model(model: SpinModel, bonds, lattice: LiebLattice) -> SpinModel:
    """Forbid domain walls on the given interior edges by merging their endpoints
    (in every flavor)."""
    classes = []
    for e in bonds:
        a, b = lattice.edge_endpoints[e]
        if b < 0:
            raise ModelError("stub edges have no second endpoint to merge")
        for f in range(model.flavors):
            classes.append((model.var(a, f), model.var(b, f)))
    return merge_vars(model, classes)


def transpose_constraint_rows(lattice: LiebLattice, region_qubits) -> list[tuple[int, ...]]:
    """GF(2) constraints left after summing gauge replicas under ``T_region``.

    For an edge ``e`` the partial-transpose sign is linear in the gauge spin of
    ``e`` with coefficient ``sum_{v in e} ([v in X] xor [e in X]) T_v``, where
    ``T`` is the relative domain configuration.  The gauge sum vanishes unless
    every such coefficient is zero; each returned tuple lists the vertices
    whose ``T`` must sum to zero.
    """
    X = set(region_qubits)
    nv = lattice.n_vertices
    rows = set()
    for e, (a, b) in enumerate(lattice.edge_endpoints):
        e_in = (nv + e) in X
        r = tuple(sorted(v for v in (a, b) if v >= 0 and ((v in X) != e_in)))
        if r:
            rows.add(r)
    return sorted(rows)


def lock_constraints(model: SpinModel, rows) -> list[tuple[int, ...]]:
    """Transposition constraints as spin products (original variables) that
    must equal ``+1``: the product over each row agrees between flavor 0 and
    every other flavor."""
    S = model.n_sites
    return [tuple(f * S + v for v in r) + tuple(v for v in r)
            for r in rows for f in range(1, model.flavors)]


def locked_replica_model(model: SpinModel, rows) -> SpinModel:
    """Impose the transposition constraints on a replica Ising model.

    A row ``R`` demands that the spin product over ``R`` agree across all
    flavors.  Single-vertex rows lock the flavors of that vertex into one
    spin (a merged class); longer rows become parity constraints.
    """
    classes, parity = [], []
    for r in rows:
        if len(r) == 1:
            classes.append([model.var(r[0], f) for f in range(model.flavors)])
        else:
            for f in range(1, model.flavors):
                parity.append(tuple(model.var(v, g) for v in r for g in (0, f)))
    merged = merge_vars(model, classes)
    if parity:
        # express parity constraints in the merged variables
        remap = merged.var_map
        base = model.var_map or tuple(range(model.n_original))
        inv = {}
        for orig, cur in enumerate(base):
            inv.setdefault(cur, orig)
        extra = []
        for c in parity:
            acc: dict[int, int] = {}
            for v in c:
                m = remap[inv[v]]
                acc[m] = acc.get(m, 0) ^ 1
            red = tuple(sorted(v for v, b in acc.items() if b))
            if red:
                extra.append(red)
        merged = replace(merged, parity_constraints=merged.parity_constraints + tuple(extra))
    return merged


# -- exact enumeration -----------------------------------------------------------

@dataclass
class ExactResult:
    log_partition: float
    observables: dict
    enumerated_count: int


def _masks(groups) -> np.ndarray:
    out = np.zeros(len(groups), dtype=np.uint64)
    for i, g in enumerate(groups):
        m = 0
        for v in g:
            m ^= 1 << v
        out[i] = m
    return out


def exact_partition(model: SpinModel, correlators=(), moments: bool = False,
                    energy: bool = False, constraints=()) -> ExactResult:
    """Exhaustive ``ln Z`` plus optional observables.

    ``correlators`` are tuples of *original* variables (``flavor * n_sites +
    site``); their products are averaged, and ``("anti", corr)`` holds the
    weight fraction where the product is ``-1`` (so ``<prod> = 1 - 2 q``
    without cancellation).  ``constraints`` are products of original
    variables required to be ``+1``; ``"violated"`` is the weight fraction
    breaking at least one of them.  ``moments`` adds ``m2`` and ``m4``
    for the flavor-0 mean spin, ``energy`` adds ``<H>``.  Chunks are reduced
    in a fixed order with a max-shift and compensated summation.
    """
    V = model.n_vars
    if V > EXACT_BUDGET:
        raise ModelError(f"{V} spins exceed the exhaustive budget of {EXACT_BUDGET}")
    live = [i for i, k in enumerate(model.K) if k != 0]
    tmask = _masks([model.term_vars[i] for i in live])
    tK = model.K[live]
    pmask = _masks(model.parity_constraints)
    def to_model(c):
        return [model.var_map[v] if model.var_map else v for v in c]

    cmask = _masks([to_model(c) for c in correlators])
    kmask = _masks([to_model(c) for c in constraints])
    mw = model.magnetization_weights() if moments else None
    bit = np.arange(V, dtype=np.uint64)

    total = 1 << V
    chunk = 1 << min(V, _CHUNK_BITS)
    parts = []  # (shift, {name: scaled sum})
    count = 0
    for start in range(0, total, chunk):
        c = np.arange(start, start + chunk, dtype=np.uint64)
        if len(pmask):
            ok = np.ones(len(c), dtype=bool)
            for m in pmask:
                ok &= (np.bitwise_count(c & m) & 1) == 0
            c = c[ok]
            if not len(c):
                continue
        count += len(c)
        E = np.zeros(len(c))
        for k, m in zip(tK, tmask):
            E -= k * (1.0 - 2.0 * (np.bitwise_count(c & m) & 1))
        lw = -E
        shift = float(lw.max())
        w = np.exp(lw - shift)
        sums = {"Z": float(np.sum(w))}
        for i, m in enumerate(cmask):
            sums[f"c{i}"] = float(np.sum(w[(np.bitwise_count(c & m) & 1) == 1]))
        if len(kmask):
            bad = np.zeros(len(c), dtype=bool)
            for m in kmask:
                bad |= (np.bitwise_count(c & m) & 1) == 1
            sums["violated"] = float(np.sum(w[bad]))
        if moments:
            sig = 1.0 - 2.0 * ((c[:, None] >> bit[None, :]) & 1)
            mag = sig @ mw
            m2 = mag * mag
            sums["m2"] = float(np.sum(w * m2))
            sums["m4"] = float(np.sum(w * m2 * m2))
            sums["absm"] = float(np.sum(w * np.abs(mag)))
        if energy:
            sums["E"] = float(np.sum(w * E))
            sums["E2"] = float(np.sum(w * E * E))
        parts.append((shift, sums))
    if not parts:
        raise ModelError("constraints exclude every configuration")
    top = max(s for s, _ in parts)
    keys = parts[0][1].keys()
    acc = {k: math.fsum(d[k] * math.exp(s - top) for s, d in parts) for k in keys}
    Z = acc.pop("Z")
    obs = {}
    for i, corr in enumerate(correlators):
        q = acc[f"c{i}"] / Z
        obs[("anti", tuple(corr))] = q
        obs[tuple(corr)] = 1.0 - 2.0 * q
    if len(kmask):
        obs["violated"] = acc["violated"] / Z
    if moments:
        obs["m2"] = acc["m2"] / Z
        obs["m4"] = acc["m4"] / Z
        obs["absm"] = acc["absm"] / Z
        obs["binder"] = 1.0 - obs["m4"] / (3.0 * obs["m2"] ** 2)
    if energy:
        obs["energy"] = acc["E"] / Z
        obs["energy2"] = acc["E2"] / Z
    return ExactResult(top + math.log(Z), obs, count)


def restricted_partition(model: SpinModel, allowed) -> float:
    """``ln`` of the Boltzmann sum over configurations accepted by ``allowed``.

    ``allowed`` maps an integer array of configurations (bit ``v`` set means
    ``sigma_v = -1``) to a boolean mask.  Independent of :func:`merge_vars`.
    """
    V = model.n_vars
    if V > EXACT_BUDGET:
        raise ModelError("over budget")
    tmask = _masks(model.term_vars)
    total, chunk = 1 << V, 1 << min(V, _CHUNK_BITS)
    parts = []
    for start in range(0, total, chunk):
        c = np.arange(start, start + chunk, dtype=np.uint64)
        c = c[allowed(c)]
        if not len(c):
            continue
        lw = np.zeros(len(c))
        for k, m in zip(model.K, tmask):
            lw += k * (1.0 - 2.0 * (np.bitwise_count(c & m) & 1))
        s = float(lw.max())
        parts.append((s, float(np.sum(np.exp(lw - s)))))
    top = max(s for s, _ in parts)
    return top + math.log(math.fsum(v * math.exp(s - top) for s, v in parts))


# -- transfer matrix ---------------------------------------------------------------

def grid_transfer(Jh, Jv, h, periodic_rows: bool, periodic_cols: bool, insert=()) -> tuple[float, float]:
    """Row-to-row transfer matrix for a nearest-neighbour Ising grid.

    ``Jh[r, c]`` couples ``(r, c)-(r, c+1)``, ``Jv[r, c]`` couples
    ``(r, c)-(r+1, c)`` (wrapping when periodic), ``h[r, c]`` is the field.
    Returns ``(ln Z, <prod_{(r,c) in insert} sigma>)``.  Width up to 12.
    """
    Jh, Jv, h = (np.asarray(a, dtype=float) for a in (Jh, Jv, h))
    L, W = h.shape
    if W > 12:
        raise ModelError("transfer-matrix width limited to 12")
    states = np.arange(1 << W)
    sig = 1.0 - 2.0 * ((states[:, None] >> np.arange(W)[None, :]) & 1)  # (2^W, W)
    ins_rows: dict[int, list[int]] = {}
    for r, c in insert:
        ins_rows.setdefault(r, []).append(c)

    def row_logw(r):
        lw = sig @ h[r]
        ncol = W if periodic_cols else W - 1
        for c in range(ncol):
            lw = lw + Jh[r, c] * sig[:, c] * sig[:, (c + 1) % W]
        return lw

    def ins_sign(r):
        if r not in ins_rows:
            return None
        return np.prod(sig[:, ins_rows[r]], axis=1)

    def vertical(vec, r):
        # multiply by prod_c exp(Jv[r,c] s_c s'_c) along each bit axis
        shape = vec.shape
        v = vec.reshape((-1,) + (2,) * W)
        extra = v.ndim - W
        for c in range(W):
            ax = extra + (W - 1 - c)
            k = Jv[r, c]
            m = np.array([[math.exp(k), math.exp(-k)], [math.exp(-k), math.exp(k)]])
            v = np.moveaxis(np.tensordot(v, m, axes=([ax], [0])), -1, ax)
        return v.reshape(shape)

    if periodic_rows:
        # propagate a full matrix: column b starts as the basis state b in row 0
        M = np.eye(1 << W)
        MI = np.eye(1 << W)
        log_scale = 0.0
        for r in range(L):
            w = np.exp(row_logw(r))
            s = ins_sign(r)
            M = M * w[:, None]
            MI = MI * (w if s is None else w * s)[:, None]
            M = vertical(M.T, r).T
            MI = vertical(MI.T, r).T
            top = np.abs(M).max()
            M, MI = M / top, MI / top
            log_scale += math.log(top)
        Z = np.trace(M)
        return log_scale + math.log(Z), float(np.trace(MI) / Z)
    vec = np.ones(1 << W)
    veci = np.ones(1 << W)
    log_scale = 0.0
    for r in range(L):
        w = np.exp(row_logw(r))
        s = ins_sign(r)
        vec = vec * w
        veci = veci * (w if s is None else w * s)
        if r < L - 1:
            vec = vertical(vec[None, :], r)[0]
            veci = vertical(veci[None, :], r)[0]
        top = np.abs(vec).max()
        vec, veci = vec / top, veci / top
        log_scale += math.log(top)
    Z = vec.sum()
    return log_scale + math.log(Z), float(veci.sum() / Z)


def lattice_grid_couplings(lattice: LiebLattice, J_edge, h_vertex):
    """Arrays ``(Jh, Jv, h)`` for :func:`grid_transfer` from per-edge couplings.

    Stub couplings become fields (a ghost neighbour fixed to ``+1``); on the
    N=2 torus the two parallel edges between a pair of vertices are summed by
    the periodic wrap automatically.
    """
    N = lattice.N
    Jh = np.zeros((N, N))
    Jv = np.zeros((N, N))
    h = np.array(h_vertex, dtype=float).reshape(N, N).copy()
    for e, (kind, (r, c)) in enumerate(zip(lattice.edge_kind, lattice.edge_cell)):
        if kind == "h":
            Jh[r, c] += J_edge[e]
        elif kind == "v":
            Jv[r, c] += J_edge[e]
        else:
            h[r, c] += J_edge[e]
    return Jh, Jv, h
