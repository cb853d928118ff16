"""The three SPT diagnostics, each computed on the quantum side and through
the classical spin models, plus the phase call that combines them.

Conventions: ``F = -ln Z``; the strange correlator is ``exp(F - F_cut)``;
negativities are ``ln[tr (rho^{T_X})^m / tr rho^m]`` with even ``m``.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .classical import (
    EXACT_BUDGET, P_C2, ModelError, couplings_from_errors, cut_bond_model, exact_partition,
    grid_transfer, ising_model, ising_model_from_expansion, lattice_grid_couplings,
    lock_constraints, transpose_constraint_rows,
)
from .cluster_state import (
    PauliExpansion, boundary_flip_state, dense_density_matrix, loop_z_operator,
    product_state_expectation, xor_closed_sum,
)
from .lattice import LiebLattice, RegionPartition
from .montecarlo import boundary_correlator, free_energy_difference, staged_lock_ratio
from .pauli import DENSE_QUBIT_BUDGET, mask_of, multiply, partial_transpose_dense

SPT, TRIVIAL, NEAR_CRITICAL = "SPT", "trivial", "near-critical"
ORACLE, MONTE_CARLO = "oracle", "monte-carlo"


class DiagnosticError(ValueError):
    pass


@dataclass
class Value:
    value: float
    error: float = 0.0
    provenance: str = ORACLE
    flags: dict = field(default_factory=dict)


# -- relative entropy ----------------------------------------------------------------

def _matrix_power_trace(a: np.ndarray, b: np.ndarray, k: int) -> float:
    """``tr(a b^k)`` for real symmetric ``a``, ``b``."""
    m = a
    for _ in range(k - 1):
        m = m @ b
    # the last product only needs its trace
    return float(np.sum(m * b.T))


def _power_trace(a: np.ndarray, k: int) -> float:
    """``tr(a^k)`` for real symmetric ``a`` and even ``k``."""
    h = a
    for _ in range(k // 2 - 1):
        h = h @ a
    return float(np.sum(h * h))


def _von_neumann_relative(rd: np.ndarray, rs: np.ndarray, tol: float = 1e-12) -> float:
    ld, vd = np.linalg.eigh(rd)
    ls, vs = np.linalg.eigh(rs)
    # support of rho_D outside the support of rho_S makes D infinite
    overlap = np.abs(vd.T @ vs) ** 2
    pos = ld > tol
    kernel = ls <= tol
    if np.any(overlap[np.ix_(pos, kernel)].sum(axis=1) > tol):
        return math.inf
    s_dd = float(np.sum(ld[pos] * np.log(ld[pos])))
    log_s = np.where(kernel, 0.0, np.log(np.where(kernel, 1.0, ls)))
    s_ds = float(np.sum(ld[pos, None] * overlap[pos] * log_s[None, :]))
    return s_dd - s_ds


def relative_entropy(state: PauliExpansion, u: int, u2: int, n: int = 2, route: str = "expansion",
                     **mc) -> Value:
    """Renyi relative entropy between the decohered state and its copy with the
    boundary string ``u -> u'`` applied.

    Routes: ``dense`` (matrix powers, ``n = 1`` allowed), ``expansion``
    (signed replica sums), ``classical`` (exact ``<s_u s_u'>`` in the
    ``(n-1)``-flavor model) and ``mc``.  A non-positive overlap is reported as
    ``inf`` with ``flags["divergent"]``.
    """
    lat = state.lattice
    if lat.periodic:
        raise DiagnosticError("relative entropy needs an open lattice")
    if u == u2:
        return Value(0.0, 0.0, ORACLE, {"divergent": False})
    if n < 1 or (n == 1 and route != "dense"):
        raise DiagnosticError("n = 1 is only available through the dense route")
    flipped = boundary_flip_state(state, u, u2)
    # q is the weight fraction with s_u s_u' = -1, so <s_u s_u'> = 1 - 2q;
    # working with q avoids cancellation when the states are nearly equal
    err, prov = 0.0, ORACLE
    if route == "dense":
        if state.n_qubits > DENSE_QUBIT_BUDGET:
            raise DiagnosticError("state too large for the dense route")
        rd = dense_density_matrix(state)
        rs = dense_density_matrix(flipped)
        if n == 1:
            d = _von_neumann_relative(rd, rs)
            return Value(d, 0.0, ORACLE, {"divergent": math.isinf(d)})
        ratio = _matrix_power_trace(rd, rs, n - 1) / _matrix_power_trace(rd, rd, n - 1)
        q = (1.0 - ratio) / 2.0
    elif route == "expansion":
        w = state.dw_weights()
        ws = flipped.dw_weights()
        a = xor_closed_sum([w] * n, np.longdouble)
        a_s = xor_closed_sum([w] + [ws] * (n - 1), np.longdouble)
        q = (a - a_s) / (2 * a)
    elif route == "classical":
        m = ising_model_from_expansion(state, n)
        q = exact_partition(m, correlators=[(u, u2)]).observables[("anti", (u, u2))]
    elif route == "mc":
        m = ising_model_from_expansion(state, n)
        est = boundary_correlator(m, u, u2, **mc)
        q, err, prov = (1.0 - est.value) / 2.0, est.standard_error, MONTE_CARLO
    else:
        raise DiagnosticError(f"unknown route {route!r}")
    ratio = float(1 - 2 * q)
    if ratio <= max(3 * err, 1e-300):
        return Value(math.inf, 0.0, prov, {"divergent": True, "correlator": ratio, "correlator_error": err})
    d = float(np.log1p(-2 * q)) / (1 - n)
    return Value(d, abs(err / ratio / (1 - n)), prov,
                 {"divergent": False, "correlator": ratio, "correlator_error": err})


# -- strange correlator ---------------------------------------------------------------

def _free_energy_exact(model, lattice) -> float:
    """``-ln Z`` by enumeration or, for wider grids, the transfer matrix."""
    if model.n_vars <= EXACT_BUDGET:
        return -exact_partition(model).log_partition
    if model.flavors != 1 or model.kind != "ising" or lattice.N > 10:
        raise DiagnosticError("model too large for an exact free energy")
    J = np.zeros(lattice.n_edges)
    h = np.zeros(lattice.n_vertices)
    for k, vs, tag in zip(model.K, model.term_vars, model.tags):
        if tag[0] in ("bond", "stub"):
            J[tag[1]] += k
        elif tag[0] == "field":
            h[tag[1]] += k
    Jh, Jv, hh = lattice_grid_couplings(lattice, J, h)
    return -grid_transfer(Jh, Jv, hh, lattice.periodic, lattice.periodic)[0]


def strange_correlator(lattice: LiebLattice, p_x: float, loop, mode: str = "exact", **mc) -> Value:
    """``C(gamma) = exp(F_Ising - F_cut)`` with the loop's crossed bonds removed."""
    if not lattice.periodic:
        raise DiagnosticError("the strange correlator is defined on the torus")
    if not getattr(loop, "dual", False) or not loop.closed:
        raise DiagnosticError("need a contractible dual loop around a vertex block")
    model = ising_model(lattice, p_x)
    cut = cut_bond_model(model, loop)
    if p_x == 0:
        return Value(1.0, 0.0, ORACLE, {"log": 0.0, "loop_length": len(loop.edges)})
    if mode == "exact":
        df = _free_energy_exact(cut, lattice) - _free_energy_exact(model, lattice)
        return Value(math.exp(-df), 0.0, ORACLE, {"log": -df, "loop_length": len(loop.edges)})
    if mode == "mc":
        est = free_energy_difference(model, cut, **mc)
        return Value(math.exp(-est.value), math.exp(-est.value) * est.standard_error, MONTE_CARLO,
                     {"log": -est.value, "log_error": est.standard_error, "delta_F": est.value,
                      "loop_length": len(loop.edges), "estimate": est})
    raise DiagnosticError(f"unknown mode {mode!r}")


def strange_correlator_quantum(state: PauliExpansion, loop) -> Value:
    """``tr(rho_0 O rho) / tr(rho_0 rho)`` evaluated term by term.

    ``rho_0`` is the product state with A qubits in ``tau^x = +1`` and B
    qubits in ``sigma^z = +1``; ``O`` is ``prod sigma^z`` on the loop.  Gauge
    terms with ``G != 0`` carry ``sigma^x`` on B and vanish against the
    reference, so only the domain-wall sum is visited.
    """
    lat = state.lattice
    O = loop_z_operator(lat, loop)
    xplus = (1 << lat.n_vertices) - 1
    zplus = ((1 << lat.n_qubits) - 1) ^ xplus
    w = state.dw_weights()
    num = den = 0.0
    for S in np.nonzero(w)[0]:
        P = state.dw_term(int(S))
        num += w[S] * product_state_expectation(multiply(O, P), xplus, zplus).real
        den += w[S] * product_state_expectation(P, xplus, zplus).real
    return Value(num / den, 0.0, ORACLE)


# -- negativity ------------------------------------------------------------------------

def _check_order(order: int):
    if order < 2 or order % 2:
        raise DiagnosticError("negativity needs an even replica index >= 2")


def _check_transposable(state: PauliExpansion):
    nv = state.lattice.n_vertices
    if np.any(state.damp_x[:nv] != 1) or np.any(state.damp_z[nv:] != 1):
        raise DiagnosticError("classical negativity needs bit-flip only on B and phase-flip only on A")


def _region_mask(region) -> int:
    return region if isinstance(region, int) else mask_of(region)


def lock_rank(lattice: LiebLattice, region) -> int:
    """GF(2) rank of the transposition constraints of a region."""
    rows = transpose_constraint_rows(lattice, region if not isinstance(region, int) else
                                     [q for q in range(lattice.n_qubits) if region >> q & 1])
    basis: list[int] = []
    for r in rows:
        v = mask_of(r)
        for b in basis:
            v = min(v, v ^ b)
        if v:
            basis.append(v)
    return len(basis)


def renyi_negativity(state: PauliExpansion, region, order: int = 4, mode: str = "exact", **mc) -> Value:
    """``ln[tr (rho^{T_X})^order / tr rho^order]``.

    ``exact``: dense eigenvalues (``mode="dense"``) or the signed replica sum
    over joint domain-wall/gauge configurations (``mode="exact"``).
    ``classical``: enumeration of the replica Ising model with the
    transposition constraints imposed.  ``mc``: staged locking, one vertex
    at a time.  ``zero``: closed form at zero error rate,
    ``-(order - 2) * rank * ln 2``.
    """
    _check_order(order)
    lat = state.lattice
    qubits = sorted(region) if not isinstance(region, int) else \
        [q for q in range(lat.n_qubits) if region >> q & 1]
    if not qubits or len(qubits) == lat.n_qubits:
        return Value(0.0, 0.0, ORACLE)
    if mode == "dense":
        if state.n_qubits > DENSE_QUBIT_BUDGET:
            raise DiagnosticError("state too large for the dense route")
        rho = dense_density_matrix(state)
        rho_t = partial_transpose_dense(rho, qubits, state.n_qubits)
        return Value(math.log(_power_trace(rho_t, order)) - math.log(_power_trace(rho, order)))
    if mode == "exact":
        return Value(_negativity_expansion(state, mask_of(qubits), order))
    if mode == "zero":
        if not state.is_pure:
            raise DiagnosticError("the closed form holds at zero error rate only")
        return Value(-(order - 2) * lock_rank(lat, qubits) * math.log(2))
    _check_transposable(state)
    model = ising_model_from_expansion(state, order)
    rows = transpose_constraint_rows(lat, qubits)
    if mode == "classical":
        # Z'/Z is the weight fraction satisfying every lock
        q = exact_partition(model, constraints=lock_constraints(model, rows)).observables["violated"]
        return Value(math.log1p(-q) if q < 1 else -math.inf)
    if mode == "mc":
        if any(len(r) > 1 for r in rows):
            raise DiagnosticError("sampling supports single-vertex locks only")
        classes = [[model.var(r[0], f) for f in range(model.flavors)] for r in rows]
        est = staged_lock_ratio(model, classes, **mc)
        return Value(est.value, est.standard_error, MONTE_CARLO, {"stages": len(classes)})
    raise DiagnosticError(f"unknown mode {mode!r}")


def _pack(bits: np.ndarray) -> np.ndarray:
    shifts = np.arange(bits.shape[1], dtype=np.uint64)
    return np.bitwise_or.reduce(bits.astype(np.uint64) << shifts[None, :], axis=1)


def _negativity_expansion(state: PauliExpansion, region: int, order: int) -> float:
    """Signed replica sum: under ``T_X`` a term picks up ``(-1)^{#Y in X}``."""
    lat = state.lattice
    nv = lat.n_vertices
    wa = state.dw_weights()
    wb = state.ga_weights()
    na, nb = len(wa).bit_length() - 1, len(wb).bit_length() - 1
    if na + nb > 26:
        raise DiagnosticError("joint configuration space too large")
    S = np.arange(len(wa), dtype=np.uint64)
    G = np.arange(len(wb), dtype=np.uint64)
    xa = np.uint64(region & ((1 << nv) - 1))
    xb = np.uint64(region >> nv)
    # Y on A: tau^x (from S) meets tau^z (from the flux of G); Y on B:
    # sigma^z (wall of S) meets sigma^x (G)
    wall = _pack(state.wall_bits(S))
    flux = _pack(state.flux_bits(G))
    yA = np.bitwise_count((S[:, None] & flux[None, :]) & xa)
    yB = np.bitwise_count((wall[:, None] & G[None, :]) & xb)
    sign = 1.0 - 2.0 * ((yA + yB) & 1)
    joint = (wa[:, None] * wb[None, :] * sign).T.reshape(-1)  # index G * 2^na + S
    plain = (wa[:, None] * wb[None, :]).T.reshape(-1)
    a_t = xor_closed_sum([joint] * order, np.longdouble)
    a = xor_closed_sum([plain] * order, np.longdouble)
    return float(np.log1p((a_t - a) / a))


def tripartite_negativity(state: PauliExpansion, partition: RegionPartition, order: int = 4,
                          mode: str = "exact", xi: float | None = None, **mc) -> Value:
    """``N = E_LM + E_MR - E_M - E_LMR``."""
    _check_order(order)
    parts = {}
    for i, lab in enumerate(("LM", "MR", "M", "LMR")):
        kw = dict(mc)
        if "seed" in kw:
            kw["seed"] = kw["seed"] + 7919 * i
        parts[lab] = renyi_negativity(state, sorted(partition.qubits(lab)), order, mode, **kw)
    val = parts["LM"].value + parts["MR"].value - parts["M"].value - parts["LMR"].value
    err = math.sqrt(sum(p.error ** 2 for p in parts.values()))
    width = partition.cuts[1] - partition.cuts[0]
    flags = {k: v.value for k, v in parts.items()}
    flags.update(l1=partition.l1, l2=partition.l2, separation=width)
    if xi is not None:
        flags["unreliable"] = bool(width < xi)
    return Value(val, err, parts["LM"].provenance, flags)


# -- fits --------------------------------------------------------------------------------

def fit_area_law(lengths, values, errors=None) -> tuple[float, float, float]:
    """Weighted linear fit ``E = c l + b``; returns ``(c, b, rms residual)``."""
    l = np.asarray(lengths, dtype=float)
    e = np.asarray(values, dtype=float)
    if len(l) < 2:
        raise DiagnosticError("need at least two lengths")
    w = None if errors is None else 1.0 / np.maximum(np.asarray(errors, dtype=float), 1e-300)
    c, b = np.polyfit(l, e, 1, w=w)
    res = e - (c * l + b)
    return float(c), float(b), float(np.sqrt(np.mean(res ** 2)))


def fit_slope(x, y, err=None) -> tuple[float, float]:
    """Least-squares slope and its standard error."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if err is None or np.all(np.asarray(err) == 0):
        A = np.vstack([x, np.ones_like(x)]).T
        coef, res, *_ = np.linalg.lstsq(A, y, rcond=None)
        dof = max(len(x) - 2, 1)
        s2 = float(res[0]) / dof if len(res) else 0.0
        cov = s2 * np.linalg.inv(A.T @ A)
        return float(coef[0]), float(math.sqrt(cov[0, 0]))
    w = 1.0 / np.asarray(err, dtype=float) ** 2
    A = np.vstack([x, np.ones_like(x)]).T
    cov = np.linalg.inv(A.T @ (A * w[:, None]))
    coef = cov @ (A.T @ (w * y))
    return float(coef[0]), float(math.sqrt(cov[0, 0]))


def correlation_length(p_x: float, width: int = 10, length: int = 48, r_max: int = 8) -> float:
    """Bulk ``xi`` from the decay of ``<s_0 s_r>`` on a periodic strip."""
    J, _, _, _ = couplings_from_errors(p_x)
    if J == 0:
        return 0.0
    Jh = np.full((length, width), J)
    Jv = np.full((length, width), J)
    Jv[-1] = 0.0
    h = np.zeros((length, width))
    r0 = length // 2 - r_max // 2
    rs = np.arange(1, r_max + 1)
    corr = np.array([grid_transfer(Jh, Jv, h, False, True, insert=[(r0, 0), (r0 + r, 0)])[1] for r in rs])
    if np.any(corr <= 0):
        return math.inf
    slope = np.polyfit(rs, np.log(corr), 1)[0]
    return math.inf if slope >= -1e-6 else float(-1.0 / slope)


# -- report ---------------------------------------------------------------------------

@dataclass
class DiagnosticsReport:
    p_x: float
    p_z: float
    lattice: dict
    relative_entropy: list = field(default_factory=list)    # rows: separation, D, err
    strange_correlator: list = field(default_factory=list)  # rows: |gamma|, C, ln C, err
    negativities: dict = field(default_factory=dict)         # region -> (E, err) and "N"
    phase: str | None = None
    provenance: str = ORACLE

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, default=float)

    def csv_rows(self) -> list[dict]:
        rows = []
        base = {"p_x": self.p_x, "p_z": self.p_z, "provenance": self.provenance}
        for sep, d, e in self.relative_entropy:
            rows.append({**base, "diagnostic": "relative_entropy", "key": sep, "value": d, "error": e})
        for g, c, lc, e in self.strange_correlator:
            rows.append({**base, "diagnostic": "strange_correlator", "key": g, "value": lc, "error": e})
        for k, (v, e) in self.negativities.items():
            rows.append({**base, "diagnostic": "negativity", "key": k, "value": v, "error": e})
        rows.append({**base, "diagnostic": "phase", "key": "", "value": self.phase, "error": ""})
        return rows

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, ["diagnostic", "p_x", "p_z", "key", "value", "error", "provenance"],
                           lineterminator="\n")
        w.writeheader()
        w.writerows(self.csv_rows())
        return buf.getvalue()


def _vote_relative_entropy(rows, sigma):
    """Linear growth with separation is SPT-like, saturation is trivial-like:
    compare the slope over the far half of the separations with the near half."""
    if any(not math.isfinite(d) for _, d, _ in rows):
        return SPT
    if len(rows) < 3:
        return None
    rows = sorted(rows)
    k = len(rows) // 2
    near, far = rows[: k + 1], rows[k:]
    s1, _ = _slope(near)
    s2, e2 = _slope(far)
    if s2 > 0.5 * s1 and s2 > sigma * e2:
        return SPT
    return TRIVIAL


def _slope(rows):
    x, y, e = zip(*rows)
    if len(x) == 2:
        d = x[1] - x[0]
        return (y[1] - y[0]) / d, math.hypot(e[0], e[1]) / d
    return fit_slope(x, y, e if all(v > 0 for v in e) else None)


def _vote_strange(rows, sigma, p_x):
    """``ln C`` decays by about ``ln cosh J`` per crossed bond even when
    disordered; only decay beyond twice that counts as trivial-like."""
    if len(rows) < 2:
        return None
    x = [r[0] for r in rows]
    y = [r[2] for r in rows]
    e = [r[3] for r in rows]
    slope, err = fit_slope(x, y, e if all(v > 0 for v in e) else None)
    J = couplings_from_errors(p_x)[0]
    return TRIVIAL if slope < -2.0 * math.log(math.cosh(J)) - sigma * err else SPT


def _vote_negativity(neg, sigma):
    if "N" not in neg:
        return None
    v, e = neg["N"]
    tol = sigma * max(e, 1e-12)
    if abs(v - math.log(2)) < tol:
        return SPT
    if abs(v) < tol:
        return TRIVIAL
    return None


def phase_call(report: DiagnosticsReport, p_c: float = P_C2, band: float = 0.01,
               sigma: float = 3.0) -> str:
    """Majority vote of the available diagnostics; ``near-critical`` inside
    ``|p_x - p_c| < band``."""
    if abs(report.p_x - p_c) < band:
        return NEAR_CRITICAL
    votes = [v for v in (_vote_relative_entropy(report.relative_entropy, sigma),
                         _vote_strange(report.strange_correlator, sigma, report.p_x),
                         _vote_negativity(report.negativities, sigma)) if v is not None]
    if not votes:
        return NEAR_CRITICAL
    n_spt = votes.count(SPT)
    n_triv = votes.count(TRIVIAL)
    if n_spt == n_triv:
        return NEAR_CRITICAL
    return SPT if n_spt > n_triv else TRIVIAL
