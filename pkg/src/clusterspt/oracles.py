"""Cross-oracle identities: every quantity evaluated on the quantum side and in
the classical model must agree to ``REL_TOL``.

Small lattices keep all checks exhaustive: the 2x2 torus for traces (its
gauge model stays at 24 spins for n = 4), the open 2x2 lattice for the
boundary-string and negativity checks, and the 4x4 torus for the loop check.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .channels import ChannelSpec, apply_channels
from .classical import exact_partition, gauge_model_from_expansion, ising_model_from_expansion
from .cluster_state import dense_density_matrix, pure_state_expansion
from .diagnostics import relative_entropy, renyi_negativity, strange_correlator, strange_correlator_quantum
from .lattice import build_lattice, rectangular_loop

REL_TOL = 1e-10
ABS_FLOOR = 1e-14  # only matters when both sides are zero
P_X_GRID = (0.0, 0.05, 0.1782, 0.28, 0.45)
P_Z_GRID = (0.0, 0.1)
NEGATIVITY_REGIONS = ((0, 3, 4, 7, 10), (2, 3, 4, 7, 9), (0, 1, 4, 5, 6, 8), (1, 2, 3, 9, 11))


@dataclass
class IdentityCheck:
    identity: str
    p_x: float
    p_z: float
    quantum: float
    classical: float
    passed: bool
    detail: str = ""

    @property
    def rel_err(self) -> float:
        a, b = self.quantum, self.classical
        if a == b:
            return 0.0
        if not (math.isfinite(a) and math.isfinite(b)):
            return math.inf
        return abs(a - b) / max(abs(a), abs(b))

    def to_dict(self) -> dict:
        return {**asdict(self), "rel_err": self.rel_err}


def close(a: float, b: float) -> bool:
    if math.isinf(a) or math.isinf(b):
        return a == b
    return math.isclose(a, b, rel_tol=REL_TOL, abs_tol=ABS_FLOOR)


def _check(name, px, pz, q, c, detail=""):
    return IdentityCheck(name, px, pz, float(q), float(c), close(q, c), detail)


def decohered(lattice, p_x, p_z, x_support="all", z_support="all"):
    return apply_channels(pure_state_expansion(lattice),
                          [ChannelSpec("x", p_x, x_support), ChannelSpec("z", p_z, z_support)])


def _log_classical_trace(state, n):
    """``ln tr rho^n`` from the two classical models and their prefactors."""
    a = ising_model_from_expansion(state, n)
    b = gauge_model_from_expansion(state, n)
    za = exact_partition(a).log_partition + a.log_prefactor
    zb = exact_partition(b).log_partition + b.log_prefactor
    return state.n_qubits * (1 - n) * math.log(2) + za + zb


def trace_identities(p_x, p_z, dense: bool = True) -> list[IdentityCheck]:
    lat = build_lattice(2, "periodic")
    st = decohered(lat, p_x, p_z)
    out = []
    if dense:
        rho = dense_density_matrix(st)
        out.append(_check("purity", p_x, p_z, math.log(float(np.sum(rho * rho))),
                          _log_classical_trace(st, 2), "dense tr rho^2"))
    else:
        out.append(_check("purity", p_x, p_z, math.log(st.purity()), _log_classical_trace(st, 2)))
    for n in (2, 3, 4):
        out.append(_check(f"replica_n{n}", p_x, p_z, math.log(st.trace_power(n)),
                          _log_classical_trace(st, n)))
    return out


def relative_entropy_identities(p_x, p_z, pairs=((0, 3), (0, 1))) -> list[IdentityCheck]:
    lat = build_lattice(2, "open")
    st = decohered(lat, p_x, p_z)
    out = []
    for u, u2 in pairs:
        for n in (2, 3):
            q = relative_entropy(st, u, u2, n, "expansion").value
            c = relative_entropy(st, u, u2, n, "classical").value
            out.append(_check(f"relative_entropy_n{n}", p_x, p_z, q, c, f"u={u},u'={u2}"))
    return out


def strange_identities(p_x, loop_size=(2, 2)) -> list[IdentityCheck]:
    lat = build_lattice(4, "periodic")
    loop = rectangular_loop(lat, (1, 1), *loop_size)
    st = decohered(lat, p_x, 0.0)
    q = strange_correlator_quantum(st, loop).value
    c = strange_correlator(lat, p_x, loop, "exact").value
    return [_check("strange_correlator", p_x, 0.0, q, c, f"loop {loop_size[0]}x{loop_size[1]}")]


def negativity_identities(p_x, p_z, order: int = 4) -> list[IdentityCheck]:
    """Bit-flip on B, phase-flip on A: the setting the classical mapping covers."""
    lat = build_lattice(2, "open")
    st = decohered(lat, p_x, p_z, "B", "A")
    out = []
    for reg in NEGATIVITY_REGIONS:
        q = renyi_negativity(st, reg, order, "exact").value
        c = renyi_negativity(st, reg, order, "classical").value
        out.append(_check(f"negativity_{order}", p_x, p_z, q, c, f"region {list(reg)}"))
    return out


def identity_suite(p_x_grid=P_X_GRID, p_z_grid=P_Z_GRID, dense: bool = True) -> list[IdentityCheck]:
    checks = []
    for px in p_x_grid:
        for pz in p_z_grid:
            checks += trace_identities(px, pz, dense=dense)
            checks += relative_entropy_identities(px, pz)
            checks += negativity_identities(px, pz)
        # the loop check is defined without phase errors
        checks += strange_identities(px)
    return checks
