"""Single-qubit Pauli decoherence and its symmetry classification.

A bit-flip channel ``rho -> (1-p) rho + p X rho X`` multiplies every Pauli
term carrying ``Z`` or ``Y`` on that qubit by ``1 - 2p``; the phase-flip
channel does the same for ``X`` or ``Y``.  Channels therefore act on a
:class:`PauliExpansion` by rescaling its per-qubit damping factors.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cluster_state import PauliExpansion, string_operator
from .lattice import LiebLattice, one_form_loops
from .pauli import PauliString, apply_left, apply_right, commutes

BIT_FLIP = "x"
PHASE_FLIP = "z"
EXACT, AVERAGE, BROKEN = "exact", "average", "broken"


class ChannelError(ValueError):
    pass


@dataclass(frozen=True)
class ChannelSpec:
    kind: str
    p: float
    support: object = "all"  # "all", "A" (vertices), "B" (edges) or a qubit collection

    def __post_init__(self):
        if self.kind not in (BIT_FLIP, PHASE_FLIP):
            raise ChannelError(f"channel kind must be 'x' or 'z', got {self.kind!r}")
        if not 0.0 <= self.p <= 0.5:
            raise ChannelError(f"error rate {self.p} outside [0, 1/2]")
        if isinstance(self.support, str):
            if self.support not in ("all", "A", "B"):
                raise ChannelError(f"unknown support {self.support!r}")
        else:
            object.__setattr__(self, "support", frozenset(int(q) for q in self.support))

    @property
    def pauli(self) -> str:
        return "X" if self.kind == BIT_FLIP else "Z"

    def qubits(self, lattice: LiebLattice) -> list[int]:
        nv, nq = lattice.n_vertices, lattice.n_qubits
        if self.support == "all":
            return list(range(nq))
        if self.support == "A":
            return list(range(nv))
        if self.support == "B":
            return list(range(nv, nq))
        bad = [q for q in self.support if not 0 <= q < nq]
        if bad:
            raise ChannelError(f"support qubits {bad} outside the lattice")
        return sorted(self.support)

    def to_dict(self) -> dict:
        s = self.support if isinstance(self.support, str) else sorted(self.support)
        return {"kind": self.kind, "p": self.p, "support": s}


def apply_channel(expansion: PauliExpansion, spec: ChannelSpec) -> PauliExpansion:
    """Compose the channel onto the expansion (channels on one qubit commute)."""
    qs = spec.qubits(expansion.lattice)
    f = np.ones(expansion.n_qubits)
    f[qs] = 1.0 - 2.0 * spec.p
    if spec.kind == BIT_FLIP:
        return expansion.rescaled(fx=f)
    return expansion.rescaled(fz=f)


def apply_channels(expansion: PauliExpansion, specs) -> PauliExpansion:
    for s in specs:
        expansion = apply_channel(expansion, s)
    return expansion


def kraus_operators(spec: ChannelSpec, n_qubits: int, qubit: int) -> list[tuple[float, PauliString]]:
    """``(amplitude, Pauli)`` Kraus pairs of the channel on one qubit."""
    return [(np.sqrt(1.0 - spec.p), PauliString.identity(n_qubits)),
            (np.sqrt(spec.p), PauliString.single(n_qubits, qubit, spec.pauli))]


def apply_channel_dense(rho: np.ndarray, spec: ChannelSpec, lattice: LiebLattice) -> np.ndarray:
    """Kraus-form reference: ``sum_k K rho K^dagger`` qubit by qubit."""
    n = lattice.n_qubits
    for q in spec.qubits(lattice):
        P = PauliString.single(n, q, spec.pauli)
        rho = (1.0 - spec.p) * rho + spec.p * apply_right(apply_left(P, rho), P)
        if np.isrealobj(rho) is False and np.abs(rho.imag).max() < 1e-14:
            rho = rho.real
    return rho


# -- symmetry -------------------------------------------------------------------

@dataclass(frozen=True)
class SymmetryVerdict:
    zero_form: str
    one_form: str

    def to_dict(self) -> dict:
        return {"zero_form": self.zero_form, "one_form": self.one_form}


def zero_form_generator(lattice: LiebLattice) -> PauliString:
    """``prod_v tau^x`` over the A sublattice."""
    n = lattice.n_qubits
    return PauliString(n, x=(1 << lattice.n_vertices) - 1)


def one_form_generators(lattice: LiebLattice) -> list[PauliString]:
    """``prod sigma^x`` along face loops and, on the torus, both windings."""
    return [string_operator(lattice, loop) for loop in one_form_loops(lattice)]


def _verdict(kraus: list[PauliString], gens: list[PauliString]) -> str:
    for P in kraus:
        if not all(commutes(P, g) for g in gens):
            # a Pauli Kraus operator either commutes or anticommutes with a
            # Pauli generator, so the channel still commutes with conjugation
            return AVERAGE
    return EXACT


def classify_symmetry(lattice: LiebLattice, specs) -> SymmetryVerdict:
    """Exact when every Kraus operator commutes with every generator, average
    when only the channel as a whole is covariant.  Pauli channels always
    preserve the doubled symmetry, so ``broken`` cannot occur here."""
    if isinstance(specs, ChannelSpec):
        specs = [specs]
    n = lattice.n_qubits
    kraus = [PauliString.single(n, q, s.pauli) for s in specs if s.p > 0 for q in s.qubits(lattice)]
    zero = [zero_form_generator(lattice)]
    one = one_form_generators(lattice)
    return SymmetryVerdict(_verdict(kraus, zero), _verdict(kraus, one))


def dense_symmetry_check(rho: np.ndarray, generator: PauliString, atol: float = 1e-10) -> str:
    """Classify a symmetry from the state itself: ``U rho = rho`` is exact,
    ``U rho U^dagger = rho`` is average, anything else is broken."""
    left = apply_left(generator, rho)
    if np.allclose(left, rho, atol=atol):
        return EXACT
    if np.allclose(apply_right(left, generator), rho, atol=atol):
        return AVERAGE
    return BROKEN
