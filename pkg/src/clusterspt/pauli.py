"""Exact Pauli-string arithmetic on bit masks.

A string is ``i**phase * P_0 ⊗ P_1 ⊗ ...`` with ``P_q`` fixed by the bit pair
``(x_q, z_q)``: ``(0,0)=I, (1,0)=X, (0,1)=Z, (1,1)=Y``.  Masks are Python
ints so there is no qubit limit.  Qubit ``q`` is bit ``q`` of a dense basis
index (little endian).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DENSE_QUBIT_BUDGET = 14

_LETTERS = {(0, 0): "I", (1, 0): "X", (0, 1): "Z", (1, 1): "Y"}
_FROM_LETTER = {v: k for k, v in _LETTERS.items()}
_PHASES = {0: 1, 1: 1j, 2: -1, 3: -1j}


def _pop(m: int) -> int:
    return bin(m).count("1")


@dataclass(frozen=True)
class PauliString:
    n: int
    x: int = 0
    z: int = 0
    phase: int = 0  # power of i

    def __post_init__(self):
        full = (1 << self.n) - 1
        if self.x & ~full or self.z & ~full:
            raise ValueError("mask has bits beyond the qubit count")
        object.__setattr__(self, "phase", self.phase % 4)

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls(n)

    @classmethod
    def from_label(cls, label: str, phase: int = 0) -> "PauliString":
        """``"XYZ"`` puts X on qubit 0, Y on 1, Z on 2."""
        x = z = 0
        for q, ch in enumerate(label):
            bx, bz = _FROM_LETTER[ch]
            x |= bx << q
            z |= bz << q
        return cls(len(label), x, z, phase)

    @classmethod
    def single(cls, n: int, q: int, letter: str) -> "PauliString":
        bx, bz = _FROM_LETTER[letter]
        return cls(n, bx << q, bz << q)

    @property
    def label(self) -> str:
        return "".join(_LETTERS[(self.x >> q & 1, self.z >> q & 1)] for q in range(self.n))

    @property
    def coefficient(self) -> complex:
        return _PHASES[self.phase]

    @property
    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0

    @property
    def weight(self) -> int:
        return _pop(self.x | self.z)

    def __mul__(self, other: "PauliString") -> "PauliString":
        return multiply(self, other)

    def __neg__(self) -> "PauliString":
        return PauliString(self.n, self.x, self.z, self.phase + 2)

    def __repr__(self) -> str:
        sign = {0: "+", 1: "+i", 2: "-", 3: "-i"}[self.phase]
        return f"PauliString({sign}{self.label})"

    def restrict(self, region: int) -> "PauliString":
        return PauliString(self.n, self.x & region, self.z & region, 0)

    def to_dense(self) -> np.ndarray:
        return pauli_to_dense(self)


def multiply(p: PauliString, q: PauliString) -> PauliString:
    if p.n != q.n:
        raise ValueError(f"qubit counts differ: {p.n} vs {q.n}")
    # convert to X^x Z^z form (Y = i X Z), multiply, convert back
    x, z = p.x ^ q.x, p.z ^ q.z
    phase = (p.phase + q.phase + _pop(p.x & p.z) + _pop(q.x & q.z)
             + 2 * _pop(p.z & q.x) - _pop(x & z))
    return PauliString(p.n, x, z, phase)


def commutes(p: PauliString, q: PauliString, region: int | None = None) -> bool:
    """Symplectic commutation test, optionally on the factors inside ``region``."""
    if p.n != q.n:
        raise ValueError(f"qubit counts differ: {p.n} vs {q.n}")
    m = (p.x & q.z) ^ (q.x & p.z)
    if region is not None:
        m &= region
    return _pop(m) % 2 == 0


def y_count(p: PauliString, region: int | None = None) -> int:
    m = p.x & p.z
    if region is not None:
        m &= region
    return _pop(m)


def partial_transpose_sign(p: PauliString, region: int) -> int:
    """``P^{T_region} = sign * P``; only Y factors change under transposition."""
    return -1 if y_count(p, region) % 2 else 1


def mask_of(qubits) -> int:
    m = 0
    for q in qubits:
        m |= 1 << q
    return m


def _check_dense(n: int):
    if n > DENSE_QUBIT_BUDGET:
        raise ValueError(f"{n} qubits exceed the dense budget of {DENSE_QUBIT_BUDGET}")


def monomial(p: PauliString) -> tuple[np.ndarray, np.ndarray]:
    """Column -> (row, value) form: ``P |b> = value[b] |row[b]>``."""
    b = np.arange(1 << p.n, dtype=np.int64)
    zb = np.bitwise_count(b & p.z).astype(np.int64)
    coeff = (1j) ** ((p.phase + _pop(p.x & p.z)) % 4)
    vals = coeff * np.where(zb % 2, -1.0, 1.0)
    return b ^ p.x, vals


def pauli_to_dense(p: PauliString) -> np.ndarray:
    _check_dense(p.n)
    rows, vals = monomial(p)
    out = np.zeros((1 << p.n, 1 << p.n), dtype=complex)
    out[rows, np.arange(1 << p.n)] = vals
    return out


def dense_from_terms(n: int, terms, real: bool = True) -> np.ndarray:
    """Sum ``coef * P`` over ``(coef, PauliString)`` pairs as a dense matrix."""
    _check_dense(n)
    dim = 1 << n
    out = np.zeros((dim, dim), dtype=float if real else complex)
    cols = np.arange(dim)
    for coef, p in terms:
        if coef == 0:
            continue
        rows, vals = monomial(p)
        v = coef * vals
        if real:
            if np.abs(v.imag).max() > 1e-12:
                raise ValueError("term is not real; build with real=False")
            v = v.real
        out[rows, cols] += v
    return out


def apply_left(p: PauliString, m: np.ndarray) -> np.ndarray:
    """``P @ m`` using the monomial structure of ``P``."""
    rows, vals = monomial(p)
    out = np.empty(m.shape, dtype=np.result_type(m.dtype, vals.dtype))
    out[rows] = vals[:, None] * m
    return out


def apply_right(m: np.ndarray, p: PauliString) -> np.ndarray:
    """``m @ P``."""
    rows, vals = monomial(p)
    return m[:, rows] * vals[None, :]


def partial_transpose_dense(rho: np.ndarray, qubits, n: int) -> np.ndarray:
    """Reference partial transpose by tensor-index swapping."""
    t = rho.reshape([2] * (2 * n))
    # axis k of the row block holds qubit n-1-k (little-endian bit order)
    perm = list(range(2 * n))
    for q in qubits:
        a, b = n - 1 - q, 2 * n - 1 - q
        perm[a], perm[b] = perm[b], perm[a]
    return t.transpose(perm).reshape(rho.shape)
