"""
Dense linear-algebra substrate: pure states, Hermitian operators, Bloch axes.

Registers in this package never exceed a handful of qubits, so everything is a
plain dense numpy array.  ``QuantumState`` and ``HermitianOperator`` are thin
immutable wrappers that validate on construction; every function here also
accepts raw array-likes.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Sequence, Union

import numpy as np

from .errors import InvalidAxisError

NORM_TOL = 1e-12
HERMITIAN_SYMMETRIZE_TOL = 1e-12
HERMITIAN_REJECT_TOL = 1e-9
_ACCEPT_NORM_TOL = 1e-9

IDENTITY2 = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (PAULI_X, PAULI_Y, PAULI_Z)

for _m in (IDENTITY2, *PAULIS):
    _m.setflags(write=False)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex, copy=True)
    a.setflags(write=False)
    return a


class QuantumState:
    """Normalized pure state vector.

    Parameters
    ----------
    amplitudes:
        Complex amplitudes.  Vectors whose norm differs from one by more than
        1e-9 are rejected unless ``normalize=True``; smaller drift is rescaled.
    """

    __slots__ = ("_data",)

    def __init__(self, amplitudes, normalize: bool = False):
        data = np.asarray(amplitudes, dtype=complex).reshape(-1)
        if data.size == 0:
            raise ValueError("empty state vector")
        norm = np.linalg.norm(data)
        if norm == 0.0:
            raise ValueError("zero state vector")
        if not normalize and abs(norm - 1.0) > _ACCEPT_NORM_TOL:
            raise ValueError(f"state is not normalized (norm={norm:.15g})")
        self._data = _frozen(data / norm)

    @classmethod
    def basis(cls, dim: int, index: int) -> "QuantumState":
        if not 0 <= index < dim:
            raise ValueError(f"basis index {index} out of range for dim {dim}")
        v = np.zeros(dim, dtype=complex)
        v[index] = 1.0
        return cls(v)

    @classmethod
    def from_bits(cls, bits: str) -> "QuantumState":
        """Computational basis state from a bitstring, qubit 0 leftmost."""
        if not bits or set(bits) - {"0", "1"}:
            raise ValueError(f"invalid bitstring {bits!r}")
        return cls.basis(2 ** len(bits), int(bits, 2))

    @property
    def amplitudes(self) -> np.ndarray:
        return self._data

    @property
    def dim(self) -> int:
        return self._data.size

    @property
    def num_qubits(self) -> int:
        n = self.dim.bit_length() - 1
        if 2**n != self.dim:
            raise ValueError(f"dimension {self.dim} is not a power of two")
        return n

    def __array__(self, dtype=None, copy=None):
        return self._data if dtype is None else self._data.astype(dtype)

    def __len__(self):
        return self.dim

    def __repr__(self):
        return f"QuantumState(dim={self.dim}, amplitudes={np.array2string(self._data, precision=4)})"


class HermitianOperator:
    """Dense Hermitian matrix, symmetrized on construction.

    Deviations from Hermiticity up to 1e-9 are removed by averaging with the
    conjugate transpose; anything larger raises ``ValueError``.
    """

    __slots__ = ("_data",)

    def __init__(self, entries):
        m = np.asarray(entries, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"operator must be square, got shape {m.shape}")
        dev = np.max(np.abs(m - m.conj().T)) if m.size else 0.0
        if dev > HERMITIAN_REJECT_TOL:
            raise ValueError(f"operator is not Hermitian (max deviation {dev:.3g})")
        if dev > 0.0:
            m = 0.5 * (m + m.conj().T)
        self._data = _frozen(m)

    @property
    def entries(self) -> np.ndarray:
        return self._data

    @property
    def dim(self) -> int:
        return self._data.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self._data if dtype is None else self._data.astype(dtype)

    def __matmul__(self, other):
        return self._data @ np.asarray(other)

    def __repr__(self):
        return f"HermitianOperator(dim={self.dim})"


@dataclass(frozen=True)
class BlochAxis:
    """Unit vector on the Bloch sphere."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        n2 = self.x**2 + self.y**2 + self.z**2
        if not np.isfinite(n2) or abs(n2 - 1.0) > NORM_TOL:
            raise InvalidAxisError(f"axis ({self.x}, {self.y}, {self.z}) is not a unit vector")

    @classmethod
    def from_vector(cls, v: Sequence[float], normalize: bool = True) -> "BlochAxis":
        v = np.asarray(v, dtype=float).reshape(-1)
        if v.size != 3:
            raise InvalidAxisError(f"axis needs three components, got {v.size}")
        n = np.linalg.norm(v)
        if n == 0.0:
            raise InvalidAxisError("zero-length axis")
        if normalize:
            v = v / n
        return cls(float(v[0]), float(v[1]), float(v[2]))

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    def dot_sigma(self) -> np.ndarray:
        return self.x * PAULI_X + self.y * PAULI_Y + self.z * PAULI_Z


X_AXIS = BlochAxis(1.0, 0.0, 0.0)
Y_AXIS = BlochAxis(0.0, 1.0, 0.0)
Z_AXIS = BlochAxis(0.0, 0.0, 1.0)

Operand = Union[QuantumState, HermitianOperator, np.ndarray]


def tensor(*operands: Operand):
    """Kronecker product of states or operators, left factor most significant.

    Wrapped inputs give a wrapped result of the same kind; raw arrays give a
    raw array.
    """
    if not operands:
        raise ValueError("tensor needs at least one operand")
    kinds = {type(o) for o in operands}
    if len(kinds) > 1 and kinds & {QuantumState, HermitianOperator}:
        raise TypeError("cannot mix states and operators in a tensor product")
    arrays = [np.asarray(o) for o in operands]
    ndims = {a.ndim for a in arrays}
    if len(ndims) > 1:
        raise TypeError("cannot mix vectors and matrices in a tensor product")
    out = reduce(np.kron, arrays)
    kind = next(iter(kinds))
    if kind is QuantumState:
        return QuantumState(out)
    if kind is HermitianOperator:
        return HermitianOperator(out)
    return out


def bloch_projectors(axis: BlochAxis) -> tuple[HermitianOperator, HermitianOperator]:
    """Return ``(P+, P-)`` with ``P± = (1 ± n.sigma) / 2``."""
    if not isinstance(axis, BlochAxis):
        axis = BlochAxis.from_vector(axis, normalize=False)
    ns = axis.dot_sigma()
    return HermitianOperator(0.5 * (IDENTITY2 + ns)), HermitianOperator(0.5 * (IDENTITY2 - ns))


def bloch_eigenstates(axis: BlochAxis) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvectors ``|n+>`` and ``|n->`` of ``n.sigma``.

    Phase convention: the component of largest magnitude is real positive.
    """
    vals, vecs = np.linalg.eigh(axis.dot_sigma())
    minus, plus = vecs[:, 0], vecs[:, 1]
    return fix_phase(plus), fix_phase(minus)


def fix_phase(v: np.ndarray) -> np.ndarray:
    """Rotate the global phase so the largest-magnitude component is real positive."""
    v = np.asarray(v, dtype=complex)
    k = int(np.argmax(np.abs(v)))
    if v[k] == 0:
        return v.copy()
    return v * (abs(v[k]) / v[k])


def inner(a: Operand, b: Operand) -> complex:
    a, b = np.asarray(a), np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return complex(np.vdot(a, b))


def fidelity(a: Operand, b: Operand) -> float:
    """Pure-state fidelity ``|<a|b>|``, clipped into [0, 1]."""
    return float(min(1.0, abs(inner(a, b))))


def bures_angle(a: Operand, b: Operand) -> float:
    return float(np.arccos(fidelity(a, b)))


def hs_norm(a: Operand) -> float:
    """Hilbert-Schmidt norm ``sqrt(Tr(A^dagger A))``."""
    a = np.asarray(a)
    return float(np.sqrt(np.real(np.vdot(a, a))))


def anticommutator(a: Operand, b: Operand) -> np.ndarray:
    a, b = np.asarray(a), np.asarray(b)
    return a @ b + b @ a
