"""
Hamiltonian paths for controlled adiabatic evolutions (CAE).

A CAE Hamiltonian on a system S and ancilla A has the block form
``H(s) = sum_k P_k (x) H_k(s)`` with orthogonal projectors ``P_k`` on S and
ancilla Hamiltonians ``H_k``.  All paths are functions of the dimensionless
time ``s = t / tau`` in [0, 1].  Units: hbar = 1, energies in the same units as
``omega``.

The gate builders use the rotating-field ancilla path

    H_xi(s) = -omega [cos(theta0 s) sz + sin(theta0 s) (cos(xi) sx + sin(xi) sy)]

whose counter-diabatic partner is the constant operator
``theta0 / (2 tau) (cos(xi) sy - sin(xi) sx)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import NumericalError
from .qcore import (
    IDENTITY2,
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    BlochAxis,
    HermitianOperator,
    bloch_eigenstates,
    fix_phase,
)

MAX_CONTROLS = 5
PROJECTOR_TOL = 1e-9
CD_STEP = 1e-6
RICHARDSON_TRIGGER = 1e-7


# --------------------------------------------------------------------------
# operator paths


class OperatorPath:
    """Map from dimensionless time ``s`` to a Hermitian matrix.

    ``func`` evaluates a single ``s``; ``batch`` (optional) evaluates an array
    of times at once and returns shape ``(n, dim, dim)``.
    """

    def __init__(self, func: Callable[[float], np.ndarray], dim: int,
                 batch: Optional[Callable[[np.ndarray], np.ndarray]] = None):
        self._func = func
        self._batch = batch
        self.dim = dim

    def __call__(self, s: float) -> np.ndarray:
        return np.asarray(self._func(float(s)), dtype=complex)

    def sample(self, s) -> np.ndarray:
        s = np.atleast_1d(np.asarray(s, dtype=float))
        if self._batch is not None:
            return np.asarray(self._batch(s), dtype=complex)
        out = np.empty((s.size, self.dim, self.dim), dtype=complex)
        for j, sj in enumerate(s):
            out[j] = self._func(float(sj))
        return out

    def __add__(self, other: "OperatorPath") -> "OperatorPath":
        if other.dim != self.dim:
            raise ValueError("dimension mismatch in path sum")
        return OperatorPath(lambda s: self(s) + other(s), self.dim,
                            lambda s: self.sample(s) + other.sample(s))

    @classmethod
    def constant(cls, matrix) -> "ConstantPath":
        return ConstantPath(matrix)


class ConstantPath(OperatorPath):
    """Time-independent operator viewed as a path."""

    def __init__(self, matrix):
        m = np.array(HermitianOperator(matrix).entries)
        m.setflags(write=False)
        self.matrix = m
        super().__init__(lambda s: m, m.shape[0],
                         lambda s: np.broadcast_to(m, (np.size(s),) + m.shape))


class GatePath(OperatorPath):
    """The ancilla path ``H_xi(s)`` of the gate construction."""

    def __init__(self, xi: float, theta0: float, omega: float):
        _check_theta0(theta0)
        _check_positive(omega, "omega")
        self.xi = float(xi)
        self.theta0 = float(theta0)
        self.omega = float(omega)
        self._field = math.cos(xi) * PAULI_X + math.sin(xi) * PAULI_Y
        super().__init__(self._eval, 2, self._eval_batch)

    def _eval(self, s):
        th = self.theta0 * s
        return -self.omega * (math.cos(th) * PAULI_Z + math.sin(th) * self._field)

    def _eval_batch(self, s):
        th = self.theta0 * s
        return -self.omega * (np.cos(th)[:, None, None] * PAULI_Z
                              + np.sin(th)[:, None, None] * self._field)


def gate_hamiltonian(xi: float, theta0: float, omega: float) -> GatePath:
    """Ancilla path ``H_xi(s)``; eigenvalues are ``+-omega`` for every ``s``."""
    return GatePath(xi, theta0, omega)


def cd_analytic(xi: float, theta0: float, tau: float) -> np.ndarray:
    """Constant counter-diabatic term for the gate path ``H_xi``."""
    _check_positive(tau, "tau")
    return theta0 / (2.0 * tau) * (math.cos(xi) * PAULI_Y - math.sin(xi) * PAULI_X)


# --------------------------------------------------------------------------
# schedules and gate specifications


@dataclass(frozen=True)
class Schedule:
    """Interpolation functions with ``f(0)=g(1)=1`` and ``f(1)=g(0)=0``."""

    f: Callable[[float], float]
    g: Callable[[float], float]

    def __post_init__(self):
        checks = {"f(0)": (self.f(0.0), 1.0), "f(1)": (self.f(1.0), 0.0),
                  "g(0)": (self.g(0.0), 0.0), "g(1)": (self.g(1.0), 1.0)}
        for name, (got, want) in checks.items():
            if abs(got - want) > 1e-12:
                raise ValueError(f"schedule boundary condition violated: {name}={got}, expected {want}")

    @classmethod
    def linear(cls) -> "Schedule":
        return cls(lambda s: 1.0 - s, lambda s: s)

    @classmethod
    def trigonometric(cls) -> "Schedule":
        return cls(lambda s: math.cos(math.pi * s / 2), lambda s: math.sin(math.pi * s / 2))


def _check_theta0(theta0):
    if not (0.0 < theta0 <= math.pi + 1e-12):
        raise ValueError(f"theta0 must lie in (0, pi], got {theta0}")


def _check_positive(value, name):
    if not (value > 0.0 and math.isfinite(value)):
        raise ValueError(f"{name} must be positive and finite, got {value}")


@dataclass(frozen=True)
class GateSpec:
    """Parameters of one CAE rotation gate.

    Rotation by ``phi`` about ``axis`` on the target qubit, conditioned on all
    ``controls`` control qubits being 1.  ``theta0`` sets the ancilla sweep
    angle (``pi`` makes the gate deterministic), ``omega`` the energy scale and
    ``tau`` the total evolution time.
    """

    axis: BlochAxis
    phi: float
    controls: int = 0
    theta0: float = math.pi
    omega: float = 1.0
    tau: float = 1.0

    def __post_init__(self):
        if not isinstance(self.axis, BlochAxis):
            object.__setattr__(self, "axis", BlochAxis.from_vector(self.axis))
        if not isinstance(self.controls, (int, np.integer)) or not 0 <= self.controls <= MAX_CONTROLS:
            raise ValueError(f"controls must be an integer in [0, {MAX_CONTROLS}], got {self.controls}")
        if not math.isfinite(self.phi):
            raise ValueError("phi must be finite")
        _check_theta0(self.theta0)
        _check_positive(self.omega, "omega")
        _check_positive(self.tau, "tau")

    @property
    def system_qubits(self) -> int:
        return self.controls + 1

    @property
    def system_dim(self) -> int:
        return 2 ** (self.controls + 1)

    @property
    def tau_omega(self) -> float:
        return self.tau * self.omega

    def with_tau(self, tau: float) -> "GateSpec":
        return replace(self, tau=tau)

    def same_gate(self, other: "GateSpec") -> bool:
        """Equal up to the evolution time."""
        return replace(self, tau=other.tau) == other


# --------------------------------------------------------------------------
# piecewise controlled Hamiltonians


@dataclass(frozen=True)
class Block:
    """One term ``P (x) (H(s) + H_CD(s))`` of a piecewise Hamiltonian."""

    projector: np.ndarray
    path: OperatorPath
    cd: Optional[OperatorPath] = None
    xi: Optional[float] = None

    def matrix(self, s: float, part: str = "total") -> np.ndarray:
        if part == "adiabatic":
            return self.path(s)
        if part == "cd":
            return self.cd(s) if self.cd is not None else np.zeros((self.path.dim,) * 2, complex)
        if part != "total":
            raise ValueError(f"unknown part {part!r}")
        h = self.path(s)
        return h + self.cd(s) if self.cd is not None else h

    def sample(self, s: np.ndarray, part: str = "total") -> np.ndarray:
        if part == "cd":
            if self.cd is None:
                return np.zeros((np.size(s), self.path.dim, self.path.dim), complex)
            return self.cd.sample(s)
        h = self.path.sample(s)
        if part == "adiabatic" or self.cd is None:
            return h
        return h + self.cd.sample(s)


@dataclass(frozen=True)
class PiecewiseControlledHamiltonian:
    """``H(s) = sum_k P_k (x) H_k(s)`` with a complete orthogonal projector set."""

    blocks: tuple
    spec: Optional[GateSpec] = None
    system_dim: int = field(init=False)
    ancilla_dim: int = field(init=False)

    def __post_init__(self):
        blocks = tuple(self.blocks)
        if not blocks:
            raise ValueError("at least one block is required")
        object.__setattr__(self, "blocks", blocks)
        d_s = blocks[0].projector.shape[0]
        d_a = blocks[0].path.dim
        for b in blocks:
            if b.projector.shape != (d_s, d_s):
                raise ValueError("projectors must share one system dimension")
            if b.path.dim != d_a or (b.cd is not None and b.cd.dim != d_a):
                raise ValueError("ancilla paths must share one dimension")
        check_projectors([b.projector for b in blocks])
        object.__setattr__(self, "system_dim", d_s)
        object.__setattr__(self, "ancilla_dim", d_a)

    @property
    def dim(self) -> int:
        return self.system_dim * self.ancilla_dim

    @property
    def is_superadiabatic(self) -> bool:
        return any(b.cd is not None for b in self.blocks)

    def __call__(self, s: float) -> np.ndarray:
        return self._assemble(s, "total")

    def adiabatic(self, s: float) -> np.ndarray:
        return self._assemble(s, "adiabatic")

    def counter_diabatic(self, s: float) -> np.ndarray:
        return self._assemble(s, "cd")

    def block_matrices(self, s: float, part: str = "total") -> list:
        return [b.matrix(s, part) for b in self.blocks]

    def _assemble(self, s, part):
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for b in self.blocks:
            out += np.kron(b.projector, b.matrix(s, part))
        return out

    def without_cd(self) -> "PiecewiseControlledHamiltonian":
        return PiecewiseControlledHamiltonian(
            tuple(replace(b, cd=None) for b in self.blocks), self.spec)


def check_projectors(projectors: Sequence[np.ndarray], tol: float = PROJECTOR_TOL) -> None:
    """Raise ``ValueError`` unless the projectors are orthogonal and complete."""
    ps = [np.asarray(p, dtype=complex) for p in projectors]
    d = ps[0].shape[0]
    total = np.zeros((d, d), dtype=complex)
    for i, p in enumerate(ps):
        if np.max(np.abs(p - p.conj().T)) > tol or np.max(np.abs(p @ p - p)) > tol:
            raise ValueError(f"projector {i} is not an orthogonal projector")
        for j in range(i):
            if np.max(np.abs(p @ ps[j])) > tol:
                raise ValueError(f"projectors {j} and {i} are not orthogonal")
        total += p
    if np.max(np.abs(total - np.eye(d))) > tol:
        raise ValueError("projectors do not sum to the identity")


def generic_cae(schedule: Schedule, base, finals: Sequence, projectors: Sequence
                ) -> PiecewiseControlledHamiltonian:
    """Blocks ``H_k(s) = g(s) H_k^(f) + f(s) H^(b)`` for a general CAE."""
    if len(finals) != len(projectors):
        raise ValueError(f"{len(finals)} final Hamiltonians for {len(projectors)} projectors")
    hb = np.asarray(HermitianOperator(base).entries)
    blocks = []
    for pk, hf in zip(projectors, finals):
        hf = np.asarray(HermitianOperator(hf).entries)
        if hf.shape != hb.shape:
            raise ValueError("final and base Hamiltonians differ in dimension")

        def func(s, hf=hf):
            return schedule.g(s) * hf + schedule.f(s) * hb

        blocks.append(Block(np.array(np.asarray(pk), dtype=complex), OperatorPath(func, hb.shape[0])))
    return PiecewiseControlledHamiltonian(tuple(blocks))


def system_basis(spec: GateSpec) -> list:
    """Orthonormal system vectors ``|m, n_eps>`` keyed by ``(m, eps)``.

    Controls occupy the leading tensor factors in the computational basis,
    the target is written in the eigenbasis of ``axis . sigma``.
    """
    plus, minus = bloch_eigenstates(spec.axis)
    n_ctrl = 2**spec.controls
    out = []
    for m in range(n_ctrl):
        e_m = np.zeros(n_ctrl, dtype=complex)
        e_m[m] = 1.0
        out.append(((m, +1), np.kron(e_m, plus)))
        out.append(((m, -1), np.kron(e_m, minus)))
    return out


def gate_cae(spec: GateSpec) -> PiecewiseControlledHamiltonian:
    """Adiabatic gate Hamiltonian: every block carries ``H_0`` except
    ``|N-1, n_-><N-1, n_-|`` which carries ``H_phi``."""
    h0 = gate_hamiltonian(0.0, spec.theta0, spec.omega)
    hphi = h0 if spec.phi == 0.0 else gate_hamiltonian(spec.phi, spec.theta0, spec.omega)
    last = 2**spec.controls - 1
    blocks = []
    for (m, eps), v in system_basis(spec):
        rotated = m == last and eps == -1
        path = hphi if rotated else h0
        blocks.append(Block(np.outer(v, v.conj()), path, xi=path.xi))
    return PiecewiseControlledHamiltonian(tuple(blocks), spec)


def single_qubit_cae(spec: GateSpec) -> PiecewiseControlledHamiltonian:
    if spec.controls != 0:
        raise ValueError("single_qubit_cae needs controls=0")
    return gate_cae(spec)


def n_controlled_cae(spec: GateSpec) -> PiecewiseControlledHamiltonian:
    if spec.controls < 1:
        raise ValueError("n_controlled_cae needs controls >= 1")
    return gate_cae(spec)


controlled_cae = n_controlled_cae


# --------------------------------------------------------------------------
# spectral paths


@dataclass(frozen=True)
class BlockSpectrum:
    """Instantaneous eigensystem of one ancilla block.

    ``vectors(s)`` returns eigenvectors as columns ordered by ascending energy.
    ``d_vectors(s)``, when present, is the exact ``d/ds`` of those columns.
    ``system_vectors`` spans the range of the block projector.
    """

    projector: np.ndarray
    system_vectors: np.ndarray
    energies: Callable[[float], np.ndarray]
    vectors: Callable[[float], np.ndarray]
    d_vectors: Optional[Callable[[float], np.ndarray]] = None


@dataclass(frozen=True)
class Level:
    block: int
    system_index: int
    ancilla_index: int


@dataclass(frozen=True)
class SpectralPath:
    """Gauge-fixed instantaneous eigenbasis of a piecewise Hamiltonian.

    Composite eigenvectors are ``|lambda> (x) |eps_i(s)>`` for every vector
    ``lambda`` spanning a block projector.
    """

    blocks: tuple
    tau: float

    @property
    def system_dim(self) -> int:
        return self.blocks[0].projector.shape[0]

    @property
    def ancilla_dim(self) -> int:
        return self.blocks[0].vectors(0.0).shape[0]

    @property
    def levels(self) -> list:
        out = []
        for k, b in enumerate(self.blocks):
            for r in range(b.system_vectors.shape[1]):
                for i in range(self.ancilla_dim):
                    out.append(Level(k, r, i))
        return out

    def energy(self, level: Level, s: float) -> float:
        return float(self.blocks[level.block].energies(s)[level.ancilla_index])

    def vector(self, level: Level, s: float) -> np.ndarray:
        b = self.blocks[level.block]
        return np.kron(b.system_vectors[:, level.system_index], b.vectors(s)[:, level.ancilla_index])

    def d_vector(self, level: Level, s: float, h: float = CD_STEP) -> np.ndarray:
        """``d/ds`` of a composite eigenvector (exact when available)."""
        b = self.blocks[level.block]
        if b.d_vectors is not None:
            da = b.d_vectors(s)[:, level.ancilla_index]
        else:
            da = _column_derivative(b.vectors, s, h)[:, level.ancilla_index]
        return np.kron(b.system_vectors[:, level.system_index], da)


def _range_basis(p: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(p)
    cols = [fix_phase(vecs[:, j]) for j in range(len(vals)) if vals[j] > 0.5]
    return np.stack(cols, axis=1)


def _gate_vectors(xi, theta0):
    ph = np.exp(1j * xi)

    def vectors(s):
        c, sn = math.cos(theta0 * s / 2), math.sin(theta0 * s / 2)
        return np.array([[c, -sn], [ph * sn, ph * c]], dtype=complex)

    def d_vectors(s):
        c, sn = math.cos(theta0 * s / 2), math.sin(theta0 * s / 2)
        return 0.5 * theta0 * np.array([[-sn, -c], [ph * c, -ph * sn]], dtype=complex)

    return vectors, d_vectors


def spectral_path(spec: GateSpec) -> SpectralPath:
    """Closed-form eigensystem of the gate Hamiltonian.

    Per block, column 0 is the ground state
    ``cos(theta0 s/2)|0> + e^{i xi} sin(theta0 s/2)|1>`` (energy ``-omega``)
    and column 1 the excited state (energy ``+omega``).
    """
    h = gate_cae(spec)
    energies = np.array([-spec.omega, spec.omega])
    cache = {}
    blocks = []
    for b in h.blocks:
        if b.xi not in cache:
            cache[b.xi] = _gate_vectors(b.xi, spec.theta0)
        vec, dvec = cache[b.xi]
        blocks.append(BlockSpectrum(b.projector, _range_basis(b.projector),
                                    lambda s, e=energies: e, vec, dvec))
    return SpectralPath(tuple(blocks), spec.tau)


def _gauge_columns(vecs: np.ndarray) -> np.ndarray:
    return np.stack([fix_phase(vecs[:, j]) for j in range(vecs.shape[1])], axis=1)


def numeric_spectral_path(h: PiecewiseControlledHamiltonian, tau: float) -> SpectralPath:
    """Eigensystem by dense diagonalization of each adiabatic block.

    Each eigenvector is gauge fixed so its largest component is real positive.
    Continuity between neighbouring samples is restored by the consumers
    (see :func:`align_columns`).
    """
    blocks = []
    for b in h.blocks:
        def energies(s, path=b.path):
            return np.linalg.eigvalsh(path(s))

        def vectors(s, path=b.path):
            return _gauge_columns(np.linalg.eigh(path(s))[1])

        blocks.append(BlockSpectrum(b.projector, _range_basis(b.projector), energies, vectors))
    return SpectralPath(tuple(blocks), tau)


def align_columns(vecs: np.ndarray, reference: np.ndarray) -> np.ndarray:
    """Rephase each column so its overlap with the reference column is real positive."""
    ov = np.einsum("ij,ij->j", reference.conj(), vecs)
    mag = np.abs(ov)
    phase = np.where(mag > 0, ov / np.where(mag > 0, mag, 1.0), 1.0)
    return vecs * phase.conj()[None, :]


def _column_derivative(vectors: Callable, s: float, h: float) -> np.ndarray:
    """``d/ds`` of gauge-aligned eigenvector columns by finite differences.

    Central differences with step ``h``; one-sided three-point stencils
    within ``2h`` of the ends of [0, 1].  When steps ``h`` and ``2h`` disagree
    by more than 1e-7 the Richardson combination is returned.
    """
    v0 = vectors(s)

    def at(x):
        return align_columns(vectors(x), v0)

    def estimate(step):
        if s - 2 * step < 0.0:
            return (-3 * v0 + 4 * at(s + step) - at(s + 2 * step)) / (2 * step)
        if s + 2 * step > 1.0:
            return (3 * v0 - 4 * at(s - step) + at(s - 2 * step)) / (2 * step)
        return (at(s + step) - at(s - step)) / (2 * step)

    d1 = estimate(h)
    d2 = estimate(2 * h)
    if np.max(np.abs(d1 - d2)) > RICHARDSON_TRIGGER:
        return (4 * d1 - d2) / 3
    return d1


def cd_block(vectors: Callable, s: float, tau: float, h: float = CD_STEP,
             d_vectors: Optional[Callable] = None) -> np.ndarray:
    """Counter-diabatic term for one nondegenerate ancilla block.

    ``i sum_n (|d_t n><n| + <d_t n|n> |n><n|)`` with ``d_t = (1/tau) d_s``.
    """
    _check_positive(tau, "tau")
    v = vectors(s)
    dv = d_vectors(s) if d_vectors is not None else _column_derivative(vectors, s, h)
    dv = dv / tau
    berry = np.einsum("ij,ij->j", dv.conj(), v)
    out = 1j * (dv @ v.conj().T + (v * berry[None, :]) @ v.conj().T)
    return 0.5 * (out + out.conj().T)


def cd_numeric_blocks(path: SpectralPath, s: float, tau: Optional[float] = None,
                      h: float = CD_STEP) -> list:
    """Per-block counter-diabatic matrices from finite differences of the eigenvectors."""
    tau = path.tau if tau is None else tau
    return [cd_block(b.vectors, s, tau, h) for b in path.blocks]


def cd_numeric(path: SpectralPath, s: float, tau: Optional[float] = None,
               h: float = CD_STEP) -> np.ndarray:
    """Composite ``sum_l P_l (x) H_l^CD(s)`` built blockwise by finite differences."""
    mats = cd_numeric_blocks(path, s, tau, h)
    d = path.system_dim * path.ancilla_dim
    out = np.zeros((d, d), dtype=complex)
    for b, m in zip(path.blocks, mats):
        out += np.kron(b.projector, m)
    return out


def superadiabatic(h: PiecewiseControlledHamiltonian, spec: Optional[GateSpec] = None,
                   tau: Optional[float] = None) -> PiecewiseControlledHamiltonian:
    """Attach counter-diabatic terms: every block becomes ``H_k(s) + H_k^CD``.

    Gate Hamiltonians get the constant closed-form term.  Hamiltonians without
    a gate spec (e.g. from :func:`generic_cae`) need ``tau`` and get a
    numerically differentiated term per block.
    """
    if spec is not None:
        if h.spec is None or not h.spec.same_gate(spec):
            raise ValueError("spec does not match the Hamiltonian it is applied to")
    else:
        spec = h.spec if tau is None or h.spec is None else h.spec.with_tau(tau)
    if spec is not None:
        cache = {}
        blocks = []
        for b in h.blocks:
            if b.xi is None:
                raise ValueError("gate spec given but block has no rotation angle")
            if b.xi not in cache:
                cache[b.xi] = ConstantPath(cd_analytic(b.xi, spec.theta0, spec.tau))
            blocks.append(replace(b, cd=cache[b.xi]))
        return PiecewiseControlledHamiltonian(tuple(blocks), spec)

    if tau is None:
        raise ValueError("tau is required for Hamiltonians without a gate spec")
    sp = numeric_spectral_path(h, tau)
    blocks = []
    for b, bs in zip(h.blocks, sp.blocks):
        def cd(s, vectors=bs.vectors):
            return cd_block(vectors, s, tau)

        blocks.append(replace(b, cd=OperatorPath(cd, b.path.dim)))
    return PiecewiseControlledHamiltonian(tuple(blocks), None)


def rotation_operator(spec: GateSpec) -> np.ndarray:
    """Ideal rotation on the system: ``sum_k exp(i xi_k) P_k``."""
    h = gate_cae(spec)
    return sum(np.exp(1j * b.xi) * b.projector for b in h.blocks)


def ancilla_ground(h: PiecewiseControlledHamiltonian, s: float = 0.0) -> np.ndarray:
    """Ground state of the first block at ``s``; all blocks share it at ``s=0``."""
    vals, vecs = np.linalg.eigh(h.blocks[0].path(s))
    if len(vals) > 1 and vals[1] - vals[0] < 1e-12:
        raise NumericalError("ancilla ground state is degenerate")
    return fix_phase(vecs[:, 0])


__all__ = [
    "OperatorPath", "ConstantPath", "GatePath", "Schedule", "GateSpec", "Block",
    "PiecewiseControlledHamiltonian", "BlockSpectrum", "Level", "SpectralPath",
    "gate_hamiltonian", "cd_analytic", "generic_cae", "gate_cae", "single_qubit_cae",
    "n_controlled_cae", "controlled_cae", "spectral_path", "numeric_spectral_path",
    "cd_block", "cd_numeric", "cd_numeric_blocks", "superadiabatic", "rotation_operator",
    "system_basis", "check_projectors", "align_columns", "ancilla_ground", "IDENTITY2",
]
