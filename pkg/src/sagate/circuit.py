"""
Gate-level layer: CAE gates on multi-qubit registers with a measured ancilla.

Qubit ordering is big-endian: qubit 0 is the leftmost tensor factor.  A gate
acts on ``targets = [control_0, ..., control_{n-1}, target]``.  Every gate
starts from a fresh ancilla in ``|0>``; after the evolution the ancilla is
measured in the computational basis and discarded.
"""

from __future__ import annotations

import enum
import functools
import json
import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import CircuitFormatError, NumericalError
from .evolve import DEFAULT_STEPS, block_propagators
from .hamiltonian import GateSpec, gate_cae, rotation_operator, superadiabatic
from .metrics import energy_cost_adiabatic, energy_cost_numeric
from .qcore import BlochAxis, QuantumState, X_AXIS, Z_AXIS, fidelity

UNITARY_TOL = 1e-8
INFIDELITY_WARNING = 1e-6


class Mode(str, enum.Enum):
    ADIABATIC = "adiabatic"
    SUPERADIABATIC = "superadiabatic"


@dataclass(frozen=True)
class GateOutcome:
    """Result of one gate application.

    ``fidelity`` compares the pre-measurement register+ancilla state with the
    ideal ``cos(theta0/2)|psi>|0> + sin(theta0/2)|psi_rot>|1>``; ``warning``
    is set when ``1 - fidelity`` exceeds 1e-6.
    """

    register_state: QuantumState
    ancilla_outcome: int
    success_probability: float
    mode: Mode
    fidelity: float
    warning: bool
    energy_cost: float


@dataclass(frozen=True)
class GateInstruction:
    spec: GateSpec
    targets: tuple
    name: str = "rotation"


@dataclass(frozen=True)
class CircuitProgram:
    qubit_count: int
    gates: tuple = ()
    seed: int = 0
    initial: Optional[QuantumState] = None

    def __post_init__(self):
        if self.qubit_count < 1:
            raise ValueError("qubit_count must be positive")
        for i, g in enumerate(self.gates):
            _check_targets(g.targets, g.spec, self.qubit_count, f"gates[{i}]")
        if self.initial is not None and self.initial.dim != 2**self.qubit_count:
            raise ValueError("initial state dimension does not match qubit_count")

    def initial_state(self) -> QuantumState:
        if self.initial is not None:
            return self.initial
        return QuantumState.basis(2**self.qubit_count, 0)


def _check_targets(targets, spec, n_qubits, where="targets"):
    if len(targets) != spec.controls + 1:
        raise ValueError(f"{where}: gate with {spec.controls} controls needs {spec.controls + 1} targets")
    if len(set(targets)) != len(targets):
        raise ValueError(f"{where}: targets must be distinct")
    for q in targets:
        if not isinstance(q, (int, np.integer)) or not 0 <= q < n_qubits:
            raise ValueError(f"{where}: qubit index {q} out of range")


_HADAMARD_AXIS = BlochAxis.from_vector([1.0, 0.0, 1.0])


def standard_gate(name: str, phi: Optional[float] = None, theta0: float = math.pi,
                  omega: float = 1.0, tau: float = 1.0) -> GateSpec:
    """GateSpec for ``pauli_x``, ``hadamard``, ``phase``, ``cnot`` or ``toffoli``."""
    key = name.lower()
    if key == "phase":
        if phi is None:
            raise ValueError("phase gate needs phi")
        return GateSpec(Z_AXIS, phi, 0, theta0, omega, tau)
    table = {
        "pauli_x": (X_AXIS, 0),
        "x": (X_AXIS, 0),
        "hadamard": (_HADAMARD_AXIS, 0),
        "h": (_HADAMARD_AXIS, 0),
        "cnot": (X_AXIS, 1),
        "toffoli": (X_AXIS, 2),
    }
    if key not in table:
        raise ValueError(f"unknown gate {name!r}")
    axis, controls = table[key]
    return GateSpec(axis, math.pi, controls, theta0, omega, tau)


def gate_rng(seed: int, index: int) -> np.random.Generator:
    """Independent, reproducible measurement stream for gate ``index``."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def gate_hamiltonian_for(spec: GateSpec, mode: Mode):
    """Gate Hamiltonian, with the counter-diabatic term in superadiabatic mode."""
    h = gate_cae(spec)
    if Mode(mode) == Mode.SUPERADIABATIC:
        h = superadiabatic(h, spec)
    return h


@functools.lru_cache(maxsize=64)
def _ancilla_columns(spec: GateSpec, mode: Mode, steps: int):
    h = gate_hamiltonian_for(spec, mode)
    groups, props = block_propagators(h, spec.tau, steps)
    # final ancilla state of each block when it starts in |0>
    cols = tuple(props[g, -1][:, 0].copy() for g in groups)
    for c in cols:
        c.setflags(write=False)
    return h, cols


@functools.lru_cache(maxsize=64)
def _gate_cost(spec: GateSpec, mode: Mode) -> float:
    h = gate_hamiltonian_for(spec, mode)
    if mode == Mode.SUPERADIABATIC:
        return energy_cost_numeric(h, spec.tau)
    return energy_cost_adiabatic(h)


def _branches(register: np.ndarray, targets, spec: GateSpec, mode: Mode, steps: int):
    """Pre-measurement branches ``(psi_0, psi_1)`` of the register, unnormalized."""
    n = int(round(math.log2(register.size)))
    psi = register.reshape((2,) * n)
    rest = [q for q in range(n) if q not in targets]
    order = list(targets) + rest
    mat = np.transpose(psi, order).reshape(spec.system_dim, -1)
    h, cols = _ancilla_columns(spec, mode, steps)
    out = []
    for bit in (0, 1):
        acc = np.zeros_like(mat)
        for b, a in zip(h.blocks, cols):
            acc += a[bit] * (b.projector @ mat)
        out.append(acc)
    inverse = np.argsort(order)

    def restore(m):
        return np.transpose(m.reshape((2,) * n), inverse).reshape(-1)

    ideal = rotation_operator(spec) @ mat
    return h, [restore(m) for m in out], restore(mat), restore(ideal)


def apply_gate(register, spec: GateSpec, targets: Sequence[int], mode: Mode = Mode.SUPERADIABATIC,
               tau: Optional[float] = None, steps: int = DEFAULT_STEPS, post_select: bool = False,
               rng_seed=None) -> GateOutcome:
    """Run one CAE gate and measure the ancilla.

    Outcome 1 leaves the register in the rotated state, outcome 0 in the
    input state.  ``post_select`` forces outcome 1.  ``rng_seed`` may be an
    int or a ``numpy.random.Generator``.
    """
    register = register if isinstance(register, QuantumState) else QuantumState(register)
    mode = Mode(mode)
    n = register.num_qubits
    targets = tuple(int(q) for q in targets)
    _check_targets(targets, spec, n)
    if tau is not None:
        spec = spec.with_tau(tau)
    _, (b0, b1), psi, rotated = _branches(np.asarray(register), targets, spec, mode, steps)
    p1 = float(np.real(np.vdot(b1, b1)))
    p0 = float(np.real(np.vdot(b0, b0)))

    half = spec.theta0 / 2
    achieved = np.concatenate([b0, b1])
    ideal = np.concatenate([math.cos(half) * psi, math.sin(half) * rotated])
    fid = fidelity(ideal, achieved / np.linalg.norm(achieved))
    warn = 1.0 - fid > INFIDELITY_WARNING

    if post_select:
        outcome = 1
    else:
        rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
        outcome = int(rng.random() < p1 / (p0 + p1))
    branch = b1 if outcome else b0
    if np.linalg.norm(branch) < 1e-12:
        raise NumericalError(f"ancilla outcome {outcome} has vanishing probability")

    return GateOutcome(QuantumState(branch, normalize=True), outcome, min(p1, 1.0), mode, fid, warn,
                       _gate_cost(spec, mode))


def run_circuit(program: CircuitProgram, mode: Mode = Mode.SUPERADIABATIC,
                tau_per_gate: Optional[float] = None, steps: int = DEFAULT_STEPS,
                post_select: bool = False):
    """Apply the program's gates in order; returns ``(final_state, outcomes)``."""
    state = program.initial_state()
    outcomes = []
    for i, g in enumerate(program.gates):
        out = apply_gate(state, g.spec, g.targets, mode, tau_per_gate, steps, post_select,
                         gate_rng(program.seed, i))
        outcomes.append(out)
        state = out.register_state
    return state, outcomes


def phase_normalize(m: np.ndarray, index=None) -> np.ndarray:
    """Divide out the phase of the largest-magnitude entry (or of ``m[index]``)."""
    m = np.asarray(m, dtype=complex)
    if index is None:
        index = np.unravel_index(np.argmax(np.abs(m)), m.shape)
    ref = m[index]
    if abs(ref) == 0:
        raise ValueError("reference entry is zero")
    return m * (abs(ref) / ref)


def phase_aligned_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Max entrywise distance after normalizing both at ``b``'s largest entry."""
    idx = np.unravel_index(np.argmax(np.abs(b)), b.shape)
    return float(np.max(np.abs(phase_normalize(a, idx) - phase_normalize(b, idx))))


def extract_unitary(spec: GateSpec, mode: Mode = Mode.SUPERADIABATIC, tau: Optional[float] = None,
                    steps: int = DEFAULT_STEPS, post_select: bool = True) -> np.ndarray:
    """Effective system map read off column by column from post-selected runs.

    Only ``theta0 = pi`` is deterministic; other angles require
    ``post_select``.  In superadiabatic mode a result further than 1e-8 from
    unitary raises :class:`NumericalError`; adiabatic mode only warns.
    """
    if not post_select and abs(spec.theta0 - math.pi) > 1e-12:
        raise ValueError("non-deterministic theta0 requires post_select")
    mode = Mode(mode)
    n = spec.system_qubits
    d = spec.system_dim
    targets = tuple(range(n))
    cols = []
    for k in range(d):
        out = apply_gate(QuantumState.basis(d, k), spec, targets, mode, tau, steps, post_select=True)
        cols.append(np.asarray(out.register_state))
    u = np.stack(cols, axis=1)
    err = float(np.max(np.abs(u.conj().T @ u - np.eye(d))))
    if err > UNITARY_TOL:
        msg = f"extracted map deviates from unitary by {err:.3g}"
        if mode == Mode.SUPERADIABATIC:
            raise NumericalError(msg)
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
    return u


# --------------------------------------------------------------------------
# circuit files

_TOP_KEYS = {"qubits", "seed", "gates", "initial"}
_GATE_KEYS = {"name", "axis", "phi", "controls", "targets", "theta0", "tau_omega"}


def _parse_initial(value, n_qubits):
    where = "initial"
    if isinstance(value, str):
        if len(value) != n_qubits or set(value) - {"0", "1"}:
            raise CircuitFormatError(f"expected a {n_qubits}-character bitstring", where)
        return QuantumState.from_bits(value)
    if isinstance(value, list):
        if len(value) != 2**n_qubits:
            raise CircuitFormatError(f"expected {2 ** n_qubits} amplitudes", where)
        amps = []
        for i, a in enumerate(value):
            if isinstance(a, (int, float)) and not isinstance(a, bool):
                amps.append(complex(a))
            elif isinstance(a, list) and len(a) == 2 and all(isinstance(x, (int, float)) for x in a):
                amps.append(complex(a[0], a[1]))
            else:
                raise CircuitFormatError("amplitude must be a number or [re, im]", f"{where}[{i}]")
        try:
            return QuantumState(amps)
        except ValueError as exc:
            raise CircuitFormatError(str(exc), where) from None
    raise CircuitFormatError("must be a bitstring or a list of amplitudes", where)


def _number(gate, key, where, default=None):
    if key not in gate:
        return default
    v = gate[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise CircuitFormatError("must be a finite number", f"{where}.{key}")
    return float(v)


def parse_program(doc: dict, default_tau_omega: float = 1.0, omega: float = 1.0) -> CircuitProgram:
    """Validate a circuit document and build a :class:`CircuitProgram`.

    Schema::

        {"qubits": int, "seed": int, "initial": "010" | [amplitudes]?,
         "gates": [{"name": str} | {"axis": [x, y, z], "phi": r, "controls": int},
                   plus "targets": [int, ...], "theta0": r?, "tau_omega": r?]}

    Unknown keys are rejected.
    """
    if not isinstance(doc, dict):
        raise CircuitFormatError("document must be a JSON object")
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise CircuitFormatError(f"unknown key(s) {sorted(unknown)}")
    n = doc.get("qubits")
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise CircuitFormatError("must be a positive integer", "qubits")
    seed = doc.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        raise CircuitFormatError("must be a non-negative integer", "seed")
    gates_doc = doc.get("gates")
    if not isinstance(gates_doc, list):
        raise CircuitFormatError("must be a list", "gates")
    initial = _parse_initial(doc["initial"], n) if "initial" in doc else None

    gates = []
    for i, g in enumerate(gates_doc):
        where = f"gates[{i}]"
        if not isinstance(g, dict):
            raise CircuitFormatError("must be an object", where)
        unknown = set(g) - _GATE_KEYS
        if unknown:
            raise CircuitFormatError(f"unknown key(s) {sorted(unknown)}", where)
        theta0 = _number(g, "theta0", where, math.pi)
        tau = _number(g, "tau_omega", where, default_tau_omega) / omega
        phi = _number(g, "phi", where)
        try:
            if "name" in g:
                if "axis" in g or "controls" in g:
                    raise CircuitFormatError("give either name or axis/controls, not both", where)
                if not isinstance(g["name"], str):
                    raise CircuitFormatError("must be a string", f"{where}.name")
                name = g["name"]
                spec = standard_gate(name, phi, theta0, omega, tau)
            else:
                axis = g.get("axis")
                if (not isinstance(axis, list) or len(axis) != 3
                        or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in axis)):
                    raise CircuitFormatError("must be a list of three numbers", f"{where}.axis")
                if phi is None:
                    raise CircuitFormatError("missing", f"{where}.phi")
                controls = g.get("controls", 0)
                if not isinstance(controls, int) or isinstance(controls, bool):
                    raise CircuitFormatError("must be an integer", f"{where}.controls")
                name = "rotation"
                spec = GateSpec(BlochAxis.from_vector(axis), phi, controls, theta0, omega, tau)
        except CircuitFormatError:
            raise
        except ValueError as exc:
            raise CircuitFormatError(str(exc), where) from None
        targets = g.get("targets")
        if not isinstance(targets, list) or not all(isinstance(q, int) and not isinstance(q, bool)
                                                    for q in targets):
            raise CircuitFormatError("must be a list of integers", f"{where}.targets")
        try:
            _check_targets(targets, spec, n, where)
        except ValueError as exc:
            raise CircuitFormatError(str(exc).split(": ", 1)[-1], f"{where}.targets") from None
        gates.append(GateInstruction(spec, tuple(targets), name))
    return CircuitProgram(n, tuple(gates), seed, initial)


def load_program(path, default_tau_omega: float = 1.0) -> CircuitProgram:
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CircuitFormatError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return parse_program(doc, default_tau_omega)


__all__ = [
    "Mode", "GateOutcome", "GateInstruction", "CircuitProgram", "standard_gate", "apply_gate",
    "run_circuit", "extract_unitary", "phase_normalize", "phase_aligned_distance", "parse_program",
    "load_program", "gate_rng",
]
