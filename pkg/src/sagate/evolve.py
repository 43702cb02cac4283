"""
Time-dependent Schrodinger integration and adiabatic reference trajectories.

The integrator is the exponential midpoint rule: the interval [0, 1] in ``s``
is cut into ``steps`` equal slices and each slice applies
``exp(-i H((j + 1/2) ds) tau ds)``.  Every slice is exactly unitary and the
scheme is second order in ``ds``.

Piecewise Hamiltonians are block diagonal, ``sum_k P_k (x) H_k``, so the full
propagator is ``sum_k P_k (x) U_k`` and only the small ancilla propagators
``U_k`` are ever integrated.  Blocks sharing the same ancilla path are
integrated once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.integrate import cumulative_simpson, simpson

from .hamiltonian import (
    GateSpec,
    Level,
    PiecewiseControlledHamiltonian,
    SpectralPath,
    rotation_operator,
    spectral_path,
)
from .qcore import QuantumState, fidelity

DEFAULT_STEPS = 4000
MIN_STEPS = 100
MAX_TRACE = 512
REFERENCE_NODES = 257


@dataclass(frozen=True)
class TracePoint:
    s: float
    fidelity_to_reference: float
    norm_error: float


@dataclass(frozen=True)
class EvolutionResult:
    """Outcome of :func:`propagate`.

    ``states[j]`` is the propagated state at ``s_grid[j]``; the grid is
    uniform, includes both end points and has at most 513 nodes.
    """

    final_state: QuantumState
    initial_state: QuantumState
    trace: tuple
    steps: int
    tau: float
    s_grid: np.ndarray
    states: np.ndarray

    @property
    def max_norm_error(self) -> float:
        return max(p.norm_error for p in self.trace)

    @property
    def final_fidelity(self) -> float:
        return self.trace[-1].fidelity_to_reference


def expm_hermitian(h: np.ndarray, dt: float) -> np.ndarray:
    """``exp(-i h dt)`` for a stack of Hermitian matrices of shape ``(..., d, d)``.

    2x2 blocks use the Pauli closed form
    ``exp(-i a0 dt) [cos(|a| dt) - i sin(|a| dt) a.sigma / |a|]``;
    larger blocks go through an eigendecomposition.
    """
    h = np.asarray(h, dtype=complex)
    if h.shape[-1] == 2:
        a0 = 0.5 * np.real(h[..., 0, 0] + h[..., 1, 1])
        az = 0.5 * np.real(h[..., 0, 0] - h[..., 1, 1])
        ax = np.real(h[..., 1, 0])
        ay = np.imag(h[..., 1, 0])
        r = np.sqrt(ax**2 + ay**2 + az**2)
        c = np.cos(r * dt)
        sinc = dt * np.sinc(r * dt / np.pi)  # sin(r dt) / r, safe at r = 0
        out = np.empty(h.shape, dtype=complex)
        out[..., 0, 0] = c - 1j * sinc * az
        out[..., 1, 1] = c + 1j * sinc * az
        out[..., 0, 1] = -1j * sinc * (ax - 1j * ay)
        out[..., 1, 0] = -1j * sinc * (ax + 1j * ay)
        return out * np.exp(-1j * a0 * dt)[..., None, None]
    vals, vecs = np.linalg.eigh(h)
    return (vecs * np.exp(-1j * vals * dt)[..., None, :]) @ np.swapaxes(vecs.conj(), -1, -2)


def trace_size(steps: int, max_points: int = MAX_TRACE) -> int:
    """Number of trace intervals: the largest divisor of ``steps`` not above ``max_points``."""
    for m in range(min(steps, max_points), 0, -1):
        if steps % m == 0:
            return m
    return 1


def _ordered_product(u: np.ndarray) -> np.ndarray:
    """Time-ordered product over axis 1: ``u[:, k-1] @ ... @ u[:, 0]``."""
    while u.shape[1] > 1:
        if u.shape[1] % 2:
            eye = np.broadcast_to(np.eye(u.shape[-1], dtype=complex), (u.shape[0], 1) + u.shape[2:])
            u = np.concatenate([u, eye], axis=1)
        u = u[:, 1::2] @ u[:, 0::2]
    return u[:, 0]


def block_propagators(h: PiecewiseControlledHamiltonian, tau: float, steps: int,
                      intervals: Optional[int] = None):
    """Cumulative ancilla propagators for every distinct block.

    Returns ``(groups, props)``: ``groups[k]`` indexes the distinct block that
    block ``k`` shares its dynamics with, and ``props[g, j]`` is the ancilla
    propagator from ``s = 0`` to ``s = j / intervals``.
    """
    if steps < MIN_STEPS:
        raise ValueError(f"steps must be at least {MIN_STEPS}, got {steps}")
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau}")
    m = trace_size(steps) if intervals is None else intervals
    if steps % m:
        raise ValueError("intervals must divide steps")
    k = steps // m
    ds = 1.0 / steps
    s_mid = (np.arange(steps) + 0.5) * ds

    keys, groups, reps = {}, [], []
    for b in h.blocks:
        key = (id(b.path), id(b.cd))
        if key not in keys:
            keys[key] = len(reps)
            reps.append(b)
        groups.append(keys[key])

    d = h.ancilla_dim
    props = np.empty((len(reps), m + 1, d, d), dtype=complex)
    for g, b in enumerate(reps):
        slices = expm_hermitian(b.sample(s_mid), tau * ds)
        chunks = _ordered_product(slices.reshape(m, k, d, d))
        props[g, 0] = np.eye(d)
        for j in range(m):
            props[g, j + 1] = chunks[j] @ props[g, j]
    return groups, props


def propagate(h: PiecewiseControlledHamiltonian, psi0, tau: float, steps: int = DEFAULT_STEPS,
              reference: Optional[Callable[[float], np.ndarray]] = None) -> EvolutionResult:
    """Integrate ``i d/dt psi = H(t/tau) psi`` from ``t = 0`` to ``tau``.

    ``reference(s)`` supplies the state each trace sample is compared with.
    When omitted and ``h`` is a gate Hamiltonian, the transitionless
    (adiabatic) trajectory of the initial state is used.
    """
    psi0 = psi0 if isinstance(psi0, QuantumState) else QuantumState(psi0)
    if psi0.dim != h.dim:
        raise ValueError(f"state dimension {psi0.dim} does not match Hamiltonian dimension {h.dim}")
    groups, props = block_propagators(h, tau, steps)
    m = props.shape[1] - 1
    s_grid = np.linspace(0.0, 1.0, m + 1)

    mat = np.asarray(psi0).reshape(h.system_dim, h.ancilla_dim)
    parts = np.zeros((props.shape[0], h.system_dim, h.ancilla_dim), dtype=complex)
    for b, g in zip(h.blocks, groups):
        parts[g] += b.projector @ mat
    # psi(s_j) = sum_g parts[g] @ U_g(s_j)^T
    states = np.einsum("gsa,gjba->jsb", parts, props).reshape(m + 1, h.dim)

    if reference is not None:
        ref_states = [np.asarray(reference(s)) for s in s_grid]
    elif h.spec is not None:
        ref_states = _default_reference(h.spec.with_tau(tau), psi0, s_grid)
    else:
        ref_states = None
    trace = []
    for j, (s, v) in enumerate(zip(s_grid, states)):
        norm_err = abs(np.linalg.norm(v) - 1.0)
        fid = fidelity(ref_states[j], v) if ref_states is not None else math.nan
        trace.append(TracePoint(float(s), fid, float(norm_err)))
    return EvolutionResult(QuantumState(states[-1], normalize=True), psi0, tuple(trace),
                           steps, float(tau), s_grid, states)


def _default_reference(spec: GateSpec, psi0: QuantumState, s_grid: np.ndarray) -> np.ndarray:
    path = spectral_path(spec)
    return reference_trajectory(path, decompose(path, psi0), s_grid, spec.tau)


# --------------------------------------------------------------------------
# adiabatic reference


def decompose(path: SpectralPath, psi, s: float = 0.0, cutoff: float = 1e-14) -> list:
    """Expand a state in the instantaneous eigenbasis: ``[(coeff, Level), ...]``."""
    psi = np.asarray(psi)
    out = []
    for level in path.levels:
        c = complex(np.vdot(path.vector(level, s), psi))
        if abs(c) > cutoff:
            out.append((c, level))
    return out


def transported_levels(path: SpectralPath, levels: Sequence[Level], s_nodes: np.ndarray,
                       derivatives: bool = False):
    """Parallel-transported eigenvectors on a grid of ``s`` values.

    The phase of each level is carried along by the product of overlaps
    between neighbouring nodes, which makes the result independent of how the
    path fixes eigenvector phases.  Returns ``vecs[level, node, :]`` and, if
    requested, the matching ``d/ds`` with the connection term removed.
    """
    s_nodes = np.asarray(s_nodes, dtype=float)
    n = len(s_nodes)
    dim = path.system_dim * path.ancilla_dim
    vecs = np.empty((len(levels), n, dim), dtype=complex)
    for i, lv in enumerate(levels):
        for j, s in enumerate(s_nodes):
            vecs[i, j] = path.vector(lv, s)
    phases = np.ones((len(levels), n), dtype=complex)
    if n > 1:
        ov = np.einsum("lnd,lnd->ln", vecs[:, :-1].conj(), vecs[:, 1:])
        mag = np.abs(ov)
        step = np.where(mag > 0, ov.conj() / np.where(mag > 0, mag, 1.0), 1.0)
        phases[:, 1:] = np.cumprod(step, axis=1)
    vecs *= phases[:, :, None]
    if not derivatives:
        return vecs
    dvecs = np.empty_like(vecs)
    for i, lv in enumerate(levels):
        for j, s in enumerate(s_nodes):
            v = path.vector(lv, s)
            dv = path.d_vector(lv, s)
            dv = dv - np.vdot(v, dv) * v
            dvecs[i, j] = phases[i, j] * dv
    return vecs, dvecs


def adiabatic_reference(path: SpectralPath, decomposition: Sequence, t: float,
                        tau: Optional[float] = None, nodes: int = REFERENCE_NODES) -> QuantumState:
    """Transitionless state at time ``t``.

    Each component ``c_n |n(0)>`` becomes
    ``c_n exp(-i int_0^t E_n) exp(-int_0^t <n|d n>) |n(t)>``.
    """
    tau = path.tau if tau is None else tau
    if not decomposition:
        raise ValueError("empty decomposition")
    coeffs = np.array([c for c, _ in decomposition], dtype=complex)
    if abs(np.linalg.norm(coeffs) - 1.0) > 1e-9:
        raise ValueError("decomposition coefficients are not normalized")
    levels = [lv for _, lv in decomposition]
    valid = set(path.levels)
    for lv in levels:
        if lv not in valid:
            raise ValueError(f"invalid eigen index {lv}")
    s_end = t / tau
    s_nodes = np.linspace(0.0, s_end, nodes)
    vecs = transported_levels(path, levels, s_nodes)
    out = np.zeros(vecs.shape[-1], dtype=complex)
    for i, (c, lv) in enumerate(decomposition):
        if s_end == 0.0:
            phase = 1.0
        else:
            energies = np.array([path.energy(lv, s) for s in s_nodes])
            phase = np.exp(-1j * tau * simpson(energies, x=s_nodes))
        out += c * phase * vecs[i, -1]
    return QuantumState(out, normalize=True)


def reference_trajectory(path: SpectralPath, decomposition: Sequence, s_grid: np.ndarray,
                         tau: Optional[float] = None) -> np.ndarray:
    """Transitionless states on a whole grid starting at ``s = 0``.

    Same construction as :func:`adiabatic_reference`, with the phase integrals
    accumulated along the grid instead of recomputed per point.
    """
    tau = path.tau if tau is None else tau
    s_grid = np.asarray(s_grid, dtype=float)
    if s_grid[0] != 0.0:
        raise ValueError("grid must start at s = 0")
    levels = [lv for _, lv in decomposition]
    vecs = transported_levels(path, levels, s_grid)
    out = np.zeros(vecs.shape[1:], dtype=complex)
    for i, (c, lv) in enumerate(decomposition):
        energies = np.array([path.energy(lv, s) for s in s_grid])
        if len(s_grid) > 2:
            integral = np.concatenate([[0.0], cumulative_simpson(energies, x=s_grid)])
        else:
            integral = np.concatenate([[0.0], np.cumsum(0.5 * (energies[1:] + energies[:-1]) * np.diff(s_grid))])
        out += c * np.exp(-1j * tau * integral)[:, None] * vecs[i]
    return out


def gate_target(spec: GateSpec, psi_system) -> QuantumState:
    """``cos(theta0/2) |psi>|0> + sin(theta0/2) |psi_rot>|1>`` for a gate spec."""
    psi = np.asarray(psi_system, dtype=complex)
    if psi.size != spec.system_dim:
        raise ValueError(f"system state needs dimension {spec.system_dim}")
    rot = rotation_operator(spec) @ psi
    half = spec.theta0 / 2
    return QuantumState(math.cos(half) * np.kron(psi, [1, 0]) + math.sin(half) * np.kron(rot, [0, 1]),
                        normalize=True)


def initial_state(psi_system) -> QuantumState:
    """``|psi> (x) |0>`` with the ancilla as the last tensor factor."""
    return QuantumState(np.kron(np.asarray(psi_system, dtype=complex), [1, 0]))
