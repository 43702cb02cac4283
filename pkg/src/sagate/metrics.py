"""
Energy cost and quantum speed limit diagnostics.

Units follow the rest of the package: hbar = 1, energies in units of
``omega`` and times in units of ``1 / omega`` whenever ``omega = 1``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable, Optional

import numpy as np
from scipy.integrate import simpson, trapezoid

from .errors import BoundViolationError, NumericalError
from .evolve import EvolutionResult, decompose, transported_levels
from .hamiltonian import GateSpec, PiecewiseControlledHamiltonian, SpectralPath, gate_cae, superadiabatic
from .qcore import bures_angle, hs_norm

QUAD_RTOL = 1e-8
QUAD_MAX_INTERVALS = 2**16
SPLIT_TOL = 1e-9
QSL_TOL = 1e-9
QSL_NODES = 1025


def composite_simpson(f: Callable[[float], float], a: float, b: float, intervals: int = 64,
                      rtol: float = QUAD_RTOL, max_intervals: int = QUAD_MAX_INTERVALS) -> float:
    """Composite Simpson rule, doubling the node count until the relative change is below ``rtol``.

    Raises :class:`NumericalError` when ``max_intervals`` is reached first.
    """
    if intervals < 2 or intervals % 2:
        raise ValueError("intervals must be an even number >= 2")
    n = intervals
    x = np.linspace(a, b, n + 1)
    y = np.array([f(xi) for xi in x])

    def rule(y, n):
        h = (b - a) / n
        return h / 3 * (y[0] + y[-1] + 4 * y[1:-1:2].sum() + 2 * y[2:-1:2].sum())

    prev = rule(y, n)
    while n < max_intervals:
        n *= 2
        mids = np.linspace(a, b, n + 1)[1::2]
        ynew = np.empty(n + 1)
        ynew[0::2] = y
        ynew[1::2] = [f(xi) for xi in mids]
        y = ynew
        cur = rule(y, n)
        if abs(cur - prev) <= rtol * max(abs(cur), 1e-300):
            return float(cur)
        prev = cur
    raise NumericalError(f"Simpson quadrature did not converge with {max_intervals} intervals")


# --------------------------------------------------------------------------
# energy cost


@dataclass(frozen=True)
class CostReport:
    """Energy cost of one gate, all values in units of ``hbar * omega``."""

    sigma_numeric: float
    sigma_closed: float
    sigma_adiabatic: float
    sigma_controlled: float
    tau: float
    theta0: float
    omega: float

    def as_dict(self) -> dict:
        return asdict(self)


def energy_cost_numeric(h_sa: PiecewiseControlledHamiltonian, tau: float, samples: int = 64,
                        check_split: bool = True) -> float:
    """Time-averaged Hilbert-Schmidt norm ``(1/tau) int_0^tau ||H_SA(t)|| dt``.

    The average over ``t`` equals the average over ``s`` in [0, 1], so ``tau``
    only enters through ``h_sa`` itself.  With ``check_split`` every node also
    verifies ``||H_SA||^2 = ||H||^2 + ||H_CD||^2`` to 1e-9.
    """
    if samples < 64:
        raise ValueError("samples must be at least 64")
    if not tau > 0:
        raise ValueError("tau must be positive")

    def integrand(s):
        full = hs_norm(h_sa(s))
        if check_split and h_sa.is_superadiabatic:
            split = math.sqrt(hs_norm(h_sa.adiabatic(s)) ** 2 + hs_norm(h_sa.counter_diabatic(s)) ** 2)
            if abs(full - split) > SPLIT_TOL * max(1.0, full):
                raise NumericalError(f"orthogonal split fails at s={s}: {full} vs {split}")
        return full

    return composite_simpson(integrand, 0.0, 1.0, samples + samples % 2)


def energy_cost_adiabatic(h: PiecewiseControlledHamiltonian, samples: int = 64) -> float:
    """Cost of the bare adiabatic Hamiltonian (no counter-diabatic term)."""
    return composite_simpson(lambda s: hs_norm(h.adiabatic(s)), 0.0, 1.0, samples + samples % 2)


def energy_cost_closed(theta0: float, omega: float, tau: float, controls: int = 0) -> float:
    """``2 omega sqrt(1 + theta0^2 / (4 (tau omega)^2))``, scaled by ``sqrt(2^controls)``.

    The scale factor counts the projectors on the controlled register:
    ``controls=1`` gives the two-qubit controlled-gate cost ``sqrt(2) * Sigma``.
    """
    if not (theta0 > 0 and omega > 0 and tau > 0):
        raise ValueError("theta0, omega and tau must be positive")
    base = 2.0 * omega * math.sqrt(1.0 + theta0**2 / (4.0 * (tau * omega) ** 2))
    return base * math.sqrt(2.0**controls)


def cost_report(spec: GateSpec, samples: int = 64) -> CostReport:
    h = gate_cae(spec)
    h_sa = superadiabatic(h, spec)
    return CostReport(
        sigma_numeric=energy_cost_numeric(h_sa, spec.tau, samples),
        sigma_closed=energy_cost_closed(spec.theta0, spec.omega, spec.tau, spec.controls),
        sigma_adiabatic=energy_cost_adiabatic(h, samples),
        sigma_controlled=math.sqrt(2.0) * energy_cost_closed(spec.theta0, spec.omega, spec.tau),
        tau=spec.tau, theta0=spec.theta0, omega=spec.omega,
    )


def mu(path: SpectralPath, level, t: float, tau: Optional[float] = None) -> float:
    """Fubini-Study rate ``<d_t g|d_t g> - |<g|d_t g>|^2`` of one composite eigenvector."""
    tau = path.tau if tau is None else tau
    s = t / tau
    v = path.vector(level, s)
    dv = path.d_vector(level, s) / tau
    return float(np.real(np.vdot(dv, dv)) - abs(np.vdot(v, dv)) ** 2)


# --------------------------------------------------------------------------
# quantum speed limit


@dataclass(frozen=True)
class QSLReport:
    """Speed-limit diagnostics of one evolution (hbar = 1).

    ``ml_bound_time`` is ``|cos L - 1| / E_tau`` and ``slack`` is
    ``tau - ml_bound_time``.  ``eta``, ``eta2``, ``eta3`` and ``chi`` are the
    ground-trajectory integrals entering ``eta * omega * tau + chi >= chi_floor``.
    """

    bures: float
    e_tau: float
    ml_bound_time: float
    eta: float
    eta2: float
    eta3: float
    chi: float
    chi_floor: float
    slack: float
    tau: float
    omega: float

    @property
    def tau_omega(self) -> float:
        return self.tau * self.omega

    @property
    def final_bound_lhs(self) -> float:
        return self.eta * self.omega * self.tau + self.chi

    def as_dict(self) -> dict:
        return asdict(self)


def _simpson_samples(y, x):
    if len(x) < 3:
        return float(trapezoid(y, x=x))
    return float(simpson(y, x=x))


def qsl_report(result: EvolutionResult, h_sa: PiecewiseControlledHamiltonian, path: SpectralPath,
               tau: Optional[float] = None, omega: Optional[float] = None, check: bool = True,
               tol: float = QSL_TOL, nodes: int = QSL_NODES) -> QSLReport:
    """Margolus-Levitin type bound and its counter-diabatic decomposition.

    ``E_tau = int_0^1 |<Psi(0)|H_SA(s)|Psi(s)>| ds`` uses the propagated
    states stored in ``result``.  The ground trajectory ``gamma_0(s)`` is the
    parallel-transported image of ``Psi(0)`` along ``path``.  With ``check``
    a :class:`BoundViolationError` is raised when ``slack < -tol`` or
    ``chi < chi_floor - tol``.
    """
    tau = result.tau if tau is None else tau
    if omega is None:
        omega = h_sa.spec.omega if h_sa.spec is not None else 1.0
    psi0 = np.asarray(result.initial_state)
    states = result.states
    s_grid = result.s_grid

    overlaps = np.array([abs(np.vdot(psi0, h_sa(s) @ v)) for s, v in zip(s_grid, states)])
    e_tau = _simpson_samples(overlaps, s_grid)
    bures = bures_angle(psi0, result.final_state)
    numerator = abs(math.cos(bures) - 1.0)
    bound_time = numerator / e_tau if e_tau > 0 and numerator > 0 else 0.0

    dec = decompose(path, psi0)
    coeffs = np.array([c for c, _ in dec])
    levels = [lv for _, lv in dec]
    s_nodes = np.linspace(0.0, 1.0, nodes)
    vecs, dvecs = transported_levels(path, levels, s_nodes, derivatives=True)
    gamma = np.einsum("l,lnd->nd", coeffs, vecs)
    dgamma = np.einsum("l,lnd->nd", coeffs, dvecs)
    energies = np.array([[path.energy(lv, s) for s in s_nodes] for lv in levels])
    energy0 = np.einsum("l,ln->n", np.abs(coeffs) ** 2, energies)

    g0 = gamma[0]
    ov = gamma @ g0.conj()  # <gamma(0)|gamma(s)>
    # E_0 = -omega on gate paths, so this reduces to int |<gamma(0)|gamma(s)>| ds
    eta = _simpson_samples(np.abs(energy0 * ov), s_nodes) / omega
    eta2 = _simpson_samples(np.abs(dgamma @ g0.conj()), s_nodes)
    conn = np.einsum("nd,nd->n", gamma.conj(), dgamma)
    eta3 = _simpson_samples(np.abs(conn * ov), s_nodes)
    chi = eta2 + eta3
    # floor on the same trajectory chi is built from; exact equality for gate paths
    floor = abs(abs(ov[-1]) / np.vdot(g0, g0).real - 1.0)

    report = QSLReport(bures=bures, e_tau=e_tau, ml_bound_time=bound_time, eta=eta, eta2=eta2,
                       eta3=eta3, chi=chi, chi_floor=floor, slack=tau - bound_time,
                       tau=tau, omega=omega)
    if check:
        check_qsl(report, tol)
    return report


def check_qsl(report: QSLReport, tol: float = QSL_TOL) -> None:
    if report.slack < -tol:
        raise BoundViolationError(f"speed limit violated: slack={report.slack:.3e}", report)
    if report.chi < report.chi_floor - tol:
        raise BoundViolationError(f"chi={report.chi:.12g} below floor {report.chi_floor:.12g}", report)
    if report.final_bound_lhs < report.chi_floor - tol:
        raise BoundViolationError("eta*omega*tau + chi below floor", report)


__all__ = [
    "CostReport", "QSLReport", "composite_simpson", "energy_cost_numeric", "energy_cost_adiabatic",
    "energy_cost_closed", "cost_report", "mu", "qsl_report", "check_qsl",
]
