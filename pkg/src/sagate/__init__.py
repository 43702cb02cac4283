"""Superadiabatic controlled evolutions: gate Hamiltonians, counter-diabatic driving, cost and speed limits."""

from .circuit import CircuitProgram, GateOutcome, Mode, apply_gate, extract_unitary, run_circuit, standard_gate
from .errors import BoundViolationError, CircuitFormatError, InvalidAxisError, NumericalError
from .evolve import EvolutionResult, gate_target, initial_state, propagate
from .hamiltonian import (
    GateSpec,
    PiecewiseControlledHamiltonian,
    Schedule,
    cd_analytic,
    cd_numeric,
    controlled_cae,
    gate_cae,
    single_qubit_cae,
    spectral_path,
    superadiabatic,
)
from .metrics import CostReport, QSLReport, cost_report, energy_cost_closed, energy_cost_numeric, qsl_report
from .qcore import BlochAxis, HermitianOperator, QuantumState, tensor

__version__ = "0.1.0"

__all__ = [
    "BlochAxis", "BoundViolationError", "CircuitFormatError", "CircuitProgram", "CostReport",
    "EvolutionResult", "GateOutcome", "GateSpec", "HermitianOperator", "InvalidAxisError", "Mode",
    "NumericalError", "PiecewiseControlledHamiltonian", "QSLReport", "QuantumState", "Schedule",
    "apply_gate", "cd_analytic", "cd_numeric", "controlled_cae", "cost_report", "energy_cost_closed",
    "energy_cost_numeric", "extract_unitary", "gate_cae", "gate_target", "initial_state", "propagate",
    "qsl_report", "run_circuit", "single_qubit_cae", "spectral_path", "superadiabatic", "standard_gate",
    "tensor",
]
