"""
Command-line front end.

Subcommands: ``rotate``, ``controlled``, ``cost-sweep``, ``qsl``, ``circuit``.
Exit codes: 0 success, 2 usage or input error, 3 numerical failure,
4 speed-limit violation.  Energies are reported in units of hbar*omega and
times as the dimensionless product omega*tau.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .circuit import Mode, apply_gate, gate_hamiltonian_for, load_program, run_circuit
from .errors import BoundViolationError, CircuitFormatError, NumericalError
from .evolve import DEFAULT_STEPS, gate_target, initial_state, propagate
from .hamiltonian import (
    Block,
    ConstantPath,
    GateSpec,
    PiecewiseControlledHamiltonian,
    numeric_spectral_path,
    rotation_operator,
    spectral_path,
)
from .metrics import QSL_TOL, check_qsl, cost_report, energy_cost_adiabatic, energy_cost_closed, energy_cost_numeric, qsl_report
from .qcore import PAULI_Z, BlochAxis, QuantumState, fidelity

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_BOUND = 0, 2, 3, 4
CSV_FORMAT = "%.12g"


class UsageError(Exception):
    pass


# --------------------------------------------------------------------------
# argument parsing helpers

_PI_RE = re.compile(r"^\s*([0-9.eE+-]*)\s*\*?\s*pi\s*(?:/\s*([0-9.eE+]+))?\s*$")


def parse_real(text: str) -> float:
    """Float literal, or a multiple of pi such as ``pi/4``, ``0.9pi``, ``3*pi/4``."""
    try:
        return float(text)
    except ValueError:
        pass
    m = _PI_RE.match(text.lower())
    if not m:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    coef = float(m.group(1)) if m.group(1) not in ("", "+", "-") else (-1.0 if m.group(1) == "-" else 1.0)
    div = float(m.group(2)) if m.group(2) else 1.0
    return coef * math.pi / div


def parse_real_list(text: str) -> list:
    items = [t for t in text.split(",") if t.strip()]
    if not items:
        raise argparse.ArgumentTypeError("empty list")
    return [parse_real(t) for t in items]


def parse_axis(text: str) -> BlochAxis:
    try:
        parts = [float(t) for t in text.split(",")]
        return BlochAxis.from_vector(parts)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"invalid axis {text!r}: {exc}") from None


def parse_state(text: str, dim: int) -> np.ndarray:
    """Bitstring (``"01"``) or comma-separated complex amplitudes (``"0.6,0.8j"``)."""
    text = text.strip()
    if text and set(text) <= {"0", "1"} and "," not in text:
        if 2 ** len(text) != dim:
            raise UsageError(f"bitstring {text!r} does not match dimension {dim}")
        return np.asarray(QuantumState.from_bits(text))
    try:
        amps = np.array([complex(t.replace(" ", "")) for t in text.split(",")])
    except ValueError:
        raise UsageError(f"cannot parse state {text!r}") from None
    if amps.size != dim:
        raise UsageError(f"state needs {dim} amplitudes, got {amps.size}")
    return np.asarray(QuantumState(amps, normalize=True))


def default_state(dim: int) -> np.ndarray:
    """Fixed generic superposition used when no ``--state`` is given."""
    k = np.arange(dim)
    v = (1.0 + k) * np.exp(0.7j * k)
    return v / np.linalg.norm(v)


def default_jobs() -> int:
    try:
        return max(1, int(os.environ.get("SAGATE_JOBS", "1")))
    except ValueError:
        return 1


def positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


# --------------------------------------------------------------------------
# output helpers


def _open_out(path):
    if path in (None, "-"):
        return sys.stdout, False
    return open(path, "w", newline=""), True


def write_json(doc, path):
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    fh, close = _open_out(path)
    try:
        fh.write(text)
    finally:
        if close:
            fh.close()


def write_table(rows, columns, path, fmt):
    if fmt == "json":
        write_json({"columns": list(columns), "rows": [{c: r[c] for c in columns} for r in rows]}, path)
        return
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([CSV_FORMAT % r[c] for c in columns])
    fh, close = _open_out(path)
    try:
        fh.write(buf.getvalue())
    finally:
        if close:
            fh.close()


def _pmap(fn, items, jobs):
    if jobs <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


# --------------------------------------------------------------------------
# subcommands


def _spec_from_args(args, controls: int) -> GateSpec:
    try:
        return GateSpec(args.axis, args.phi, controls, args.theta0, args.omega, args.tau)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _spec_dict(spec: GateSpec) -> dict:
    return {"axis": [spec.axis.x, spec.axis.y, spec.axis.z], "phi": spec.phi, "controls": spec.controls,
            "theta0": spec.theta0, "omega": spec.omega, "tau": spec.tau, "tau_omega": spec.tau_omega}


def gate_report(spec: GateSpec, mode: Mode, psi: np.ndarray, steps: int) -> dict:
    """Single-gate experiment: fidelities, success probability, cost and QSL diagnostics."""
    h = gate_hamiltonian_for(spec, mode)
    result = propagate(h, initial_state(psi), spec.tau, steps)
    state_fid = fidelity(gate_target(spec, psi), result.final_state)
    outcome = apply_gate(psi, spec, range(spec.system_qubits), mode, steps=steps, post_select=True)
    ideal = rotation_operator(spec) @ psi
    reg_fid = fidelity(ideal, outcome.register_state)
    cost = cost_report(spec)
    qsl = qsl_report(result, h, spectral_path(spec), spec.tau, spec.omega, check=False)
    return {
        "gate": _spec_dict(spec),
        "mode": mode.value,
        "steps": steps,
        "fidelity": reg_fid,
        "state_fidelity": state_fid,
        "success_probability": outcome.success_probability,
        "warning": bool(1.0 - state_fid > 1e-6 or 1.0 - reg_fid > 1e-6),
        "max_norm_error": result.max_norm_error,
        "cost": {k: v / spec.omega if k.startswith("sigma") else v for k, v in cost.as_dict().items()},
        "qsl": qsl.as_dict(),
    }, qsl


def _check_report_qsl(qsl):
    check_qsl(qsl, QSL_TOL)


def cmd_gate(args, controls):
    spec = _spec_from_args(args, controls)
    psi = parse_state(args.state, spec.system_dim) if args.state else default_state(spec.system_dim)
    report, qsl = gate_report(spec, Mode(args.mode), psi, args.steps)
    write_json(report, args.out)
    _check_report_qsl(qsl)
    return EXIT_OK


def cmd_rotate(args):
    return cmd_gate(args, 0)


def cmd_controlled(args):
    if args.controls < 1:
        raise UsageError("--controls must be at least 1")
    return cmd_gate(args, args.controls)


@dataclass(frozen=True)
class SweepConfig:
    theta0_list: tuple
    tau_omega_list: tuple
    phi: float = math.pi
    controls: int = 0
    mode: Mode = Mode.SUPERADIABATIC
    steps: int = DEFAULT_STEPS
    output_path: str = "-"
    format: str = "csv"
    omega: float = 1.0
    axis: BlochAxis = BlochAxis(1.0, 0.0, 0.0)

    def __post_init__(self):
        if not self.theta0_list or not self.tau_omega_list:
            raise ValueError("sweep lists must be non-empty")
        if min(self.theta0_list) <= 0 or min(self.tau_omega_list) <= 0:
            raise ValueError("sweep values must be positive")


COST_COLUMNS = ("theta0", "tau_omega", "sigma_numeric", "sigma_closed", "sigma_controlled")


def cost_row(cfg: SweepConfig, theta0: float, tau_omega: float) -> dict:
    spec = GateSpec(cfg.axis, cfg.phi, cfg.controls, theta0, cfg.omega, tau_omega / cfg.omega)
    h = gate_hamiltonian_for(spec, cfg.mode)
    if cfg.mode == Mode.SUPERADIABATIC:
        sigma = energy_cost_numeric(h, spec.tau)
    else:
        sigma = energy_cost_adiabatic(h)
    w = cfg.omega
    return {
        "theta0": theta0,
        "tau_omega": tau_omega,
        "sigma_numeric": sigma / w,
        "sigma_closed": energy_cost_closed(theta0, w, spec.tau, cfg.controls) / w,
        "sigma_controlled": math.sqrt(2.0) * energy_cost_closed(theta0, w, spec.tau) / w,
    }


def run_cost_sweep(cfg: SweepConfig, jobs: int = 1) -> list:
    grid = [(t, x) for t in cfg.theta0_list for x in cfg.tau_omega_list]
    return _pmap(lambda p: cost_row(cfg, *p), grid, jobs)


def cmd_cost_sweep(args):
    try:
        cfg = SweepConfig(tuple(args.theta0), tuple(args.tau_omega), args.phi, args.controls,
                          Mode(args.mode), args.steps, args.out, args.format, args.omega, args.axis)
        GateSpec(cfg.axis, cfg.phi, cfg.controls, max(cfg.theta0_list), cfg.omega, 1.0)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    rows = run_cost_sweep(cfg, args.jobs)
    write_table(rows, COST_COLUMNS, cfg.output_path, cfg.format)
    if args.plot:
        from .plotting import plot_cost_sweep

        plot_cost_sweep(rows, args.plot)
    return EXIT_OK


QSL_COLUMNS = ("tau_omega", "bures", "e_tau", "bound_time", "slack", "chi", "chi_floor")


def stationary_hamiltonian(omega: float) -> PiecewiseControlledHamiltonian:
    """Ancilla-only constant ``-omega sigma_z`` with a trivial one-dimensional system."""
    return PiecewiseControlledHamiltonian((Block(np.eye(1, dtype=complex), ConstantPath(-omega * PAULI_Z)),))


def qsl_row(spec: GateSpec, mode: Mode, psi, steps: int, stationary: bool) -> dict:
    if stationary:
        h = stationary_hamiltonian(spec.omega)
        path = numeric_spectral_path(h, spec.tau)
        result = propagate(h, np.array([1.0, 0.0]), spec.tau, steps)
    else:
        h = gate_hamiltonian_for(spec, mode)
        path = spectral_path(spec)
        result = propagate(h, initial_state(psi), spec.tau, steps)
    q = qsl_report(result, h, path, spec.tau, spec.omega, check=False)
    return {"tau_omega": spec.tau_omega, "bures": q.bures, "e_tau": q.e_tau / spec.omega,
            "bound_time": q.ml_bound_time * spec.omega, "slack": q.slack * spec.omega,
            "chi": q.chi, "chi_floor": q.chi_floor, "_report": q}


def cmd_qsl(args):
    spec0 = _spec_from_args(args, args.controls)
    psi = parse_state(args.state, spec0.system_dim) if args.state else default_state(spec0.system_dim)
    if args.tau_octaves < 0:
        raise UsageError("--tau-octaves must be non-negative")
    specs = [spec0.with_tau(spec0.tau / 2**k) for k in range(args.tau_octaves + 1)]
    mode = Mode(args.mode)
    rows = _pmap(lambda sp: qsl_row(sp, mode, psi, args.steps, args.stationary), specs, args.jobs)
    write_table(rows, QSL_COLUMNS, args.out, args.format)
    if args.plot:
        from .plotting import plot_qsl

        plot_qsl(rows, args.plot)
    bad = [r for r in rows if r["slack"] < -QSL_TOL or r["chi"] < r["chi_floor"] - QSL_TOL]
    if bad:
        for r in bad:
            print("bound violation: " + ", ".join(f"{c}={r[c]:.12g}" for c in QSL_COLUMNS), file=sys.stderr)
        return EXIT_BOUND
    return EXIT_OK


def cmd_circuit(args):
    try:
        program = load_program(args.path, args.tau_omega)
    except OSError as exc:
        raise UsageError(f"cannot read circuit file: {exc}") from None
    final, outcomes = run_circuit(program, Mode(args.mode), steps=args.steps, post_select=args.post_select)
    gates = []
    total = 0.0
    for i, (g, o) in enumerate(zip(program.gates, outcomes)):
        total += o.energy_cost
        gates.append({"index": i, "name": g.name, "targets": list(g.targets), "outcome": o.ancilla_outcome,
                      "success_probability": o.success_probability, "fidelity": o.fidelity,
                      "warning": o.warning, "energy_cost": o.energy_cost, "tau_omega": g.spec.tau_omega})
    amps = np.asarray(final)
    write_json({
        "qubits": program.qubit_count,
        "seed": program.seed,
        "mode": Mode(args.mode).value,
        "final_state": [[float(a.real), float(a.imag)] for a in amps],
        "gates": gates,
        "cumulative_cost": total,
    }, args.out)
    return EXIT_OK


# --------------------------------------------------------------------------
# parser


def _add_gate_flags(p, single=True):
    p.add_argument("--axis", type=parse_axis, default=BlochAxis(1.0, 0.0, 0.0),
                   help="rotation axis x,y,z (normalized; default 1,0,0)")
    p.add_argument("--phi", type=parse_real, default=math.pi, help="rotation angle (default pi)")
    p.add_argument("--theta0", type=parse_real, default=math.pi, help="ancilla sweep angle in (0, pi]")
    p.add_argument("--omega", type=parse_real, default=1.0, help="energy scale")
    p.add_argument("--tau", type=parse_real, default=1.0, help="total evolution time")
    p.add_argument("--steps", type=positive_int, default=DEFAULT_STEPS)
    p.add_argument("--mode", choices=[m.value for m in Mode], default=Mode.SUPERADIABATIC.value)
    p.add_argument("--state", default=None,
                   help="system state: bitstring or comma-separated complex amplitudes")
    p.add_argument("--out", default="-", help="output file ('-' for stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sagate", description=__doc__.strip().splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rotate", help="single-qubit rotation gate report (JSON)")
    _add_gate_flags(p)
    p.set_defaults(func=cmd_rotate)

    p = sub.add_parser("controlled", help="n-controlled rotation gate report (JSON)")
    _add_gate_flags(p)
    p.add_argument("--controls", type=int, default=1)
    p.set_defaults(func=cmd_controlled)

    p = sub.add_parser("cost-sweep", help="energy cost over a (theta0, omega*tau) grid")
    p.add_argument("--theta0", type=parse_real_list, default=[math.pi / 4, math.pi / 2, 3 * math.pi / 4, math.pi])
    p.add_argument("--tau-omega", type=parse_real_list, default=[0.1, 0.5, 1.0, 5.0, 20.0])
    p.add_argument("--phi", type=parse_real, default=math.pi)
    p.add_argument("--axis", type=parse_axis, default=BlochAxis(1.0, 0.0, 0.0))
    p.add_argument("--omega", type=parse_real, default=1.0)
    p.add_argument("--controls", type=int, default=0)
    p.add_argument("--mode", choices=[m.value for m in Mode], default=Mode.SUPERADIABATIC.value)
    p.add_argument("--steps", type=positive_int, default=DEFAULT_STEPS)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--out", default="-")
    p.add_argument("--plot", default=None, help="also render the cost curves to this image file")
    p.add_argument("--jobs", type=positive_int, default=default_jobs())
    p.set_defaults(func=cmd_cost_sweep)

    p = sub.add_parser("qsl", help="speed-limit diagnostics while halving tau")
    _add_gate_flags(p)
    p.set_defaults(tau=1.6)
    p.add_argument("--controls", type=int, default=0)
    p.add_argument("--tau-octaves", type=int, default=6)
    p.add_argument("--stationary", action="store_true",
                   help="evolve the ancilla eigenstate of a constant -omega*sigma_z instead of a gate")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--plot", default=None)
    p.add_argument("--jobs", type=positive_int, default=default_jobs())
    p.set_defaults(func=cmd_qsl)

    p = sub.add_parser("circuit", help="run a circuit file (JSON)")
    p.add_argument("path")
    p.add_argument("--mode", choices=[m.value for m in Mode], default=Mode.SUPERADIABATIC.value)
    p.add_argument("--tau-omega", type=parse_real, default=1.0, help="default omega*tau per gate")
    p.add_argument("--steps", type=positive_int, default=DEFAULT_STEPS)
    p.add_argument("--post-select", action="store_true", help="force ancilla outcome 1 for every gate")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_circuit)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        return args.func(args)
    except (UsageError, CircuitFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BoundViolationError as exc:
        print(f"bound violation: {exc}", file=sys.stderr)
        return EXIT_BOUND
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
