import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from conftest import random_state
from sagate.cli import stationary_hamiltonian
from sagate.errors import BoundViolationError, NumericalError
from sagate.evolve import initial_state, propagate
from sagate.hamiltonian import GateSpec, gate_cae, numeric_spectral_path, spectral_path, superadiabatic
from sagate.metrics import (
    check_qsl,
    composite_simpson,
    cost_report,
    energy_cost_adiabatic,
    energy_cost_closed,
    energy_cost_numeric,
    mu,
    qsl_report,
)


class TestSimpson:
    def test_polynomial_exact(self):
        assert math.isclose(composite_simpson(lambda x: x**3, 0.0, 2.0), 4.0, rel_tol=1e-14)

    def test_smooth(self):
        assert math.isclose(composite_simpson(math.sin, 0.0, math.pi), 2.0, rel_tol=1e-8)

    def test_nonconvergence_raises(self):
        with pytest.raises(NumericalError):
            composite_simpson(lambda x: math.sin(1e4 * x) + 1.0, 0.0, 1.0, max_intervals=128)

    def test_odd_intervals_rejected(self):
        with pytest.raises(ValueError):
            composite_simpson(math.sin, 0, 1, intervals=5)


def test_closed_form_frozen_values():
    assert math.isclose(energy_cost_closed(math.pi, 1.0, math.pi / 2), oracles.SIGMA_THETA_PI_TAU_HALF_PI,
                        rel_tol=1e-15)
    assert math.isclose(energy_cost_closed(math.pi, 1.0, 1.0), oracles.SIGMA_THETA_PI_TAU_ONE_FROZEN,
                        rel_tol=1e-15)
    assert math.isclose(energy_cost_closed(math.pi, 1.0, 1.0, controls=1),
                        math.sqrt(2) * oracles.SIGMA_THETA_PI_TAU_ONE, rel_tol=1e-15)


@given(st.floats(0.1, math.pi), st.floats(0.05, 50.0), st.floats(0.3, 3.0))
@settings(max_examples=30, deadline=None)
def test_numeric_matches_closed(theta0, tau_omega, omega):
    spec = GateSpec((1, 0, 0), math.pi / 3, 0, theta0, omega, tau_omega / omega)
    h_sa = superadiabatic(gate_cae(spec), spec)
    num = energy_cost_numeric(h_sa, spec.tau)
    assert math.isclose(num, oracles.closed_cost(theta0, omega, spec.tau), rel_tol=1e-6)


def test_monotone_in_tau_and_theta():
    taus = [0.1, 0.5, 1, 5, 20]
    for theta0 in (math.pi / 4, math.pi / 2, math.pi):
        vals = [energy_cost_closed(theta0, 1.0, t) for t in taus]
        assert all(a > b for a, b in zip(vals, vals[1:]))
    assert energy_cost_closed(math.pi / 4, 1.0, 1.0) < energy_cost_closed(math.pi, 1.0, 1.0)


def test_adiabatic_cost_is_two_omega():
    spec = GateSpec((0, 0, 1), 1.0, 0, math.pi, 1.5, 0.3)
    assert math.isclose(energy_cost_adiabatic(gate_cae(spec)), 3.0, rel_tol=1e-12)


def test_controlled_cost_scaling():
    single = GateSpec((1, 0, 0), math.pi, 0, math.pi / 2, 1.0, 0.5)
    ctrl = replace(single, controls=1)
    a = energy_cost_numeric(superadiabatic(gate_cae(single), single), single.tau)
    b = energy_cost_numeric(superadiabatic(gate_cae(ctrl), ctrl), ctrl.tau)
    assert math.isclose(b / a, math.sqrt(2), rel_tol=1e-6)


def test_cost_report_fields():
    spec = GateSpec((1, 0, 0), math.pi, 1, math.pi, 1.0, math.pi / 2)
    r = cost_report(spec)
    assert math.isclose(r.sigma_closed, 4.0, rel_tol=1e-12)
    assert math.isclose(r.sigma_numeric, 4.0, rel_tol=1e-8)
    assert math.isclose(r.sigma_controlled, 4.0, rel_tol=1e-12)
    assert math.isclose(r.sigma_adiabatic, 2 * math.sqrt(2), rel_tol=1e-12)
    assert set(r.as_dict()) >= {"sigma_numeric", "sigma_closed", "tau"}


def test_sample_floor():
    spec = GateSpec((1, 0, 0), 1.0)
    with pytest.raises(ValueError):
        energy_cost_numeric(superadiabatic(gate_cae(spec), spec), 1.0, samples=16)


def test_mu_nonnegative():
    spec = GateSpec((1, 0, 0), 1.0, 0, 2.0, 1.0, 0.5)
    path = spectral_path(spec)
    for lv in path.levels:
        for t in (0.0, 0.2, 0.5):
            m = mu(path, lv, t)
            # single qubit sweep: Fubini-Study rate is (theta0 / (2 tau))^2
            assert math.isclose(m, (2.0 / (2 * 0.5)) ** 2, rel_tol=1e-6)


@pytest.mark.parametrize("tau_omega", [1.6, 0.2, 0.025])
def test_qsl_bound_holds(rng, tau_omega):
    spec = GateSpec((0.3, 0.4, math.sqrt(0.75)), 1.3, 1, 0.9 * math.pi, 1.0, tau_omega)
    psi = random_state(rng, spec.system_dim)
    h_sa = superadiabatic(gate_cae(spec), spec)
    res = propagate(h_sa, initial_state(psi), spec.tau, steps=4000)
    q = qsl_report(res, h_sa, spectral_path(spec))
    assert q.slack >= -1e-9
    assert q.chi >= q.chi_floor - 1e-9
    assert q.final_bound_lhs >= q.chi_floor - 1e-9
    assert abs(q.eta3) < 1e-12  # the ground trajectory is parallel transported


def test_qsl_stationary_state():
    h = stationary_hamiltonian(1.0)
    res = propagate(h, [1.0, 0.0], 0.5, steps=200)
    q = qsl_report(res, h, numeric_spectral_path(h, 0.5), omega=1.0)
    assert q.ml_bound_time == 0.0
    assert q.bures < 1e-7
    assert math.isclose(q.e_tau, 1.0, rel_tol=1e-12)
    assert q.chi < 1e-12 and q.chi_floor < 1e-12


def test_check_qsl_raises_on_violation():
    spec = GateSpec((1, 0, 0), 1.0, 0, math.pi, 1.0, 1.0)
    h_sa = superadiabatic(gate_cae(spec), spec)
    res = propagate(h_sa, initial_state([1, 0]), 1.0, steps=200)
    q = qsl_report(res, h_sa, spectral_path(spec))
    with pytest.raises(BoundViolationError) as info:
        check_qsl(replace(q, slack=-1e-6))
    assert info.value.report.slack == -1e-6
    with pytest.raises(BoundViolationError):
        check_qsl(replace(q, chi=q.chi_floor - 1e-6, eta=10.0))
