import math

import numpy as np
import pytest

import oracles
from conftest import random_axis, random_state
from sagate.evolve import (
    adiabatic_reference,
    decompose,
    expm_hermitian,
    gate_target,
    initial_state,
    propagate,
    trace_size,
)
from sagate.hamiltonian import GateSpec, Level, gate_cae, spectral_path, superadiabatic
from sagate.qcore import fidelity


def _setup(rng, controls=0, tau=1.0, theta0=2.4, phi=1.1, omega=1.0):
    spec = GateSpec(random_axis(rng), phi, controls, theta0, omega, tau)
    psi = random_state(rng, spec.system_dim)
    return spec, psi


def test_expm_hermitian_matches_scipy(rng):
    from scipy.linalg import expm

    for d in (2, 3, 4):
        a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        h = a + a.conj().T
        assert np.allclose(expm_hermitian(h, 0.37), expm(-0.37j * h), atol=1e-13)


def test_trace_size():
    assert trace_size(20000) == 500
    assert trace_size(4000) == 500
    assert trace_size(300) == 300
    assert trace_size(1031) <= 512


@pytest.mark.parametrize("controls", [0, 1, 2])
def test_superadiabatic_matches_exact_oracle(rng, controls):
    spec, psi = _setup(rng, controls, tau=0.7)
    h_sa = superadiabatic(gate_cae(spec), spec)
    res = propagate(h_sa, initial_state(psi), spec.tau, steps=4000)
    exact = oracles.exact_superadiabatic(spec.axis.vector, spec.phi, controls, spec.theta0,
                                         spec.omega, spec.tau, psi)
    assert 1 - fidelity(exact, res.final_state) < 1e-9
    assert res.max_norm_error < 1e-10


def test_blockwise_matches_dense_midpoint(rng):
    spec, psi = _setup(rng, 1, tau=0.9)
    h_sa = superadiabatic(gate_cae(spec), spec)
    steps = 100
    res = propagate(h_sa, initial_state(psi), spec.tau, steps=steps)
    dense = oracles.dense_propagate(h_sa, np.kron(psi, [1, 0]), spec.tau, steps)
    assert np.max(np.abs(np.asarray(res.final_state) - dense)) < 1e-12


def test_order_two_convergence(rng):
    spec, psi = _setup(rng, 0, tau=2.0, theta0=math.pi)
    h = gate_cae(spec)
    # reference from a much finer grid, then three doublings
    fine = np.asarray(propagate(h, initial_state(psi), spec.tau, steps=16000).final_state)
    errs = []
    for steps in (100, 200, 400):
        v = np.asarray(propagate(h, initial_state(psi), spec.tau, steps=steps).final_state)
        errs.append(np.linalg.norm(v - fine))
    ratios = [errs[i] / errs[i + 1] for i in range(2)]
    for r in ratios:
        assert 3.5 < r < 4.5


def test_norm_preserved_along_trace(rng):
    spec, psi = _setup(rng, 2, tau=0.1)
    res = propagate(gate_cae(spec), initial_state(psi), spec.tau, steps=2000)
    assert all(p.norm_error < 1e-10 for p in res.trace)
    assert res.trace[0].s == 0.0 and res.trace[-1].s == 1.0


def test_reaches_gate_target(rng):
    spec, psi = _setup(rng, 1, tau=0.3, phi=math.pi / 2)
    h_sa = superadiabatic(gate_cae(spec), spec)
    res = propagate(h_sa, initial_state(psi), spec.tau, steps=20000)
    assert 1 - fidelity(gate_target(spec, psi), res.final_state) < 1e-7
    # trace compares against the transitionless trajectory at every sample
    assert min(p.fidelity_to_reference for p in res.trace) > 1 - 1e-7


def test_adiabatic_reference_at_end_equals_target(rng):
    spec, psi = _setup(rng, 1, tau=3.0)
    path = spectral_path(spec)
    ref = adiabatic_reference(path, decompose(path, initial_state(psi)), spec.tau)
    assert 1 - fidelity(ref, gate_target(spec, psi)) < 1e-12


def test_adiabatic_reference_rejects_bad_level(rng):
    spec, psi = _setup(rng)
    path = spectral_path(spec)
    with pytest.raises(ValueError):
        adiabatic_reference(path, [(1.0, Level(7, 0, 0))], 0.5)


def test_adiabatic_limit_improves(rng):
    spec, psi = _setup(rng, 0, theta0=0.9 * math.pi)
    infid = []
    for tw in (1.0, 10.0, 100.0):
        sp = spec.with_tau(tw)
        res = propagate(gate_cae(sp), initial_state(psi), sp.tau, steps=20000)
        infid.append(1 - fidelity(gate_target(sp, psi), res.final_state))
    assert infid[0] > infid[1] > infid[2]
    assert infid[2] < 1e-2


def test_dimension_mismatch(rng):
    spec, _ = _setup(rng, 1)
    with pytest.raises(ValueError):
        propagate(gate_cae(spec), initial_state([1, 0]), 1.0)


def test_gate_target_theta_pi_is_rotated(rng):
    spec, psi = _setup(rng, 0, theta0=math.pi, phi=math.pi)
    t = np.asarray(gate_target(spec, psi)).reshape(2, 2)
    assert np.allclose(t[:, 0], 0, atol=1e-15)


def test_too_few_steps_rejected(rng):
    spec, psi = _setup(rng)
    with pytest.raises(ValueError):
        propagate(gate_cae(spec), initial_state(psi), 1.0, steps=10)
