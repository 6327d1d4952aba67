import dataclasses
import math

import numpy as np
import pytest

from seqbell import (
    PAULI,
    Observable,
    banaszek_fidelities,
    banaszek_slack,
    bloch_channel_map,
    make_observable,
    povm_elements,
    povm_sqrt_elements,
    reversibility,
    tradeoff_residual,
)
from helpers import random_observable

# mpmath oracle, mp.dps = 40:
#   (mp.sqrt((1+b)**2 - s**2) + mp.sqrt((1-b)**2 - s**2)) / 2  at b = 0.5, s = 0.25
REV_HALF_QUARTER = 0.9560163238335617


def test_pauli_algebra():
    eye = np.eye(2)
    for i in range(3):
        assert np.max(np.abs(PAULI[i] - PAULI[i].conj().T)) == 0.0
        assert np.max(np.abs(PAULI[i] @ PAULI[i] - eye)) == 0.0
    # sigma_x sigma_y = i sigma_z and cyclic
    for i, j, k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        assert np.max(np.abs(PAULI[i] @ PAULI[j] - 1j * PAULI[k])) == 0.0


def test_reversibility_frozen_value():
    assert abs(reversibility(0.5, 0.25) - REV_HALF_QUARTER) < 5e-16


def test_reversibility_special_points():
    assert reversibility(0.0, 1.0) == 0.0  # projective
    assert reversibility(0.0, 0.0) == 1.0  # trivial
    assert reversibility(0.7, 0.0) == 1.0  # bias alone destroys nothing
    # unbiased closed form sqrt(1 - s^2)
    for s in np.linspace(0.0, 1.0, 21):
        assert abs(reversibility(0.0, s) - math.sqrt(1.0 - s * s)) < 1e-15
    # boundary |b| + s = 1 gives r = sqrt(|b|)
    assert abs(reversibility(0.36, 0.64) - 0.6) < 1e-15
    assert abs(reversibility(-0.36, 0.64) - 0.6) < 1e-15


def test_reversibility_floor_is_sqrt_bias():
    rng = np.random.default_rng(11)
    for _ in range(2000):
        s = rng.uniform(0.0, 1.0)
        b = rng.uniform(-1.0, 1.0) * (1.0 - s)
        assert reversibility(b, s) >= math.sqrt(abs(b)) - 1e-12


def test_reversibility_invalid_domain():
    with pytest.raises(ValueError):
        reversibility(0.5, 0.8)  # |b| + s > 1
    with pytest.raises(ValueError):
        reversibility(0.0, 1.5)


def test_reversibility_array_matches_scalar():
    rng = np.random.default_rng(12)
    s = rng.uniform(0.0, 1.0, size=500)
    b = rng.uniform(-1.0, 1.0, size=500) * (1.0 - s)
    vec = reversibility(b, s)
    assert vec.shape == (500,)
    for i in range(0, 500, 17):
        assert vec[i] == reversibility(b[i], s[i])


def test_make_observable_validation():
    with pytest.raises(ValueError):
        make_observable(0.0, 1.2, (0, 0, 1))
    with pytest.raises(ValueError):
        make_observable(0.6, 0.6, (0, 0, 1))  # |b| + s > 1
    with pytest.raises(ValueError):
        make_observable(0.0, 0.5, (0, 0, 0))
    with pytest.raises(ValueError):
        make_observable(float("nan"), 0.5, (0, 0, 1))
    obs = make_observable(0.1, 0.5, (0, 0, 2.0))
    assert abs(np.linalg.norm(obs.direction) - 1.0) < 1e-15
    with pytest.raises(dataclasses.FrozenInstanceError):
        obs.bias = 0.2


def test_povm_elements_properties():
    rng = np.random.default_rng(13)
    eye = np.eye(2)
    for _ in range(200):
        obs = random_observable(rng)
        plus, minus = povm_elements(obs)
        assert np.max(np.abs(plus + minus - eye)) < 1e-15
        assert np.linalg.eigvalsh(plus).min() > -1e-12
        assert np.linalg.eigvalsh(minus).min() > -1e-12
        # eigenvalues (1 +- (b +- s)) / 2
        expected = sorted([(1 + obs.bias - obs.strength) / 2, (1 + obs.bias + obs.strength) / 2])
        got = np.linalg.eigvalsh(plus)
        assert np.max(np.abs(got - expected)) < 1e-14
        # outcome bias on the maximally mixed state
        assert abs((np.trace(plus) - np.trace(minus)).real / 2 - obs.bias) < 1e-14


def test_povm_sqrt_squares_back():
    rng = np.random.default_rng(14)
    for _ in range(200):
        obs = random_observable(rng)
        plus, minus = povm_elements(obs)
        sq_plus, sq_minus = povm_sqrt_elements(obs)
        assert np.max(np.abs(sq_plus @ sq_plus - plus)) < 1e-14
        assert np.max(np.abs(sq_minus @ sq_minus - minus)) < 1e-14
        assert np.max(np.abs(sq_plus - sq_plus.conj().T)) < 1e-14


def test_sqrt_channel_is_unital():
    rng = np.random.default_rng(15)
    eye = np.eye(2)
    for _ in range(100):
        obs = random_observable(rng)
        sq_plus, sq_minus = povm_sqrt_elements(obs)
        # Kraus completeness: the instrument preserves trace
        assert np.max(np.abs(sq_plus @ sq_plus + sq_minus @ sq_minus - eye)) < 1e-14
        # unital: maximally mixed is a fixed point
        out = sq_plus @ (eye / 2) @ sq_plus + sq_minus @ (eye / 2) @ sq_minus
        assert np.max(np.abs(out - eye / 2)) < 1e-14


def test_bloch_channel_map_eigenstructure():
    rng = np.random.default_rng(16)
    for _ in range(200):
        obs = random_observable(rng)
        k = bloch_channel_map(obs).matrix
        x = obs.direction
        assert np.max(np.abs(k @ x - x)) < 1e-14  # measurement axis preserved
        perp = np.cross(x, x + np.array([1.0, 0.3, -0.2]))
        perp /= np.linalg.norm(perp)
        assert np.max(np.abs(k @ perp - obs.reversibility * perp)) < 1e-13


def test_bloch_channel_matches_density_matrix_route():
    # single-qubit oracle: phi(rho) Pauli vector equals K applied to the input vector
    rng = np.random.default_rng(17)
    for _ in range(300):
        obs = random_observable(rng)
        r_in = rng.normal(size=3)
        r_in *= rng.uniform(0.0, 1.0) / np.linalg.norm(r_in)
        rho = 0.5 * (np.eye(2) + np.einsum("i,ijk->jk", r_in, PAULI))
        sq_plus, sq_minus = povm_sqrt_elements(obs)
        rho_out = sq_plus @ rho @ sq_plus + sq_minus @ rho @ sq_minus
        r_out = np.real(np.einsum("jk,ikj->i", rho_out, PAULI))
        assert np.max(np.abs(r_out - bloch_channel_map(obs).apply(r_in))) < 1e-12


def test_tradeoff_residual_vanishes():
    rng = np.random.default_rng(18)
    for _ in range(2000):
        obs = random_observable(rng)
        assert abs(tradeoff_residual(obs)) < 1e-12
        assert obs.reversibility**2 + obs.strength**2 <= 1.0 + 1e-12


def test_tradeoff_residual_unbiased_and_projective():
    rng = np.random.default_rng(19)
    for _ in range(200):
        obs = random_observable(rng, unbiased=True)
        assert abs(tradeoff_residual(obs)) < 1e-15
    proj = make_observable(0.0, 1.0, (0.0, 0.0, 1.0))
    assert tradeoff_residual(proj) == 0.0
    # r = 0 with b != 0 cannot come from make_observable; reject raw instances
    fake = Observable(0.5, 0.5, np.array([0.0, 0.0, 1.0]), 0.0)
    with pytest.raises(ValueError):
        tradeoff_residual(fake)


def test_banaszek_fidelities_closed_form():
    rng = np.random.default_rng(20)
    for _ in range(500):
        obs = random_observable(rng)
        pair = banaszek_fidelities(obs)
        assert abs(6 * pair.operation_fidelity - (2 * obs.reversibility + 4)) < 1e-12
        assert abs(6 * pair.estimation_fidelity - (obs.strength + 3)) < 1e-12


def test_banaszek_slack_saturation():
    rng = np.random.default_rng(21)
    # the fidelity tradeoff holds for every observable and saturates iff unbiased
    for _ in range(2000):
        obs = random_observable(rng)
        assert banaszek_slack(banaszek_fidelities(obs)) > -1e-12
    for _ in range(300):
        obs = random_observable(rng, unbiased=True)
        assert abs(banaszek_slack(banaszek_fidelities(obs))) < 1e-12
    for b in (0.1, 0.3, 0.5):
        for s in (0.1, 0.3):
            obs = make_observable(b, s, (0.0, 0.0, 1.0))
            assert banaszek_slack(banaszek_fidelities(obs)) > 1e-12
    # worked magnitude check at (b, s) = (0.5, 0.25)
    slack = banaszek_slack(banaszek_fidelities(make_observable(0.5, 0.25, (0, 0, 1.0))))
    assert slack > 1e-3
