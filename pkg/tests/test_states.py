import math

import numpy as np
import pytest

from seqbell import (
    MeasurementPolicy,
    TwoQubitState,
    apply_measurement_first,
    apply_measurement_second,
    averaged_map,
    bloch_channel_map,
    channel_oracle,
    from_density_matrix,
    is_physical,
    make_observable,
    post_measurement_state,
    pure_state,
    singlet,
    to_density_matrix,
)
from helpers import random_density, random_observable, random_policy, random_state


def test_pure_state_alpha_zero_is_product():
    st = pure_state(0.0)
    assert np.max(np.abs(st.bloch_a - [0, 0, 1])) < 1e-15
    assert np.max(np.abs(st.bloch_b - [0, 0, 1])) < 1e-15
    assert np.max(np.abs(st.corr - np.diag([0.0, 0.0, 1.0]))) < 1e-15


def test_pure_state_alpha_bell():
    # cos(pi/4)|00> + sin(pi/4)|11> has the explicit density matrix below
    rho = 0.5 * np.array(
        [[1, 0, 0, 1], [0, 0, 0, 0], [0, 0, 0, 0], [1, 0, 0, 1]], dtype=complex
    )
    st = pure_state(math.pi / 4)
    expected = from_density_matrix(rho)
    assert np.max(np.abs(st.bloch_a - expected.bloch_a)) < 1e-15
    assert np.max(np.abs(st.bloch_b - expected.bloch_b)) < 1e-15
    assert np.max(np.abs(st.corr - expected.corr)) < 1e-15
    assert np.max(np.abs(st.corr - np.diag([1.0, -1.0, 1.0]))) < 1e-15


def test_pure_state_closed_form():
    rng = np.random.default_rng(30)
    for _ in range(100):
        alpha = rng.uniform(0.0, math.pi / 2)
        st = pure_state(alpha)
        c2, s2 = math.cos(2 * alpha), math.sin(2 * alpha)
        assert np.max(np.abs(st.bloch_a - [0, 0, c2])) < 1e-12
        assert np.max(np.abs(st.bloch_b - [0, 0, c2])) < 1e-12
        assert np.max(np.abs(st.corr - np.diag([s2, -s2, 1.0]))) < 1e-12
        assert is_physical(st)
    with pytest.raises(ValueError):
        pure_state(-0.1)
    with pytest.raises(ValueError):
        pure_state(math.pi / 2 + 0.1)


def test_singlet_fields():
    st = singlet()
    assert np.max(np.abs(st.bloch_a)) == 0.0
    assert np.max(np.abs(st.bloch_b)) == 0.0
    assert np.max(np.abs(st.corr + np.eye(3))) == 0.0
    assert is_physical(st)


def test_density_matrix_round_trip():
    rng = np.random.default_rng(31)
    for _ in range(300):
        rho = random_density(rng)
        st = from_density_matrix(rho)
        assert np.max(np.abs(to_density_matrix(st) - rho)) < 1e-12
    for _ in range(100):
        st = random_state(rng)
        st2 = from_density_matrix(to_density_matrix(st))
        assert np.max(np.abs(st.bloch_a - st2.bloch_a)) < 1e-12
        assert np.max(np.abs(st.bloch_b - st2.bloch_b)) < 1e-12
        assert np.max(np.abs(st.corr - st2.corr)) < 1e-12


def test_from_density_matrix_linear():
    rng = np.random.default_rng(32)
    for _ in range(50):
        rho1, rho2 = random_density(rng), random_density(rng)
        w = rng.uniform(0.0, 1.0)
        mixed = from_density_matrix(w * rho1 + (1 - w) * rho2)
        st1, st2 = from_density_matrix(rho1), from_density_matrix(rho2)
        assert np.max(np.abs(mixed.bloch_a - w * st1.bloch_a - (1 - w) * st2.bloch_a)) < 1e-12
        assert np.max(np.abs(mixed.corr - w * st1.corr - (1 - w) * st2.corr)) < 1e-12


def test_from_density_matrix_validation():
    with pytest.raises(ValueError):
        from_density_matrix(np.eye(4))  # trace 4
    bad = np.diag([0.5, 0.5, 0.0, 0.0]).astype(complex)
    bad[0, 1] = 0.3
    with pytest.raises(ValueError):
        from_density_matrix(bad)  # not Hermitian


def test_state_validation():
    with pytest.raises(ValueError):
        TwoQubitState(np.array([1.1, 0, 0]), np.zeros(3), np.eye(3))
    with pytest.raises(ValueError):
        TwoQubitState(np.zeros(3), np.zeros(3), 1.5 * np.eye(3))
    # entrywise-valid but unphysical correlation matrix
    st = TwoQubitState(np.zeros(3), np.zeros(3), np.eye(3))
    assert not is_physical(st)


def test_measurement_first_and_second():
    rng = np.random.default_rng(33)
    for _ in range(100):
        st = random_state(rng)
        obs = random_observable(rng)
        k = bloch_channel_map(obs).matrix
        out1 = apply_measurement_first(st, obs)
        assert np.max(np.abs(out1.bloch_a - k @ st.bloch_a)) == 0.0
        assert np.max(np.abs(out1.bloch_b - st.bloch_b)) == 0.0
        assert np.max(np.abs(out1.corr - k @ st.corr)) == 0.0
        out2 = apply_measurement_second(st, obs)
        assert np.max(np.abs(out2.bloch_b - k @ st.bloch_b)) == 0.0
        assert np.max(np.abs(out2.bloch_a - st.bloch_a)) == 0.0
        assert np.max(np.abs(out2.corr - st.corr @ k)) == 0.0


def test_averaged_map_endpoints_and_convexity():
    rng = np.random.default_rng(34)
    for _ in range(100):
        o1, o2 = random_observable(rng), random_observable(rng)
        k1 = bloch_channel_map(o1).matrix
        k2 = bloch_channel_map(o2).matrix
        assert np.max(np.abs(averaged_map(MeasurementPolicy(o1, o2, 0.0)).matrix - k1)) == 0.0
        assert np.max(np.abs(averaged_map(MeasurementPolicy(o1, o2, 1.0)).matrix - k2)) == 0.0
        eps = rng.uniform(0.0, 1.0)
        mixed = averaged_map(MeasurementPolicy(o1, o2, eps)).matrix
        assert np.max(np.abs(mixed - (1 - eps) * k1 - eps * k2)) < 1e-15


def test_averaged_map_unbiased_primary_projective_secondary():
    # primary unbiased strength s along z, secondary projective along x:
    # diagonal (r + eps(1-r), (1-eps) r, 1-eps) in the (x, y, z) basis
    for s in (0.2, 0.6, 0.9):
        for eps in (0.0, 0.1, 0.5, 0.8):
            prim = make_observable(0.0, s, (0, 0, 1.0))
            sec = make_observable(0.0, 1.0, (1.0, 0, 0))
            r = prim.reversibility
            got = averaged_map(MeasurementPolicy(prim, sec, eps)).matrix
            want = np.diag([r + eps * (1 - r), (1 - eps) * r, 1 - eps])
            assert np.max(np.abs(got - want)) < 1e-15


def test_measurement_policy_validation():
    obs = make_observable(0.0, 0.5, (0, 0, 1.0))
    with pytest.raises(ValueError):
        MeasurementPolicy(obs, obs, -0.1)
    with pytest.raises(ValueError):
        MeasurementPolicy(obs, obs, 1.1)


def test_channel_oracle_matches_bloch_maps():
    rng = np.random.default_rng(35)
    for i in range(300):
        rho = random_density(rng)
        obs = random_observable(rng)
        side = "first" if i % 2 == 0 else "second"
        via_channel = from_density_matrix(channel_oracle(rho, obs, side))
        st = from_density_matrix(rho)
        via_map = (
            apply_measurement_first(st, obs) if side == "first" else apply_measurement_second(st, obs)
        )
        assert np.max(np.abs(via_channel.bloch_a - via_map.bloch_a)) < 1e-10
        assert np.max(np.abs(via_channel.bloch_b - via_map.bloch_b)) < 1e-10
        assert np.max(np.abs(via_channel.corr - via_map.corr)) < 1e-10
    with pytest.raises(ValueError):
        channel_oracle(random_density(rng), random_observable(rng), "third")


def test_channel_oracle_preserves_trace_and_positivity():
    rng = np.random.default_rng(36)
    for i in range(100):
        rho = random_density(rng)
        out = channel_oracle(rho, random_observable(rng), "first" if i % 2 else "second")
        assert abs(np.trace(out).real - 1.0) < 1e-12
        assert np.linalg.eigvalsh(out).min() > -1e-12


def test_post_measurement_state_is_two_sided_channel_average():
    # the Bloch-route downstream state equals the epsilon-weighted mixture of
    # the four (primary/secondary x first/second) density-matrix channels
    rng = np.random.default_rng(37)
    for _ in range(50):
        rho = random_density(rng)
        pol_a = random_policy(rng, eps=rng.uniform(0.0, 1.0))
        pol_b = random_policy(rng, eps=rng.uniform(0.0, 1.0))
        wa = (1 - pol_a.secondary_prob, pol_a.secondary_prob)
        wb = (1 - pol_b.secondary_prob, pol_b.secondary_prob)
        obs_a = (pol_a.primary_obs, pol_a.secondary_obs)
        obs_b = (pol_b.primary_obs, pol_b.secondary_obs)
        mixed = np.zeros((4, 4), dtype=complex)
        for i in range(2):
            for j in range(2):
                branch = channel_oracle(channel_oracle(rho, obs_a[i], "first"), obs_b[j], "second")
                mixed += wa[i] * wb[j] * branch
        expected = from_density_matrix(mixed)
        got = post_measurement_state(from_density_matrix(rho), pol_a, pol_b)
        assert np.max(np.abs(got.bloch_a - expected.bloch_a)) < 1e-10
        assert np.max(np.abs(got.bloch_b - expected.bloch_b)) < 1e-10
        assert np.max(np.abs(got.corr - expected.corr)) < 1e-10
