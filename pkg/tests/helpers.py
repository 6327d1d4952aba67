"""Shared random-object generators for the test suite; every caller passes an
explicitly seeded numpy Generator so failures reproduce."""

import numpy as np

from seqbell import (
    MeasurementPolicy,
    Scenario,
    from_density_matrix,
    make_observable,
)


def random_observable(rng, unbiased=False, strength=None):
    s = float(rng.uniform(0.0, 1.0)) if strength is None else float(strength)
    b = 0.0 if unbiased else float(rng.uniform(-1.0, 1.0)) * (1.0 - s)
    return make_observable(b, s, rng.normal(size=3))


def random_density(rng):
    g = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_state(rng):
    return from_density_matrix(random_density(rng))


def random_policy(rng, eps=0.5, unbiased=False):
    return MeasurementPolicy(
        random_observable(rng, unbiased=unbiased),
        random_observable(rng, unbiased=unbiased),
        eps,
    )


def random_scenario(rng, eps=0.5, unbiased=False):
    return Scenario(
        random_state(rng),
        random_policy(rng, eps=eps, unbiased=unbiased),
        random_policy(rng, eps=eps, unbiased=unbiased),
    )
