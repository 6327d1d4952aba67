"""Two-valued qubit observables in the bias/strength parametrization.

An observable is B*1 + S*(x.sigma) with outcome bias B, strength S and unit
direction x; positivity of the POVM pair forces |B| + S <= 1.  The square-root
measurement of such an observable disturbs the state as little as possible and
scales coherences in the x eigenbasis by the maximum reversibility R.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "PAULI",
    "Observable",
    "FidelityPair",
    "BlochMap",
    "make_observable",
    "reversibility",
    "povm_elements",
    "povm_sqrt_elements",
    "bloch_channel_map",
    "tradeoff_residual",
    "banaszek_fidelities",
    "banaszek_slack",
]

# Pauli matrices, index order (x, y, z); tensor products elsewhere keep the
# first qubit leftmost.
PAULI = np.array(
    [
        [[0.0, 1.0], [1.0, 0.0]],
        [[0.0, -1.0j], [1.0j, 0.0]],
        [[1.0, 0.0], [0.0, -1.0]],
    ],
    dtype=complex,
)
PAULI.flags.writeable = False

# Boundary observables (|B| + S = 1) produce radicands that are exact zeros up
# to floating error; anything more negative than this is a genuine domain error.
RADICAND_TOL = 1e-12


def reversibility(bias, strength):
    """Maximum reversibility R = [sqrt((1+B)^2-S^2) + sqrt((1-B)^2-S^2)] / 2.

    Accepts scalars or equal-shaped arrays.  R = 0 only for projective
    observables (B = 0, S = 1) and R = 1 only for trivial ones (S = 0); the
    unbiased case reduces to sqrt(1 - S^2).
    """
    bias = np.asarray(bias, dtype=float)
    strength = np.asarray(strength, dtype=float)
    q_plus = (1.0 + bias) ** 2 - strength**2
    q_minus = (1.0 - bias) ** 2 - strength**2
    if np.any(q_plus < -RADICAND_TOL) or np.any(q_minus < -RADICAND_TOL):
        raise ValueError("reversibility undefined: |bias| + strength > 1")
    value = 0.5 * np.sqrt(np.maximum(q_plus, 0.0)) + 0.5 * np.sqrt(np.maximum(q_minus, 0.0))
    return float(value) if value.ndim == 0 else value


@dataclass(frozen=True)
class Observable:
    """Immutable two-valued qubit observable with its cached reversibility."""

    bias: float
    strength: float
    direction: np.ndarray
    reversibility: float

    @property
    def weighted_direction(self) -> np.ndarray:
        """The Pauli part S*x of the observable."""
        return self.strength * self.direction


@dataclass(frozen=True)
class FidelityPair:
    """Mean operation fidelity F and estimation fidelity G of the square-root
    measurement: 6F = 2R + 4, 6G = S + 3."""

    operation_fidelity: float
    estimation_fidelity: float


@dataclass(frozen=True)
class BlochMap:
    """A 3x3 linear map acting on Bloch vectors and correlation matrices."""

    matrix: np.ndarray

    def apply(self, vec: np.ndarray) -> np.ndarray:
        return self.matrix @ vec


def make_observable(bias: float, strength: float, direction) -> Observable:
    """Validate, renormalize the direction, and cache the reversibility."""
    direction = np.asarray(direction, dtype=float)
    if direction.shape != (3,):
        raise ValueError(f"direction must be a 3-vector, got shape {direction.shape}")
    if not (np.isfinite(bias) and np.isfinite(strength) and np.all(np.isfinite(direction))):
        raise ValueError("non-finite observable parameters")
    if not 0.0 <= strength <= 1.0:
        raise ValueError(f"strength must lie in [0, 1], got {strength}")
    if abs(bias) + strength > 1.0 + 1e-12:
        raise ValueError(f"POVM positivity violated: |bias| + strength = {abs(bias) + strength}")
    norm = float(np.linalg.norm(direction))
    if norm < 1e-12:
        raise ValueError("direction must be nonzero")
    unit = direction / norm
    unit.flags.writeable = False
    return Observable(float(bias), float(strength), unit, reversibility(bias, strength))


def _pauli_component(direction: np.ndarray) -> np.ndarray:
    """x.sigma as a 2x2 Hermitian matrix."""
    return np.einsum("i,ijk->jk", direction, PAULI)


def povm_elements(obs: Observable) -> tuple[np.ndarray, np.ndarray]:
    """POVM pair X_pm = (1 pm X)/2 for X = B*1 + S*(x.sigma)."""
    x_op = obs.bias * np.eye(2, dtype=complex) + obs.strength * _pauli_component(obs.direction)
    eye = np.eye(2, dtype=complex)
    return (eye + x_op) / 2.0, (eye - x_op) / 2.0


def povm_sqrt_elements(obs: Observable) -> tuple[np.ndarray, np.ndarray]:
    """Kraus pair X_pm^(1/2) of the square-root measurement.

    X has eigenvalues B + S and B - S on the pm x eigenstates, so each POVM
    element is diagonal in that basis and its square root is taken eigenwise.
    """
    proj_up = (np.eye(2, dtype=complex) + _pauli_component(obs.direction)) / 2.0
    proj_dn = np.eye(2, dtype=complex) - proj_up
    lam_up = obs.bias + obs.strength
    lam_dn = obs.bias - obs.strength
    # (1 pm lam)/2 are outcome probabilities, in [0, 1] up to rounding
    def sqrt_p(p: float) -> float:
        return float(np.sqrt(max(p, 0.0)))

    k_plus = sqrt_p((1.0 + lam_up) / 2.0) * proj_up + sqrt_p((1.0 + lam_dn) / 2.0) * proj_dn
    k_minus = sqrt_p((1.0 - lam_up) / 2.0) * proj_up + sqrt_p((1.0 - lam_dn) / 2.0) * proj_dn
    return k_plus, k_minus


def bloch_channel_map(obs: Observable) -> BlochMap:
    """Bloch-picture disturbance map K = R*I + (1-R)*x x^T of the square-root
    measurement: fixes x, contracts the orthogonal plane by R."""
    r = obs.reversibility
    matrix = r * np.eye(3) + (1.0 - r) * np.outer(obs.direction, obs.direction)
    matrix.flags.writeable = False
    return BlochMap(matrix)


def tradeoff_residual(obs: Observable) -> float:
    """R^2 + S^2 - 1 + B^2(1/R^2 - 1); identically zero for valid observables.

    The inequality form R^2 + S^2 <= 1 follows, with equality exactly for
    unbiased observables.
    """
    r, s, b = obs.reversibility, obs.strength, obs.bias
    if b == 0.0:
        return r * r + s * s - 1.0
    if r == 0.0:
        # R >= sqrt(|B|), so this cannot occur for a constructed observable
        raise ValueError("reversibility 0 with nonzero bias is outside the identity's domain")
    return r * r + s * s - 1.0 + b * b * (1.0 / (r * r) - 1.0)


def banaszek_fidelities(obs: Observable) -> FidelityPair:
    """Fidelity pair (F, G) of the square-root measurement."""
    return FidelityPair(
        (2.0 * obs.reversibility + 4.0) / 6.0,
        (obs.strength + 3.0) / 6.0,
    )


def banaszek_slack(pair: FidelityPair) -> float:
    """Slack of sqrt(6F-2) <= sqrt(6G-2) + sqrt(4-6G).

    Nonnegative for every fidelity pair generated by a valid observable, and
    zero exactly in the unbiased case, where the square-root measurement
    saturates the fidelity tradeoff.
    """
    f, g = pair.operation_fidelity, pair.estimation_fidelity
    return np.sqrt(6.0 * g - 2.0) + np.sqrt(4.0 - 6.0 * g) - np.sqrt(6.0 * f - 2.0)
