"""Two-qubit states in the Bloch picture and the measurement-disturbance maps.

A state is the triple (a, b, T): Bloch vectors a_j = tr[rho (sigma_j x 1)],
b_j = tr[rho (1 x sigma_j)] and spin correlation matrix
T_jk = tr[rho (sigma_j x sigma_k)].  A square-root measurement on the first
qubit sends T -> K T and a -> K a; on the second qubit T -> T L and b -> L b.
The density-matrix channel acts as the independent oracle for both maps.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .observables import (
    BlochMap,
    Observable,
    PAULI,
    bloch_channel_map,
    povm_sqrt_elements,
)

__all__ = [
    "TwoQubitState",
    "MeasurementPolicy",
    "pure_state",
    "singlet",
    "from_density_matrix",
    "to_density_matrix",
    "is_physical",
    "apply_measurement_first",
    "apply_measurement_second",
    "averaged_map",
    "post_measurement_state",
    "channel_oracle",
]

_EYE2 = np.eye(2, dtype=complex)
_EYE4 = np.eye(4, dtype=complex)
# first qubit leftmost in every tensor product
_PAULI_A = np.stack([np.kron(s, _EYE2) for s in PAULI])
_PAULI_B = np.stack([np.kron(_EYE2, s) for s in PAULI])
_PAULI_AB = np.stack([np.kron(si, sj) for si in PAULI for sj in PAULI]).reshape(3, 3, 4, 4)
for _arr in (_PAULI_A, _PAULI_B, _PAULI_AB):
    _arr.flags.writeable = False


@dataclass(frozen=True)
class TwoQubitState:
    """State as (a, b, T); physicality is checked separately by is_physical."""

    bloch_a: np.ndarray
    bloch_b: np.ndarray
    corr: np.ndarray

    def __post_init__(self):
        a = np.array(self.bloch_a, dtype=float)
        b = np.array(self.bloch_b, dtype=float)
        t = np.array(self.corr, dtype=float)
        if a.shape != (3,) or b.shape != (3,) or t.shape != (3, 3):
            raise ValueError("state needs two Bloch 3-vectors and a 3x3 correlation matrix")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b)) and np.all(np.isfinite(t))):
            raise ValueError("non-finite state entries")
        # generous slack: these are exact bounds for physical states
        if np.linalg.norm(a) > 1.0 + 1e-9 or np.linalg.norm(b) > 1.0 + 1e-9:
            raise ValueError("Bloch vector norm exceeds 1")
        if np.max(np.abs(t)) > 1.0 + 1e-9:
            raise ValueError("correlation matrix entry exceeds 1")
        for arr in (a, b, t):
            arr.flags.writeable = False
        object.__setattr__(self, "bloch_a", a)
        object.__setattr__(self, "bloch_b", b)
        object.__setattr__(self, "corr", t)


@dataclass(frozen=True)
class MeasurementPolicy:
    """A per-round choice between two observables: the primary is measured
    with probability 1 - epsilon, the secondary with probability epsilon;
    epsilon = 1/2 is the unbiased-selection case of the conjecture."""

    primary_obs: Observable
    secondary_obs: Observable
    secondary_prob: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.secondary_prob <= 1.0:
            raise ValueError(f"secondary_prob must lie in [0, 1], got {self.secondary_prob}")


def from_density_matrix(rho) -> TwoQubitState:
    """Extract (a, b, T) from a trace-one Hermitian 4x4 matrix by Pauli traces."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise ValueError(f"density matrix must be 4x4, got shape {rho.shape}")
    trace = complex(np.trace(rho))
    if abs(trace - 1.0) > 1e-10:
        raise ValueError(f"density matrix trace is {trace}, expected 1")
    if np.max(np.abs(rho - rho.conj().T)) > 1e-10:
        raise ValueError("density matrix is not Hermitian")
    a = np.einsum("jk,ikj->i", rho, _PAULI_A).real
    b = np.einsum("jk,ikj->i", rho, _PAULI_B).real
    t = np.einsum("kl,ijlk->ij", rho, _PAULI_AB).real
    return TwoQubitState(a, b, t)


def to_density_matrix(state: TwoQubitState) -> np.ndarray:
    """rho = (1x1 + a.sigma x 1 + 1 x b.sigma + sum_jk T_jk sigma_j x sigma_k)/4."""
    return (
        _EYE4
        + np.einsum("i,ijk->jk", state.bloch_a, _PAULI_A)
        + np.einsum("i,ijk->jk", state.bloch_b, _PAULI_B)
        + np.einsum("ij,ijkl->kl", state.corr, _PAULI_AB)
    ) / 4.0


def pure_state(alpha: float) -> TwoQubitState:
    """The state cos(alpha)|00> + sin(alpha)|11>, extracted from its density matrix."""
    if not 0.0 <= alpha <= np.pi / 2:
        raise ValueError(f"alpha must lie in [0, pi/2], got {alpha}")
    psi = np.zeros(4, dtype=complex)
    psi[0] = np.cos(alpha)
    psi[3] = np.sin(alpha)
    return from_density_matrix(np.outer(psi, psi.conj()))


def singlet() -> TwoQubitState:
    """The singlet state: a = b = 0, T = -I."""
    return TwoQubitState(np.zeros(3), np.zeros(3), -np.eye(3))


def is_physical(state: TwoQubitState, tol: float = 1e-9) -> bool:
    """True iff the reconstructed density matrix has min eigenvalue >= -tol."""
    return bool(np.linalg.eigvalsh(to_density_matrix(state)).min() >= -tol)


def apply_measurement_first(state: TwoQubitState, obs: Observable) -> TwoQubitState:
    """Square-root measurement on the first qubit: T -> K T, a -> K a."""
    k = bloch_channel_map(obs).matrix
    return TwoQubitState(k @ state.bloch_a, state.bloch_b, k @ state.corr)


def apply_measurement_second(state: TwoQubitState, obs: Observable) -> TwoQubitState:
    """Square-root measurement on the second qubit: T -> T L, b -> L b."""
    l = bloch_channel_map(obs).matrix
    return TwoQubitState(state.bloch_a, l @ state.bloch_b, state.corr @ l)


def averaged_map(policy: MeasurementPolicy) -> BlochMap:
    """Selection-averaged disturbance map (1-eps) K_primary + eps K_secondary."""
    eps = policy.secondary_prob
    matrix = (1.0 - eps) * bloch_channel_map(policy.primary_obs).matrix + eps * bloch_channel_map(
        policy.secondary_obs
    ).matrix
    matrix.flags.writeable = False
    return BlochMap(matrix)


def post_measurement_state(
    state: TwoQubitState, policy_a: MeasurementPolicy, policy_b: MeasurementPolicy
) -> TwoQubitState:
    """State seen by the second observer pair: T -> K T L, a -> K a, b -> L b."""
    k = averaged_map(policy_a).matrix
    l = averaged_map(policy_b).matrix
    return TwoQubitState(k @ state.bloch_a, l @ state.bloch_b, k @ state.corr @ l)


def channel_oracle(rho, obs: Observable, side: str) -> np.ndarray:
    """Density-matrix form of the square-root measurement on one tensor factor:
    phi(rho) = X_+^(1/2) rho X_+^(1/2) + X_-^(1/2) rho X_-^(1/2)."""
    rho = np.asarray(rho, dtype=complex)
    k_plus, k_minus = povm_sqrt_elements(obs)
    if side == "first":
        k_plus, k_minus = np.kron(k_plus, _EYE2), np.kron(k_minus, _EYE2)
    elif side == "second":
        k_plus, k_minus = np.kron(_EYE2, k_plus), np.kron(_EYE2, k_minus)
    else:
        raise ValueError(f"side must be 'first' or 'second', got {side!r}")
    # the Kraus operators are Hermitian, so no adjoints are needed
    return k_plus @ rho @ k_plus + k_minus @ rho @ k_minus
