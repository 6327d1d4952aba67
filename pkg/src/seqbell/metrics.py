"""CHSH parameter, Horodecki criterion, and the downstream proxy quantities.

For a fixed scenario (initial state, one measurement policy per side) the
proxies give the maximum CHSH value available to each later observer pair once
the upstream observables are fixed, with the downstream projective
measurements already optimized analytically.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .observables import Observable
from .states import MeasurementPolicy, TwoQubitState, averaged_map

__all__ = [
    "Scenario",
    "ProxyReport",
    "expectation",
    "chsh_value",
    "singular_values_3x3",
    "horodecki_value",
    "proxy_22",
    "proxy_12",
    "proxy_21",
    "proxy_report",
    "monogamy_region",
    "downstream_directions",
]


@dataclass(frozen=True)
class Scenario:
    """Initial two-qubit state plus the measurement policy of each side."""

    initial_state: TwoQubitState
    policy_a: MeasurementPolicy
    policy_b: MeasurementPolicy


@dataclass(frozen=True)
class ProxyReport:
    """The four quantities of interest: s11 = |S(A1,B1)| and the three proxies."""

    s11: float
    s12: float
    s21: float
    s22: float

    def as_dict(self) -> dict[str, float]:
        return {"s11": self.s11, "s12": self.s12, "s21": self.s21, "s22": self.s22}


def expectation(obs_a: Observable, obs_b: Observable, state: TwoQubitState) -> float:
    """<X x Y> = B_X B_Y + B_X S_Y (b.y) + B_Y S_X (a.x) + S_X S_Y x.T y."""
    return (
        obs_a.bias * obs_b.bias
        + obs_a.bias * obs_b.strength * float(state.bloch_b @ obs_b.direction)
        + obs_b.bias * obs_a.strength * float(state.bloch_a @ obs_a.direction)
        + obs_a.strength
        * obs_b.strength
        * float(obs_a.direction @ state.corr @ obs_b.direction)
    )


def chsh_value(
    obs_x: Observable,
    obs_xp: Observable,
    obs_y: Observable,
    obs_yp: Observable,
    state: TwoQubitState,
) -> float:
    """CHSH parameter <XY> + <XY'> + <X'Y> - <X'Y'> (signed)."""
    return (
        expectation(obs_x, obs_y, state)
        + expectation(obs_x, obs_yp, state)
        + expectation(obs_xp, obs_y, state)
        - expectation(obs_xp, obs_yp, state)
    )


def _jacobi_eigvals_sym3(matrix: np.ndarray) -> np.ndarray:
    """Eigenvalues of a symmetric 3x3 matrix by cyclic Jacobi rotations.

    Sweeps the (0,1), (0,2), (1,2) pivots until the off-diagonal Frobenius
    norm drops below 1e-14 (relative to the matrix scale).  Convergence is
    quadratic; the sweep cap is far beyond what is ever needed.
    """
    a = [[float(matrix[i, j]) for j in range(3)] for i in range(3)]
    scale = max(abs(a[i][j]) for i in range(3) for j in range(3))
    if scale == 0.0:
        return np.zeros(3)
    tol = 1e-14 * scale
    for _ in range(50):
        off = np.sqrt(2.0 * (a[0][1] ** 2 + a[0][2] ** 2 + a[1][2] ** 2))
        if off < tol:
            break
        for p, q in ((0, 1), (0, 2), (1, 2)):
            apq = a[p][q]
            if apq == 0.0:
                continue
            # symmetric Schur decomposition of the 2x2 pivot block
            theta = (a[q][q] - a[p][p]) / (2.0 * apq)
            t = (1.0 if theta >= 0.0 else -1.0) / (abs(theta) + np.sqrt(theta * theta + 1.0))
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            r = 3 - p - q  # the untouched index
            apr, aqr = a[p][r], a[q][r]
            a[p][p] -= t * apq
            a[q][q] += t * apq
            a[p][q] = a[q][p] = 0.0
            a[p][r] = a[r][p] = c * apr - s * aqr
            a[q][r] = a[r][q] = s * apr + c * aqr
    else:
        raise RuntimeError("Jacobi iteration failed to converge on a 3x3 symmetric matrix")
    return np.sort(np.array([a[0][0], a[1][1], a[2][2]]))


def singular_values_3x3(matrix) -> np.ndarray:
    """Singular values of a 3x3 matrix, sorted descending, each >= 0.

    Computed as the square roots of the eigenvalues of M^T M obtained by
    cyclic Jacobi iteration; a closed-form cubic solve is avoided because it
    loses accuracy near degenerate singular values.
    """
    matrix = np.asarray(matrix, dtype=float)
    if matrix.shape != (3, 3):
        raise ValueError(f"expected a 3x3 matrix, got shape {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise ValueError("matrix entries must be finite")
    eigvals = _jacobi_eigvals_sym3(matrix.T @ matrix)
    return np.sqrt(np.maximum(eigvals[::-1], 0.0))


def horodecki_value(corr) -> float:
    """2 sqrt(s1^2 + s2^2) for the two largest singular values of T; a two-qubit
    state violates CHSH iff this exceeds 2."""
    s = singular_values_3x3(corr)
    return 2.0 * float(np.sqrt(s[0] ** 2 + s[1] ** 2))


def proxy_22(scenario: Scenario) -> float:
    """Best CHSH value of the late pair: Horodecki value of K T L."""
    k = averaged_map(scenario.policy_a).matrix
    l = averaged_map(scenario.policy_b).matrix
    return horodecki_value(k @ scenario.initial_state.corr @ l)


def _cross_vectors_12(scenario: Scenario) -> tuple[np.ndarray, np.ndarray]:
    """The two bracketed vectors whose norms sum to proxy_12."""
    x = scenario.policy_a.primary_obs
    xp = scenario.policy_a.secondary_obs
    l = averaged_map(scenario.policy_b).matrix
    state = scenario.initial_state
    lb = l @ state.bloch_b
    xt, xtp = x.weighted_direction, xp.weighted_direction
    w_plus = (x.bias + xp.bias) * lb + l @ (state.corr.T @ (xt + xtp))
    w_minus = (x.bias - xp.bias) * lb + l @ (state.corr.T @ (xt - xtp))
    return w_plus, w_minus


def _cross_vectors_21(scenario: Scenario) -> tuple[np.ndarray, np.ndarray]:
    """The two bracketed vectors whose norms sum to proxy_21."""
    y = scenario.policy_b.primary_obs
    yp = scenario.policy_b.secondary_obs
    k = averaged_map(scenario.policy_a).matrix
    state = scenario.initial_state
    ka = k @ state.bloch_a
    yt, ytp = y.weighted_direction, yp.weighted_direction
    w_plus = (y.bias + yp.bias) * ka + k @ (state.corr @ (yt + ytp))
    w_minus = (y.bias - yp.bias) * ka + k @ (state.corr @ (yt - ytp))
    return w_plus, w_minus


def proxy_12(scenario: Scenario) -> float:
    """Best CHSH value available to (A1, B2), maximized over B2's projective
    measurements: |(B_X+B_X')Lb + LT^t(xt+xt')| + |(B_X-B_X')Lb + LT^t(xt-xt')|."""
    w_plus, w_minus = _cross_vectors_12(scenario)
    return float(np.linalg.norm(w_plus) + np.linalg.norm(w_minus))


def proxy_21(scenario: Scenario) -> float:
    """Mirror of proxy_12 for the pair (A2, B1), with K, a and T in place of
    L, b and T^t."""
    w_plus, w_minus = _cross_vectors_21(scenario)
    return float(np.linalg.norm(w_plus) + np.linalg.norm(w_minus))


def downstream_directions(scenario: Scenario, pair: str) -> tuple[np.ndarray, np.ndarray]:
    """Optimal projective directions of the downstream observer in a cross pair.

    pair "12" gives B2's directions, "21" gives A2's: the unit vectors along
    the two bracketed vectors of the corresponding proxy.  A zero bracket means
    any direction is optimal; the zero vector is returned in that case.
    """
    if pair == "12":
        w_plus, w_minus = _cross_vectors_12(scenario)
    elif pair == "21":
        w_plus, w_minus = _cross_vectors_21(scenario)
    else:
        raise ValueError(f"pair must be '12' or '21', got {pair!r}")

    def unit(v: np.ndarray) -> np.ndarray:
        norm = np.linalg.norm(v)
        return v / norm if norm > 0.0 else np.zeros(3)

    return unit(w_plus), unit(w_minus)


def proxy_report(scenario: Scenario) -> ProxyReport:
    """Assemble |s11| (via chsh_value on the initial state) and the three proxies."""
    s11 = chsh_value(
        scenario.policy_a.primary_obs,
        scenario.policy_a.secondary_obs,
        scenario.policy_b.primary_obs,
        scenario.policy_b.secondary_obs,
        scenario.initial_state,
    )
    return ProxyReport(abs(s11), proxy_12(scenario), proxy_21(scenario), proxy_22(scenario))


def monogamy_region(u: float, v: float) -> bool:
    """True iff (u, v) lies outside the open square (2, 2*sqrt(2)]^2 where both
    pairs would violate CHSH: |u + v - 6| + |u - v| >= 2 (boundary allowed)."""
    if u < 0.0 or v < 0.0:
        raise ValueError("monogamy_region expects nonnegative CHSH magnitudes")
    return bool(abs(u + v - 6.0) + abs(u - v) >= 2.0)
