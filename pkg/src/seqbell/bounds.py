"""Closed forms: the strength/reversibility thresholds, the biased-selection
algebra, and defensive residual checks of the one-sided monogamy relations.

Every constant is computed from its closed form at run time; decimal values
appear only in tests, as tolerance anchors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .metrics import Scenario, proxy_12, proxy_21, proxy_22, proxy_report

__all__ = [
    "ThresholdTable",
    "HypothesisError",
    "thresholds",
    "r_minus",
    "epsilon_minus",
    "biased_s11",
    "biased_s22",
    "biased_cross_limit",
    "bound_eq13_residual",
    "bound_eq14_residual",
]

_DOMAIN_TOL = 1e-12
_HYP_TOL = 1e-12


class HypothesisError(ValueError):
    """A monogamy residual was requested outside the hypotheses it is proven
    under; evaluating anyway would fake counterexamples to proven bounds."""


@dataclass(frozen=True)
class ThresholdTable:
    """The named constants of the biased-selection analysis.

    s_min/s_max bound the strength window where both the early and late pair
    violate CHSH; r_minus_0, r_plus, eps_max, eps_limit govern how selection
    bias closes that window; r_0/s_0 mark where the cross pairs stop violating;
    improved_bound is the orthogonal-observable monogamy bound 16/(3 sqrt 2).
    """

    s_min: float
    s_max: float
    r_minus_0: float
    r_plus: float
    eps_max: float
    eps_limit: float
    r_0: float
    s_0: float
    improved_bound: float


def r_minus(epsilon: float) -> float:
    """Smallest reversibility allowing the late pair to violate CHSH at
    secondary-selection probability epsilon: ([sqrt2 - (1-eps)^2]^(1/2) - eps)/(1-eps).

    Monotone increasing; reaches 1 at eps_limit, beyond which no reversibility
    suffices.
    """
    eps_limit = 1.0 - math.sqrt(math.sqrt(2.0) - 1.0)
    if not -_DOMAIN_TOL <= epsilon <= eps_limit + _DOMAIN_TOL:
        raise ValueError(f"epsilon must lie in [0, {eps_limit}], got {epsilon}")
    value = (math.sqrt(math.sqrt(2.0) - (1.0 - epsilon) ** 2) - epsilon) / (1.0 - epsilon)
    if value > 1.0 + 1e-9:
        raise ValueError(f"r_minus({epsilon}) = {value} exceeds 1")
    return min(value, 1.0)


def epsilon_minus(r: float) -> float:
    """Inverse of r_minus: the largest selection bias at which reversibility r
    still lets the late pair violate CHSH:
    (1 - r + r^2 - sqrt(sqrt2 (2 - 2r + r^2) - 1)) / (2 - 2r + r^2)."""
    r_lo = math.sqrt(math.sqrt(2.0) - 1.0)
    if not r_lo - _DOMAIN_TOL <= r <= 1.0 + _DOMAIN_TOL:
        raise ValueError(f"r must lie in [{r_lo}, 1], got {r}")
    quad = 2.0 - 2.0 * r + r * r
    return (1.0 - r + r * r - math.sqrt(math.sqrt(2.0) * quad - 1.0)) / quad


def thresholds() -> ThresholdTable:
    """All nine constants from their closed forms."""
    rt2 = math.sqrt(2.0)
    s_min = 8.0**0.25 - 1.0
    r_plus = 2.0**0.75 * math.sqrt(2.0**0.25 - 1.0)
    return ThresholdTable(
        s_min=s_min,
        s_max=math.sqrt(2.0 - rt2),
        r_minus_0=math.sqrt(rt2 - 1.0),
        r_plus=r_plus,
        eps_max=epsilon_minus(r_plus),
        eps_limit=1.0 - math.sqrt(rt2 - 1.0),
        r_0=math.sqrt(2.0 - math.sqrt(3.0)),
        s_0=math.sqrt(math.sqrt(3.0) - 1.0),
        improved_bound=16.0 / (3.0 * rt2),
    )


def biased_s11(strength: float) -> float:
    """CHSH value of the early pair in the biased scheme: (S+1)^2 / sqrt2.

    Exceeds 2 exactly for S > s_min.
    """
    if not 0.0 <= strength <= 1.0:
        raise ValueError(f"strength must lie in [0, 1], got {strength}")
    return (strength + 1.0) ** 2 / math.sqrt(2.0)


def biased_s22(r: float, epsilon: float) -> float:
    """Late-pair proxy in the biased scheme:
    sqrt2 [1 + r^2 - 2 eps (1 - r + r^2) + eps^2 (2 - 2r + r^2)].

    Equals 2 exactly at r = r_minus(epsilon).
    """
    if not 0.0 <= r <= 1.0 or not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"(r, epsilon) must lie in [0, 1]^2, got ({r}, {epsilon})")
    return math.sqrt(2.0) * (
        1.0
        + r * r
        - 2.0 * epsilon * (1.0 - r + r * r)
        + epsilon * epsilon * (2.0 - 2.0 * r + r * r)
    )


def biased_cross_limit(strength: float, r: float) -> float:
    """Cross-pair proxy of the biased scheme in the limit of vanishing bias:
    [((1+S)^2 + r^2 (1-S)^2)^(1/2) + ((1-S)^2 + r^2 (1+S)^2)^(1/2)] / sqrt2.

    On the unbiased-observable curve r = sqrt(1 - S^2) it exceeds 2 exactly
    for S < s_0 (equivalently r > r_0).
    """
    if not 0.0 <= strength <= 1.0 or not 0.0 <= r <= 1.0:
        raise ValueError(f"(strength, r) must lie in [0, 1]^2, got ({strength}, {r})")
    plus = (1.0 + strength) ** 2 + r * r * (1.0 - strength) ** 2
    minus = (1.0 - strength) ** 2 + r * r * (1.0 + strength) ** 2
    return (math.sqrt(plus) + math.sqrt(minus)) / math.sqrt(2.0)


def _eq13_violations(scenario: Scenario) -> list[str]:
    """Hypothesis check for the cross-pair relation: (equal strengths per side
    or orthogonal directions per side) and (unbiased observables or zero Bloch
    vectors), in the unbiased-selection mode."""
    msgs = []
    pa, pb = scenario.policy_a, scenario.policy_b
    d_sa = abs(pa.primary_obs.strength - pa.secondary_obs.strength)
    d_sb = abs(pb.primary_obs.strength - pb.secondary_obs.strength)
    dot_a = abs(float(pa.primary_obs.direction @ pa.secondary_obs.direction))
    dot_b = abs(float(pb.primary_obs.direction @ pb.secondary_obs.direction))
    equal = d_sa <= _HYP_TOL and d_sb <= _HYP_TOL
    ortho = dot_a <= _HYP_TOL and dot_b <= _HYP_TOL
    if not (equal or ortho):
        msgs.append(
            "need equal strengths per side (differ by "
            f"{d_sa:.3g}/{d_sb:.3g}) or orthogonal directions per side "
            f"(|x.x'| = {dot_a:.3g}, |y.y'| = {dot_b:.3g})"
        )
    max_bias = max(
        abs(o.bias)
        for o in (pa.primary_obs, pa.secondary_obs, pb.primary_obs, pb.secondary_obs)
    )
    max_bloch = max(
        float(np.linalg.norm(scenario.initial_state.bloch_a)),
        float(np.linalg.norm(scenario.initial_state.bloch_b)),
    )
    if max_bias > _HYP_TOL and max_bloch > _HYP_TOL:
        msgs.append(
            f"need unbiased observables (max |bias| = {max_bias:.3g}) or zero "
            f"Bloch vectors (max norm = {max_bloch:.3g})"
        )
    msgs.extend(_selection_violations(scenario))
    return msgs


def _selection_violations(scenario: Scenario) -> list[str]:
    msgs = []
    for name, pol in (("A", scenario.policy_a), ("B", scenario.policy_b)):
        if abs(pol.secondary_prob - 0.5) > _HYP_TOL:
            msgs.append(
                f"side {name} selection probability is {pol.secondary_prob}, "
                "but the relation is proven for unbiased selection (1/2)"
            )
    return msgs


def _eq14_violations(scenario: Scenario) -> list[str]:
    """Hypothesis check for the one-sided relation: unbiased observables and
    equal strengths per side, in the unbiased-selection mode."""
    msgs = []
    pa, pb = scenario.policy_a, scenario.policy_b
    d_sa = abs(pa.primary_obs.strength - pa.secondary_obs.strength)
    d_sb = abs(pb.primary_obs.strength - pb.secondary_obs.strength)
    if d_sa > _HYP_TOL or d_sb > _HYP_TOL:
        msgs.append(f"need equal strengths per side (differ by {d_sa:.3g}/{d_sb:.3g})")
    max_bias = max(
        abs(o.bias)
        for o in (pa.primary_obs, pa.secondary_obs, pb.primary_obs, pb.secondary_obs)
    )
    if max_bias > _HYP_TOL:
        msgs.append(f"need unbiased observables (max |bias| = {max_bias:.3g})")
    msgs.extend(_selection_violations(scenario))
    return msgs


def _is_orthogonal_per_side(scenario: Scenario) -> bool:
    pa, pb = scenario.policy_a, scenario.policy_b
    return (
        abs(float(pa.primary_obs.direction @ pa.secondary_obs.direction)) <= _HYP_TOL
        and abs(float(pb.primary_obs.direction @ pb.secondary_obs.direction)) <= _HYP_TOL
    )


def bound_eq13_residual(scenario: Scenario, check_hypotheses: bool = True) -> float:
    """Residual 8 - (proxy_12^2 + proxy_21^2) of the cross-pair monogamy
    relation; nonnegative (up to 1e-9) under the proven hypotheses.

    With check_hypotheses=False the residual is evaluated regardless, for
    stress tests of the relation outside its hypotheses, where it is known to
    go negative for some choices.
    """
    if check_hypotheses:
        msgs = _eq13_violations(scenario)
        if msgs:
            raise HypothesisError("; ".join(msgs))
    return 8.0 - (proxy_12(scenario) ** 2 + proxy_21(scenario) ** 2)


def bound_eq14_residual(scenario: Scenario, check_hypotheses: bool = True) -> float:
    """Residual bound - (|s11| + s22) of the one-sided monogamy relation.

    The bound is 4 for unbiased observables with equal strengths per side and
    tightens to 16/(3 sqrt 2) when the two directions on each side are also
    orthogonal.
    """
    if check_hypotheses:
        msgs = _eq14_violations(scenario)
        if msgs:
            raise HypothesisError("; ".join(msgs))
    report = proxy_report(scenario)
    bound = thresholds().improved_bound if _is_orthogonal_per_side(scenario) else 4.0
    return bound - (report.s11 + report.s22)
