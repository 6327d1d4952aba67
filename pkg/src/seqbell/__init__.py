"""Sharing of CHSH nonlocality between sequential observer pairs measuring a
two-qubit state with variable-strength qubit measurements: observable algebra,
Bloch-picture disturbance maps, proxy CHSH metrics, closed-form biased
selection bounds, and a constrained evolutionary search over scenarios.
"""

from .observables import (
    PAULI,
    BlochMap,
    FidelityPair,
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
from .states import (
    MeasurementPolicy,
    TwoQubitState,
    apply_measurement_first,
    apply_measurement_second,
    averaged_map,
    channel_oracle,
    from_density_matrix,
    is_physical,
    post_measurement_state,
    pure_state,
    singlet,
    to_density_matrix,
)
from .metrics import (
    ProxyReport,
    Scenario,
    chsh_value,
    downstream_directions,
    expectation,
    horodecki_value,
    monogamy_region,
    proxy_12,
    proxy_21,
    proxy_22,
    proxy_report,
    singular_values_3x3,
)
from .bounds import (
    HypothesisError,
    ThresholdTable,
    biased_cross_limit,
    biased_s11,
    biased_s22,
    bound_eq13_residual,
    bound_eq14_residual,
    epsilon_minus,
    r_minus,
    thresholds,
)
from .search import (
    DEConfig,
    GenerationRecord,
    MonteCarloSummary,
    N_PARAMS,
    OptimizeResult,
    PARAM_LOWER,
    PARAM_NAMES,
    PARAM_UPPER,
    SweepPoint,
    SweepResult,
    decode,
    encode,
    monte_carlo_bounds,
    optimize,
    problem_functions,
    sweep_frontier,
)

__version__ = "0.1.0"

__all__ = [
    "PAULI",
    "BlochMap",
    "FidelityPair",
    "Observable",
    "banaszek_fidelities",
    "banaszek_slack",
    "bloch_channel_map",
    "make_observable",
    "povm_elements",
    "povm_sqrt_elements",
    "reversibility",
    "tradeoff_residual",
    "MeasurementPolicy",
    "TwoQubitState",
    "apply_measurement_first",
    "apply_measurement_second",
    "averaged_map",
    "channel_oracle",
    "from_density_matrix",
    "is_physical",
    "post_measurement_state",
    "pure_state",
    "singlet",
    "to_density_matrix",
    "ProxyReport",
    "Scenario",
    "chsh_value",
    "downstream_directions",
    "expectation",
    "horodecki_value",
    "monogamy_region",
    "proxy_12",
    "proxy_21",
    "proxy_22",
    "proxy_report",
    "singular_values_3x3",
    "HypothesisError",
    "ThresholdTable",
    "biased_cross_limit",
    "biased_s11",
    "biased_s22",
    "bound_eq13_residual",
    "bound_eq14_residual",
    "epsilon_minus",
    "r_minus",
    "thresholds",
    "DEConfig",
    "GenerationRecord",
    "MonteCarloSummary",
    "N_PARAMS",
    "OptimizeResult",
    "PARAM_LOWER",
    "PARAM_NAMES",
    "PARAM_UPPER",
    "SweepPoint",
    "SweepResult",
    "decode",
    "encode",
    "monte_carlo_bounds",
    "optimize",
    "problem_functions",
    "sweep_frontier",
    "__version__",
]
