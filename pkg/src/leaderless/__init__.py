"""Leaderless socio-ecological resource consumption networks.

One renewable resource with logistic growth is harvested by ``n`` agents
whose efforts respond both to the resource level and to their social
neighbours. When the network is leaderless the total effort and the log
resource level obey a closed planar system with a globally stable
equilibrium; this package synthesizes such networks, computes that
equilibrium, and integrates and checks all three levels of the dynamics.
"""
from .aggregate import (
    AggregateConstants,
    AssumptionFlags,
    EquilibriumReport,
    aggregate_constants,
    aggregate_vector_field,
    check_assumptions,
    equilibrium,
    individual_equilibrium,
    lyapunov,
    lyapunov_rate,
    shifted_vector_field,
    to_aggregate,
    to_shifted,
)
from .model import (
    AgentParams,
    DimensionalModel,
    InfluenceReport,
    NondimModel,
    ResourceParams,
    SocialWeights,
    dimensional_vector_field,
    influence,
    is_leaderless,
    leaderless_residual,
    make_model,
    nondim_vector_field,
    nondimensionalize,
    validate_weights,
)
from .scenario import Scenario, load_preset, load_scenario, preset_names
from .simulation import (
    IntegratorConfig,
    Trajectory,
    aggregate_consistency,
    integrate,
    lyapunov_monotonicity,
    simulate_aggregate,
    simulate_full,
    simulate_shifted,
    to_dimensional,
)
from .synthesis import (
    SynthesisResult,
    build_influence_matrix,
    kernel_vector,
    synthesize_orientations,
)

__version__ = "0.1.0"
