"""Greedy maximization of monotone one-sided smooth objectives over polytopes.

The package ships two threshold-greedy solvers (deterministic and
stochastic), a serial single-direction baseline, an exhaustive grid oracle,
two objective families with exact first- and second-order oracles, sampled
verifiers for the smoothness and locality inequalities, and a small CLI
(`ossmax generate | solve | verify | bench`).
"""

from .core import (
    ConfigError,
    GridBudgetError,
    RoundLimitError,
    Solution,
    SolverConfig,
    SolverError,
    SolverTrace,
    TraceSnapshot,
    Vector,
    contraction_factor,
    default_outer_round_cap,
    guaranteed_ratio,
)
from .instances import Instance, instance_from_dict, instance_to_dict, read_instance, write_instance
from .objectives import (
    CoverageMultilinearObjective,
    OssObjective,
    QuadraticSemiMetricObjective,
    SemiMetricReport,
    StochasticObjective,
    VerificationReport,
    make_coverage_instance,
    make_semimetric_instance,
    random_semimetric_instance,
    sample_stoch_gradient,
    verify_eta_local,
    verify_oss,
    verify_semimetric,
)
from .polytopes import (
    BoxPolytope,
    CardinalityPolytope,
    MonotoneLinearPolytope,
    Polytope,
    basis_directions,
    membership,
    opt_bounds,
)
from .solvers import (
    DirectionSet,
    GradientEstimate,
    choose_step_size,
    grid_maximum,
    initial_gradient_estimate,
    kappa_envelope,
    momentum_weight,
    parallel_greedy,
    select_directions,
    serial_greedy,
    stochastic_parallel_greedy,
    update_gradient_estimate,
)

__version__ = "0.1.0"

__all__ = [
    "BoxPolytope",
    "CardinalityPolytope",
    "ConfigError",
    "CoverageMultilinearObjective",
    "DirectionSet",
    "GradientEstimate",
    "GridBudgetError",
    "Instance",
    "MonotoneLinearPolytope",
    "OssObjective",
    "Polytope",
    "QuadraticSemiMetricObjective",
    "RoundLimitError",
    "SemiMetricReport",
    "Solution",
    "SolverConfig",
    "SolverError",
    "SolverTrace",
    "StochasticObjective",
    "TraceSnapshot",
    "VerificationReport",
    "Vector",
    "basis_directions",
    "choose_step_size",
    "contraction_factor",
    "default_outer_round_cap",
    "grid_maximum",
    "guaranteed_ratio",
    "initial_gradient_estimate",
    "instance_from_dict",
    "instance_to_dict",
    "kappa_envelope",
    "make_coverage_instance",
    "make_semimetric_instance",
    "membership",
    "momentum_weight",
    "opt_bounds",
    "parallel_greedy",
    "random_semimetric_instance",
    "read_instance",
    "sample_stoch_gradient",
    "select_directions",
    "serial_greedy",
    "stochastic_parallel_greedy",
    "update_gradient_estimate",
    "verify_eta_local",
    "verify_oss",
    "verify_semimetric",
    "write_instance",
]
