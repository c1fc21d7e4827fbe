"""Long-run average optimal control of finite deterministic systems.

The value of interest is the best achievable long-run average running
cost from a given start state, kept start-dependent throughout: no
ergodicity is assumed.  The package computes it several independent ways
and cross-checks them: finite-horizon and discounted dynamic programming,
a measure linear program over stationary distributions reachable from the
start, its certificate dual, and minimum mean cycle analysis, all solved
with an in-package simplex method.
"""

from .problem import (
    ControlProblem,
    Graph,
    ProblemFormatError,
    ViabilityViolation,
    build_graph,
    load_problem,
    problem_from_dict,
    problem_to_dict,
    save_problem,
    snap_dynamics,
)
from .builtin import make_problem, random_problem, threestate_problem, toy_problem
from .dp import (
    InadmissibleAction,
    NotPeriodic,
    PeriodicProcess,
    Trajectory,
    ValueFunction,
    average_cost,
    greedy_policy,
    rollout,
    value_iteration_avg,
    value_iteration_discounted,
)
from .simplex import IterationLimit, LinearProgram, LpSolution, kkt_residuals, solve
from .measures import (
    EmptySet,
    FlowMeasure,
    MetricBasis,
    NoCycleDetected,
    OccupationalMeasure,
    basis_from_functions,
    chebyshev_basis,
    detect_cycle,
    discounted_occupational_measure,
    discounted_residual,
    hausdorff,
    measure_from_json,
    measure_to_json,
    membership_W,
    membership_W_alpha,
    occupational_measure,
    pairing,
    rho,
    state_inflow,
    state_marginal,
    stationarity_residual,
)
from .programs import (
    DualCertificate,
    DualResult,
    DualUnbounded,
    ErgodicInnerResult,
    PrimalInfeasible,
    PrimalPair,
    PrimalResult,
    ProjectionResult,
    QFormResult,
    VPerResult,
    ergodic_inner_lp,
    k_membership,
    pair_from_process,
    pair_residuals,
    project_to_W,
    reachable_states,
    solve_dual,
    solve_primal,
    solve_q_form,
    sup_over_K,
    v_per,
)
from .optimality import (
    InfeasibleCertificate,
    NecessityReport,
    certificate_residuals,
    check_necessary_periodic,
    check_sufficient,
    cost_gap_identity,
    extract_feedback,
)

__version__ = "0.1.0"

__all__ = [
    "ControlProblem",
    "Graph",
    "ProblemFormatError",
    "ViabilityViolation",
    "build_graph",
    "load_problem",
    "problem_from_dict",
    "problem_to_dict",
    "save_problem",
    "snap_dynamics",
    "make_problem",
    "random_problem",
    "threestate_problem",
    "toy_problem",
    "InadmissibleAction",
    "NotPeriodic",
    "PeriodicProcess",
    "Trajectory",
    "ValueFunction",
    "average_cost",
    "greedy_policy",
    "rollout",
    "value_iteration_avg",
    "value_iteration_discounted",
    "IterationLimit",
    "LinearProgram",
    "LpSolution",
    "kkt_residuals",
    "solve",
    "EmptySet",
    "FlowMeasure",
    "MetricBasis",
    "NoCycleDetected",
    "OccupationalMeasure",
    "basis_from_functions",
    "chebyshev_basis",
    "detect_cycle",
    "discounted_occupational_measure",
    "discounted_residual",
    "hausdorff",
    "measure_from_json",
    "measure_to_json",
    "membership_W",
    "membership_W_alpha",
    "occupational_measure",
    "pairing",
    "rho",
    "state_inflow",
    "state_marginal",
    "stationarity_residual",
    "DualCertificate",
    "DualResult",
    "DualUnbounded",
    "ErgodicInnerResult",
    "PrimalInfeasible",
    "PrimalPair",
    "PrimalResult",
    "ProjectionResult",
    "QFormResult",
    "VPerResult",
    "ergodic_inner_lp",
    "k_membership",
    "pair_from_process",
    "pair_residuals",
    "project_to_W",
    "reachable_states",
    "solve_dual",
    "solve_primal",
    "solve_q_form",
    "sup_over_K",
    "v_per",
    "InfeasibleCertificate",
    "NecessityReport",
    "certificate_residuals",
    "check_necessary_periodic",
    "check_sufficient",
    "cost_gap_identity",
    "extract_feedback",
]
