"""Reservoir operation optimization workbench.

A library of allocation-nested solvers (deterministic DP, stochastic DP on
inflow classes, tabular Q-learning) over a shared hydro-system model, a
multi-weight Pareto driver, and a small workbench (CSV data, run registry,
CLI, HTTP service) around them.
"""

from .allocation import AllocationProblem, allocate, allocate_oracle, allocation_cost
from .clustering import (
    InflowClustering,
    TransitionMatrixSet,
    build_transition_matrices,
    class_representatives,
    kmeans_cluster,
)
from .dp import DpSolution, awd_dp_solve, find_cyclic_start, ndp_solve, simulate_policy
from .grid import StorageGrid
from .moss import MossEntry, MossRun, dominance_mask, moss_execute, pareto_filter
from .outcomes import OutcomeSeries
from .rl import (
    QStore,
    RlBenchmark,
    RlConfig,
    RlPolicy,
    TotalRlPolicy,
    feasible_actions,
    nrl_train,
    q_update,
    s_n_benchmark,
)
from .sdp import SdpPolicy, nsdp_solve, sdp_policy_lookup
from .system import (
    CurveRangeError,
    Infeasible,
    PolicyGapError,
    SolverError,
    StepOutcome,
    StepRecord,
    SystemSpec,
    WeightVector,
    apply_decision,
    deviations,
    evaporation,
    hydropower,
    interpolate_curve,
    level_to_volume,
    step_reward,
    transition,
    tributary_inflow,
    volume_to_area,
    volume_to_level,
)

__version__ = "0.1.0"

__all__ = [
    "AllocationProblem",
    "allocate",
    "allocate_oracle",
    "allocation_cost",
    "InflowClustering",
    "TransitionMatrixSet",
    "build_transition_matrices",
    "class_representatives",
    "kmeans_cluster",
    "DpSolution",
    "awd_dp_solve",
    "find_cyclic_start",
    "ndp_solve",
    "simulate_policy",
    "StorageGrid",
    "MossEntry",
    "MossRun",
    "dominance_mask",
    "moss_execute",
    "pareto_filter",
    "OutcomeSeries",
    "QStore",
    "RlBenchmark",
    "RlConfig",
    "RlPolicy",
    "TotalRlPolicy",
    "feasible_actions",
    "nrl_train",
    "q_update",
    "s_n_benchmark",
    "SdpPolicy",
    "nsdp_solve",
    "sdp_policy_lookup",
    "CurveRangeError",
    "Infeasible",
    "PolicyGapError",
    "SolverError",
    "StepOutcome",
    "StepRecord",
    "SystemSpec",
    "WeightVector",
    "apply_decision",
    "deviations",
    "evaporation",
    "hydropower",
    "interpolate_curve",
    "level_to_volume",
    "step_reward",
    "transition",
    "tributary_inflow",
    "volume_to_area",
    "volume_to_level",
    "__version__",
]
