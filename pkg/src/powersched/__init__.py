"""Power-aware scheduling: speed choices under power = speed**alpha.

Solvers for two budgeted problems on release-ordered jobs: minimize makespan
(any works, one or more processors) and minimize total flow (equal works),
plus the full energy/makespan trade-off curve with its closed-form
derivatives, slow convex reference oracles, and a partition-problem
reduction built on the multiprocessor makespan solver.
"""

__version__ = "0.1.0"

from .core import (
    ABS_TOL,
    REL_TOL,
    CanonicalReport,
    ConvergenceError,
    DegenerateReleaseError,
    InfeasibleError,
    Instance,
    InternalError,
    InvalidArgumentError,
    InvalidInstanceError,
    Job,
    PowerModel,
    Schedule,
    ScheduledJob,
    SchedulingError,
    TooLargeError,
    UnsupportedInstanceError,
    check_canonical,
    dumps_canonical,
    energy_of_run,
    format_float,
    instance_from_jsonable,
    instance_to_jsonable,
    load_instance,
    make_instance,
    makespan,
    schedule_to_jsonable,
    speed_for_energy,
    total_energy,
    total_flow,
)
from .curve import (
    CurveSegment,
    Frontier,
    build_frontier,
    derivative,
    eval_makespan,
    invert_deadline,
    sample_frontier,
    second_derivative,
    segment_derivatives_at,
)
from .flow_uni import (
    FlowChain,
    FlowSolverConfig,
    chain_speeds,
    chains_for_tail_speed,
    classify_relations,
    min_flow_for_energy,
    pinned_regime_bounds,
    schedule_for_tail_speed,
)
from .makespan_uni import (
    energy_for_deadline,
    fixed_block_speed,
    inc_merge,
    inc_merge_with_stats,
)
from .multi import (
    Assignment,
    PartitionInstance,
    assignment_value,
    best_partition_makespan,
    combined_schedule,
    cyclic_assign,
    decide_partition_via_schedule,
    multi_flow_equal_work,
    multi_makespan_equal_work,
    partition_to_instance,
    solve_common_deadline,
)
from .oracle import (
    OracleConfig,
    convex_oracle,
    enumerate_assignments,
    oracle_best_value,
)

__all__ = [
    "ABS_TOL",
    "REL_TOL",
    "Assignment",
    "CanonicalReport",
    "ConvergenceError",
    "CurveSegment",
    "DegenerateReleaseError",
    "FlowChain",
    "FlowSolverConfig",
    "Frontier",
    "InfeasibleError",
    "Instance",
    "InternalError",
    "InvalidArgumentError",
    "InvalidInstanceError",
    "Job",
    "OracleConfig",
    "PartitionInstance",
    "PowerModel",
    "Schedule",
    "ScheduledJob",
    "SchedulingError",
    "TooLargeError",
    "UnsupportedInstanceError",
    "assignment_value",
    "best_partition_makespan",
    "build_frontier",
    "chain_speeds",
    "chains_for_tail_speed",
    "check_canonical",
    "classify_relations",
    "combined_schedule",
    "convex_oracle",
    "cyclic_assign",
    "decide_partition_via_schedule",
    "derivative",
    "dumps_canonical",
    "energy_for_deadline",
    "energy_of_run",
    "enumerate_assignments",
    "eval_makespan",
    "fixed_block_speed",
    "format_float",
    "inc_merge",
    "inc_merge_with_stats",
    "instance_from_jsonable",
    "instance_to_jsonable",
    "invert_deadline",
    "load_instance",
    "make_instance",
    "makespan",
    "min_flow_for_energy",
    "multi_flow_equal_work",
    "multi_makespan_equal_work",
    "oracle_best_value",
    "partition_to_instance",
    "pinned_regime_bounds",
    "sample_frontier",
    "schedule_for_tail_speed",
    "schedule_to_jsonable",
    "second_derivative",
    "segment_derivatives_at",
    "solve_common_deadline",
    "speed_for_energy",
    "total_energy",
    "total_flow",
]
