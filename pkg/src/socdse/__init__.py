"""Phase-driven SoC performance simulation and architecture-aware
design-space exploration."""

from .budget import Budget, MetricValues, distance_to_budget, meets_budget
from .database import IpDatabase, build_grid_database
from .explorer import (
    AnnealOutcome,
    ExplorationTrace,
    ExplorerConfig,
    analyze_codesign,
    anneal,
    naive_sa_baseline,
    select_metric,
    select_move,
    select_task_block,
)
from .hardware import (
    BlockKind,
    DesignPoint,
    HardwareBlock,
    Mapping,
    Topology,
    base_design,
    route,
    validate_design,
)
from .moves import Fork, ForkSwap, Join, Migrate, Swap, apply_move, invert_move
from .oracle import EnumerationBounds, OracleConfig, enumerate_space, oracle_simulate
from .rates import block_rates
from .simulator import (
    SimResult,
    completion_time,
    estimate_power_area,
    phase_duration,
    simulate,
)
from .workload import (
    DataEdge,
    SynthSpec,
    Task,
    TaskGraph,
    compute_llp_avg,
    compute_talp,
    parse_workload,
    serialize_workload,
    synth_workload,
)

__version__ = "0.1.0"

__all__ = [
    "AnnealOutcome", "BlockKind", "Budget", "DataEdge", "DesignPoint",
    "EnumerationBounds", "ExplorationTrace", "ExplorerConfig", "Fork",
    "ForkSwap", "HardwareBlock", "IpDatabase", "Join", "Mapping",
    "MetricValues", "Migrate", "OracleConfig", "SimResult", "Swap",
    "SynthSpec", "Task", "TaskGraph", "Topology", "analyze_codesign",
    "anneal", "apply_move", "base_design", "block_rates",
    "build_grid_database", "completion_time", "compute_llp_avg",
    "compute_talp", "distance_to_budget", "enumerate_space",
    "estimate_power_area", "invert_move", "meets_budget",
    "naive_sa_baseline", "oracle_simulate", "parse_workload",
    "phase_duration", "route", "select_metric", "select_move",
    "select_task_block", "serialize_workload", "simulate", "synth_workload",
    "validate_design", "__version__",
]
