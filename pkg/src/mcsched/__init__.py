"""Partitioned multicore real-time scheduling: analysis, partitioning, simulation."""

from .analysis import (
    AnalysisReport,
    CoreReport,
    Policy,
    Verdict,
    analyze_core,
    analyze_partition,
    edf_utilization_test,
    rm_bound,
    rm_utilization_test,
    tda_response_time,
    time_demand_value,
    utilization,
)
from .engine import (
    EventKind,
    LatePolicy,
    PhaseMode,
    SimConfig,
    SimStats,
    Trace,
    TraceEvent,
    critical_instant,
    run,
)
from .model import (
    Job,
    JobState,
    Partition,
    TaskKind,
    TaskSet,
    TaskSpec,
    hyperperiod,
    release_series,
    validate_task_set,
)
from .partition import InfeasibleReport, first_fit_decreasing, validate_manual

__version__ = "0.1.0"
