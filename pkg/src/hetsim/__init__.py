"""Deterministic discrete-event simulator for deadline-constrained task
scheduling on heterogeneous machines."""

from .engine import (
    AppliedEvent,
    EventKind,
    SimEvent,
    SimOutcome,
    Simulation,
    StateSnapshot,
    event_order_key,
    format_event_log,
    init_simulation,
    run_scenario,
)
from .metrics import MachineStats, SummaryStats, machine_energy, summarize
from .model import (
    ConfigError,
    EetMatrix,
    MachineSpec,
    SchedulingMode,
    SimConfig,
    Task,
    TaskStatus,
    TaskType,
    UNBOUNDED,
    ValidationReport,
    validate_scenario,
)
from .policies import (
    Assignment,
    BatchedTask,
    MachinesView,
    MachineSlot,
    Policy,
    expected_completion_time,
    get_policy,
    list_policies,
    register_policy,
    unregister_policy,
)
from .reports import ReportKind, render_report
from .workload import (
    ConstantArrivals,
    ExponentialArrivals,
    ParseError,
    TypeArrivalSpec,
    UniformArrivals,
    WorkloadGenSpec,
    format_eet_csv,
    format_machines_csv,
    format_workload_csv,
    generate_workload,
    parse_eet_csv,
    parse_machines_csv,
    parse_workload_csv,
)

__all__ = [
    "AppliedEvent",
    "Assignment",
    "BatchedTask",
    "ConfigError",
    "ConstantArrivals",
    "EetMatrix",
    "EventKind",
    "ExponentialArrivals",
    "MachineSlot",
    "MachineSpec",
    "MachineStats",
    "MachinesView",
    "ParseError",
    "Policy",
    "ReportKind",
    "SchedulingMode",
    "SimConfig",
    "SimEvent",
    "SimOutcome",
    "Simulation",
    "StateSnapshot",
    "SummaryStats",
    "Task",
    "TaskStatus",
    "TaskType",
    "TypeArrivalSpec",
    "UNBOUNDED",
    "UniformArrivals",
    "ValidationReport",
    "WorkloadGenSpec",
    "event_order_key",
    "expected_completion_time",
    "format_eet_csv",
    "format_event_log",
    "format_machines_csv",
    "format_workload_csv",
    "generate_workload",
    "get_policy",
    "init_simulation",
    "list_policies",
    "machine_energy",
    "parse_eet_csv",
    "parse_machines_csv",
    "parse_workload_csv",
    "register_policy",
    "render_report",
    "run_scenario",
    "summarize",
    "unregister_policy",
    "validate_scenario",
]

__version__ = "0.1.0"
