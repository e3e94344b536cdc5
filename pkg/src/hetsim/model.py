"""Domain types shared by every other module, plus scenario validation.

The heterogeneity model is the execution-time table (:class:`EetMatrix`):
one row per task type, one column per machine, each finite entry the exact
duration that machine needs for that task type. ``None`` entries mark
machine/type pairs that cannot run at all (CSV token ``inf``).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Optional, Sequence

NAME_RE = re.compile(r"^[A-Za-z0-9_-]+$")

UNBOUNDED = None  # machine queue capacity sentinel


class ConfigError(Exception):
    """Invalid configuration or incompatible scenario data."""

    def __init__(self, message: str, report: "ValidationReport | None" = None):
        super().__init__(message)
        self.report = report


class TaskStatus(Enum):
    PENDING = "pending"
    BATCHED = "batched"
    QUEUED = "queued"
    EXECUTING = "executing"
    COMPLETED = "completed"
    CANCELED = "canceled"
    MISSED = "missed"


# Lifecycle graph. Canceled means the deadline passed while still in the
# batch queue; Missed means it passed after assignment to a machine.
ALLOWED_TRANSITIONS = frozenset(
    {
        (TaskStatus.PENDING, TaskStatus.BATCHED),
        (TaskStatus.BATCHED, TaskStatus.CANCELED),
        (TaskStatus.BATCHED, TaskStatus.QUEUED),
        (TaskStatus.QUEUED, TaskStatus.MISSED),
        (TaskStatus.QUEUED, TaskStatus.EXECUTING),
        (TaskStatus.EXECUTING, TaskStatus.MISSED),
        (TaskStatus.EXECUTING, TaskStatus.COMPLETED),
    }
)

TERMINAL_STATUSES = frozenset(
    {TaskStatus.COMPLETED, TaskStatus.CANCELED, TaskStatus.MISSED}
)


class SchedulingMode(Enum):
    IMMEDIATE = "immediate"
    BATCH = "batch"


@dataclass(frozen=True)
class TaskType:
    id: int
    name: str


@dataclass(frozen=True)
class MachineSpec:
    """A machine's identity and its two-state power draw."""

    index: int
    name: str
    idle_power_w: float
    busy_power_w: float

    def __post_init__(self):
        if not NAME_RE.match(self.name):
            raise ConfigError(f"invalid machine name: {self.name!r}")
        if self.idle_power_w < 0:
            raise ConfigError(f"machine {self.name}: idle power must be >= 0")
        if self.busy_power_w < self.idle_power_w:
            raise ConfigError(
                f"machine {self.name}: busy power must be >= idle power"
            )


class EetMatrix:
    """Task-type x machine table of execution durations in ticks.

    Entries are positive tick counts, or ``None`` where the machine cannot
    run the task type. Every row must keep at least one finite entry.
    """

    def __init__(
        self,
        task_types: Sequence[TaskType],
        machine_names: Sequence[str],
        entries: Sequence[Sequence[Optional[int]]],
    ):
        self.task_types = tuple(task_types)
        self.machine_names = tuple(machine_names)
        self.entries = tuple(tuple(row) for row in entries)
        self._validate()
        self._by_name = {t.name: t for t in self.task_types}

    def _validate(self) -> None:
        if not self.task_types:
            raise ConfigError("EET matrix has no task types")
        if not self.machine_names:
            raise ConfigError("EET matrix has no machines")
        seen_types = set()
        for pos, task_type in enumerate(self.task_types):
            if task_type.id != pos:
                raise ConfigError(
                    f"task type {task_type.name!r} id {task_type.id} != row {pos}"
                )
            if not NAME_RE.match(task_type.name):
                raise ConfigError(f"invalid task type name: {task_type.name!r}")
            if task_type.name in seen_types:
                raise ConfigError(f"duplicate task type name: {task_type.name!r}")
            seen_types.add(task_type.name)
        seen_machines = set()
        for name in self.machine_names:
            if not NAME_RE.match(name):
                raise ConfigError(f"invalid machine name: {name!r}")
            if name in seen_machines:
                raise ConfigError(f"duplicate machine name: {name!r}")
            seen_machines.add(name)
        if len(self.entries) != len(self.task_types):
            raise ConfigError("EET matrix row count != task type count")
        for task_type, row in zip(self.task_types, self.entries):
            if len(row) != len(self.machine_names):
                raise ConfigError(
                    f"EET row for {task_type.name!r} has {len(row)} entries, "
                    f"expected {len(self.machine_names)}"
                )
            finite = [e for e in row if e is not None]
            if any(e <= 0 for e in finite):
                raise ConfigError(
                    f"EET row for {task_type.name!r} has a non-positive duration"
                )
            if not finite:
                raise ConfigError(
                    f"task type {task_type.name!r} is supported by no machine"
                )

    @property
    def machine_count(self) -> int:
        return len(self.machine_names)

    @property
    def type_count(self) -> int:
        return len(self.task_types)

    def type_by_name(self, name: str) -> Optional[TaskType]:
        return self._by_name.get(name)

    def lookup(self, type_id: int, machine_index: int) -> Optional[int]:
        """Stored duration in ticks, or None for an unsupported pair."""
        if not 0 <= type_id < len(self.task_types):
            raise ValueError(f"task type index out of range: {type_id}")
        if not 0 <= machine_index < len(self.machine_names):
            raise ValueError(f"machine index out of range: {machine_index}")
        return self.entries[type_id][machine_index]

    def supports(self, type_id: int, machine_index: int) -> bool:
        return self.lookup(type_id, machine_index) is not None

    def mean_finite_eet(self, type_id: int) -> Fraction:
        """Mean of the finite entries of a row, as an exact fraction of ticks."""
        row = self.entries[type_id]
        finite = [e for e in row if e is not None]
        return Fraction(sum(finite), len(finite))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, EetMatrix)
            and self.task_types == other.task_types
            and self.machine_names == other.machine_names
            and self.entries == other.entries
        )

    def __repr__(self) -> str:
        return (
            f"EetMatrix({len(self.task_types)} types x "
            f"{len(self.machine_names)} machines)"
        )


@dataclass
class Task:
    """One workload entry and its lifecycle bookkeeping.

    Times are ticks; unset bookkeeping fields stay ``None``. ``energy_j``
    accumulates the busy-power energy this task drew while executing
    (partial for tasks dropped mid-execution).
    """

    id: int
    type_id: int
    arrival: int
    deadline: int
    status: TaskStatus = TaskStatus.PENDING
    assigned_machine: Optional[int] = None
    assign_time: Optional[int] = None
    start: Optional[int] = None
    finish: Optional[int] = None
    predicted_completion: Optional[int] = None
    energy_j: float = 0.0


@dataclass(frozen=True)
class SimConfig:
    """Run configuration: policy, scheduling mode, queue sizing, seed."""

    policy: str
    mode: SchedulingMode
    queue_capacity: Optional[int] = UNBOUNDED
    seed: int = 0

    def __post_init__(self):
        if self.mode is SchedulingMode.IMMEDIATE and self.queue_capacity is not None:
            raise ConfigError(
                "immediate-mode policies require unbounded machine queues"
            )
        if self.queue_capacity is not None and self.queue_capacity < 1:
            raise ConfigError("machine queue capacity must be >= 1 or unbounded")


@dataclass
class ValidationReport:
    """Outcome of compatibility checks; violations are data, not faults."""

    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, message: str) -> None:
        self.violations.append(message)

    def __str__(self) -> str:
        if self.ok:
            return "scenario ok"
        return "; ".join(self.violations)


def validate_scenario(
    eet: EetMatrix,
    machines: Sequence[MachineSpec],
    workload: Sequence[Task],
) -> ValidationReport:
    """Check that machines, EET and workload describe one coherent scenario.

    Rules: (a) the machine list matches the EET columns in count and name,
    (b) every task's type exists in the EET, (c) every deadline >= arrival.
    Task ids must also be unique for reports to be well-defined.
    """
    report = ValidationReport()
    if len(machines) != eet.machine_count:
        report.add(
            f"machine count mismatch: {len(machines)} machines vs "
            f"{eet.machine_count} EET columns"
        )
    else:
        for spec, column in zip(machines, eet.machine_names):
            if spec.name != column:
                report.add(
                    f"machine name mismatch at index {spec.index}: "
                    f"{spec.name!r} vs EET column {column!r}"
                )
    for pos, spec in enumerate(machines):
        if spec.index != pos:
            report.add(f"machine {spec.name!r} index {spec.index} != position {pos}")
    seen_ids = set()
    for task in workload:
        if task.id in seen_ids:
            report.add(f"duplicate task id {task.id}")
        seen_ids.add(task.id)
        if task.id < 0:
            report.add(f"negative task id {task.id}")
        if not 0 <= task.type_id < eet.type_count:
            report.add(f"unknown task type {task.type_id}, task id {task.id}")
        if task.deadline < task.arrival:
            report.add(f"deadline before arrival, task id {task.id}")
        if task.arrival < 0:
            report.add(f"negative arrival time, task id {task.id}")
    return report
