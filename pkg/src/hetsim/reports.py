"""The four report renderers: task, machine, summary, full.

Rendering is pure and deterministic: tasks sorted by id, machines by
index, times in seconds with trailing zeros trimmed, percentages /
utilization / joules with three fixed decimals. The same outcome always
yields byte-identical text, whichever surface (CLI or service) asks.
"""

from __future__ import annotations

from enum import Enum

from .engine import SimOutcome
from .metrics import summarize
from .model import Task, TaskStatus
from .timefmt import format_fixed3, format_float_seconds, format_seconds


class ReportKind(Enum):
    FULL = "full"
    TASK = "task"
    MACHINE = "machine"
    SUMMARY = "summary"

    @classmethod
    def from_name(cls, name: str) -> "ReportKind":
        try:
            return cls(name.lower())
        except ValueError:
            raise ValueError(f"unknown report kind: {name!r}") from None


TASK_COLUMNS = [
    "task_id",
    "task_type",
    "status",
    "arrival",
    "deadline",
    "assigned_machine",
    "assign_time",
    "start_time",
    "end_time",
    "wait",
    "response",
]
FULL_EXTRA_COLUMNS = ["policy", "predicted_completion", "queue_wait"]
MACHINE_COLUMNS = [
    "machine",
    "completed",
    "missed_dropped",
    "busy_s",
    "idle_s",
    "utilization",
    "energy_j",
]


def _opt_seconds(ticks) -> str:
    return "" if ticks is None else format_seconds(ticks)


def _end_time(task: Task) -> int:
    # Completed tasks end at their finish; canceled and missed ones are
    # resolved at the moment the deadline passed.
    if task.status is TaskStatus.COMPLETED:
        assert task.finish is not None
        return task.finish
    return task.deadline


def _task_row(task: Task, outcome: SimOutcome) -> list[str]:
    machine = (
        outcome.machine_specs[task.assigned_machine].name
        if task.assigned_machine is not None
        else ""
    )
    wait = (
        format_seconds(task.assign_time - task.arrival)
        if task.assign_time is not None
        else ""
    )
    response = (
        format_seconds(task.finish - task.arrival)
        if task.status is TaskStatus.COMPLETED
        else ""
    )
    return [
        str(task.id),
        outcome.eet.task_types[task.type_id].name,
        task.status.value,
        format_seconds(task.arrival),
        format_seconds(task.deadline),
        machine,
        _opt_seconds(task.assign_time),
        _opt_seconds(task.start),
        format_seconds(_end_time(task)),
        wait,
        response,
    ]


def _full_extra(task: Task, outcome: SimOutcome) -> list[str]:
    queue_wait = (
        format_seconds(task.start - task.assign_time)
        if task.start is not None and task.assign_time is not None
        else ""
    )
    return [
        outcome.config.policy,
        _opt_seconds(task.predicted_completion),
        queue_wait,
    ]


def _task_table(outcome: SimOutcome, full: bool) -> list[str]:
    header = TASK_COLUMNS + FULL_EXTRA_COLUMNS if full else TASK_COLUMNS
    lines = [",".join(header)]
    for task in outcome.tasks:
        row = _task_row(task, outcome)
        if full:
            row += _full_extra(task, outcome)
        lines.append(",".join(row))
    return lines


def _machine_table(outcome: SimOutcome) -> list[str]:
    _, machines = summarize(outcome)
    lines = [",".join(MACHINE_COLUMNS)]
    for stats in machines:
        lines.append(
            ",".join(
                [
                    stats.name,
                    str(stats.completed),
                    str(stats.missed_dropped),
                    format_seconds(stats.busy_ticks),
                    format_seconds(stats.idle_ticks),
                    format_fixed3(stats.utilization),
                    format_fixed3(stats.energy_j),
                ]
            )
        )
    return lines


def _summary_table(outcome: SimOutcome) -> list[str]:
    summary, _ = summarize(outcome)
    rows = [
        ("total_tasks", str(summary.total_tasks)),
        ("completed", str(summary.completed)),
        ("canceled", str(summary.canceled)),
        ("missed", str(summary.missed)),
        ("completion_pct", format_fixed3(summary.completion_pct)),
        ("total_energy_j", format_fixed3(summary.total_energy_j)),
        ("makespan_s", format_seconds(summary.makespan_ticks)),
        ("mean_wait_s", format_float_seconds(summary.mean_wait_ticks / 1e6)),
        ("mean_response_s", format_float_seconds(summary.mean_response_ticks / 1e6)),
    ]
    return ["metric,value"] + [f"{k},{v}" for k, v in rows]


def render_report(outcome: SimOutcome, kind: ReportKind) -> str:
    if kind is ReportKind.TASK:
        lines = _task_table(outcome, full=False)
    elif kind is ReportKind.MACHINE:
        lines = _machine_table(outcome)
    elif kind is ReportKind.SUMMARY:
        lines = _summary_table(outcome)
    elif kind is ReportKind.FULL:
        lines = _task_table(outcome, full=True) + [""] + _machine_table(outcome)
    else:
        raise ValueError(f"unknown report kind: {kind!r}")
    return "\n".join(lines) + "\n"
