"""CSV parsing/formatting for scenarios and the seeded workload generator.

File schemas (UTF-8, comma separated, ``\\n`` line endings, header first,
names restricted to ``[A-Za-z0-9_-]+`` so no quoting is ever needed):

* EET:       ``task_type,<machine names...>`` then one row per task type
             with durations in seconds or ``inf`` for unsupported pairs.
* Workload:  ``task_id,task_type,arrival_time,deadline``.
* Machines:  ``machine,idle_power_w,busy_power_w``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

from .model import (
    ConfigError,
    EetMatrix,
    MachineSpec,
    NAME_RE,
    Task,
    TaskType,
)
from .rng import SplitMix64
from .timefmt import (
    TICKS_PER_SECOND,
    format_seconds,
    format_watts,
    parse_seconds,
    parse_watts,
)

UNSUPPORTED_TOKEN = "inf"

EET_HEADER_FIRST = "task_type"
WORKLOAD_HEADER = ["task_id", "task_type", "arrival_time", "deadline"]
MACHINES_HEADER = ["machine", "idle_power_w", "busy_power_w"]


class ParseError(ValueError):
    """Malformed or incompatible scenario file; message carries the row."""

    def __init__(self, message: str, row: Optional[int] = None):
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)
        self.row = row


def _rows(text: str) -> list[tuple[int, list[str]]]:
    """Split CSV text into (1-based line number, cells), skipping blank lines."""
    out = []
    for lineno, line in enumerate(text.split("\n"), start=1):
        line = line.rstrip("\r")
        if not line.strip():
            continue
        out.append((lineno, [cell.strip() for cell in line.split(",")]))
    return out


def parse_eet_csv(text: str) -> EetMatrix:
    rows = _rows(text)
    if not rows:
        raise ParseError("empty EET file")
    header_row, header = rows[0]
    if not header or header[0] != EET_HEADER_FIRST:
        raise ParseError(
            f"EET header must start with {EET_HEADER_FIRST!r}", header_row
        )
    machine_names = header[1:]
    if not machine_names:
        raise ParseError("EET header lists no machines", header_row)
    task_types: list[TaskType] = []
    entries: list[list[Optional[int]]] = []
    for lineno, cells in rows[1:]:
        name = cells[0]
        if len(cells) - 1 != len(machine_names):
            raise ParseError(
                f"expected {len(machine_names)} entries, got {len(cells) - 1}",
                lineno,
            )
        if not NAME_RE.match(name):
            raise ParseError(f"invalid task type name: {name!r}", lineno)
        row: list[Optional[int]] = []
        for cell in cells[1:]:
            if cell == UNSUPPORTED_TOKEN:
                row.append(None)
                continue
            try:
                ticks = parse_seconds(cell)
            except ValueError as exc:
                raise ParseError(str(exc), lineno) from None
            if ticks <= 0:
                raise ParseError(f"duration must be positive: {cell!r}", lineno)
            row.append(ticks)
        task_types.append(TaskType(id=len(task_types), name=name))
        entries.append(row)
    try:
        return EetMatrix(task_types, machine_names, entries)
    except ConfigError as exc:
        raise ParseError(str(exc)) from None


def format_eet_csv(eet: EetMatrix) -> str:
    lines = [",".join([EET_HEADER_FIRST, *eet.machine_names])]
    for task_type, row in zip(eet.task_types, eet.entries):
        cells = [task_type.name]
        for entry in row:
            cells.append(UNSUPPORTED_TOKEN if entry is None else format_seconds(entry))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def parse_workload_csv(text: str, eet: EetMatrix) -> list[Task]:
    """Parse a workload trace and resolve task types against the EET.

    Output is sorted by (arrival, id). Unknown types, duplicate ids and
    deadlines before arrivals are rejected here so no malformed Task is
    ever constructed.
    """
    rows = _rows(text)
    if not rows:
        raise ParseError("empty workload file")
    header_row, header = rows[0]
    if header != WORKLOAD_HEADER:
        raise ParseError(
            f"workload header must be {','.join(WORKLOAD_HEADER)!r}", header_row
        )
    tasks: list[Task] = []
    seen_ids: set[int] = set()
    for lineno, cells in rows[1:]:
        if len(cells) != 4:
            raise ParseError(f"expected 4 entries, got {len(cells)}", lineno)
        id_cell, type_cell, arrival_cell, deadline_cell = cells
        try:
            task_id = int(id_cell)
        except ValueError:
            raise ParseError(f"malformed task id: {id_cell!r}", lineno) from None
        if task_id < 0:
            raise ParseError(f"negative task id: {task_id}", lineno)
        if task_id in seen_ids:
            raise ParseError(f"duplicate task id {task_id}", lineno)
        seen_ids.add(task_id)
        task_type = eet.type_by_name(type_cell)
        if task_type is None:
            raise ParseError(
                f"unknown task type {type_cell}, task id {task_id}", lineno
            )
        try:
            arrival = parse_seconds(arrival_cell)
            deadline = parse_seconds(deadline_cell)
        except ValueError as exc:
            raise ParseError(str(exc), lineno) from None
        if deadline < arrival:
            raise ParseError(
                f"deadline before arrival, task id {task_id}", lineno
            )
        tasks.append(
            Task(id=task_id, type_id=task_type.id, arrival=arrival, deadline=deadline)
        )
    tasks.sort(key=lambda t: (t.arrival, t.id))
    return tasks


def format_workload_csv(tasks: Sequence[Task], eet: EetMatrix) -> str:
    lines = [",".join(WORKLOAD_HEADER)]
    for task in sorted(tasks, key=lambda t: (t.arrival, t.id)):
        lines.append(
            ",".join(
                [
                    str(task.id),
                    eet.task_types[task.type_id].name,
                    format_seconds(task.arrival),
                    format_seconds(task.deadline),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def parse_machines_csv(text: str) -> list[MachineSpec]:
    rows = _rows(text)
    if not rows:
        raise ParseError("empty machines file")
    header_row, header = rows[0]
    if header != MACHINES_HEADER:
        raise ParseError(
            f"machines header must be {','.join(MACHINES_HEADER)!r}", header_row
        )
    specs: list[MachineSpec] = []
    for lineno, cells in rows[1:]:
        if len(cells) != 3:
            raise ParseError(f"expected 3 entries, got {len(cells)}", lineno)
        name, idle_cell, busy_cell = cells
        try:
            idle = parse_watts(idle_cell)
            busy = parse_watts(busy_cell)
            specs.append(
                MachineSpec(
                    index=len(specs), name=name, idle_power_w=idle, busy_power_w=busy
                )
            )
        except (ValueError, ConfigError) as exc:
            raise ParseError(str(exc), lineno) from None
    return specs


def format_machines_csv(specs: Sequence[MachineSpec]) -> str:
    lines = [",".join(MACHINES_HEADER)]
    for spec in specs:
        lines.append(
            ",".join(
                [spec.name, format_watts(spec.idle_power_w), format_watts(spec.busy_power_w)]
            )
        )
    return "\n".join(lines) + "\n"


# --- workload generation -------------------------------------------------


@dataclass(frozen=True)
class ConstantArrivals:
    """Fixed inter-arrival gap."""

    period_ticks: int

    def __post_init__(self):
        if self.period_ticks < 1:
            raise ConfigError("constant arrival period must be >= 1 tick")

    def draw_gap(self, rng: SplitMix64) -> int:
        return self.period_ticks


@dataclass(frozen=True)
class UniformArrivals:
    """Gap drawn uniformly from [lo, hi] seconds (inclusive endpoints)."""

    lo_ticks: int
    hi_ticks: int

    def __post_init__(self):
        if self.lo_ticks < 0 or self.lo_ticks > self.hi_ticks:
            raise ConfigError("uniform arrival bounds require 0 <= lo <= hi")
        if self.hi_ticks < 1:
            raise ConfigError("uniform arrival upper bound must be >= 1 tick")

    def draw_gap(self, rng: SplitMix64) -> int:
        span = self.hi_ticks - self.lo_ticks
        return self.lo_ticks + round(rng.random() * span)


@dataclass(frozen=True)
class ExponentialArrivals:
    """Poisson process: exponential gaps with the given rate per second."""

    rate_per_s: float

    def __post_init__(self):
        if not self.rate_per_s > 0:
            raise ConfigError("exponential arrival rate must be > 0")

    def draw_gap(self, rng: SplitMix64) -> int:
        gap_seconds = -math.log(1.0 - rng.random()) / self.rate_per_s
        return round(gap_seconds * TICKS_PER_SECOND)


ArrivalProcess = Union[ConstantArrivals, UniformArrivals, ExponentialArrivals]


@dataclass(frozen=True)
class TypeArrivalSpec:
    type_name: str
    process: ArrivalProcess


@dataclass(frozen=True)
class WorkloadGenSpec:
    """Per-type arrival processes plus the shared horizon and deadline rule.

    Deadlines are set to ``arrival + beta * mean finite EET`` of the task's
    type, so the slack scales with how expensive the type is to run.
    """

    entries: tuple[TypeArrivalSpec, ...]
    horizon_ticks: int
    beta: float = 1.5
    seed: int = 0

    def __post_init__(self):
        if self.horizon_ticks <= 0:
            raise ConfigError("generation horizon must be positive")
        if not self.beta > 0:
            raise ConfigError("deadline factor beta must be positive")
        if not self.entries:
            raise ConfigError("workload generation needs at least one task type")
        names = [e.type_name for e in self.entries]
        if len(set(names)) != len(names):
            raise ConfigError("duplicate task type in generation spec")


def generate_workload(spec: WorkloadGenSpec, eet: EetMatrix) -> list[Task]:
    """Draw one workload, fully determined by ``spec.seed``.

    Each type gets an independent SplitMix64 stream derived from the master
    seed; arrivals start at the first gap and stop once they pass the
    horizon. Ids are dense in (arrival, type) order.
    """
    resolved: list[tuple[TaskType, ArrivalProcess]] = []
    for entry in spec.entries:
        task_type = eet.type_by_name(entry.type_name)
        if task_type is None:
            raise ConfigError(
                f"generation spec names task type {entry.type_name!r} "
                "absent from the EET"
            )
        resolved.append((task_type, entry.process))
    resolved.sort(key=lambda pair: pair[0].id)

    master = SplitMix64(spec.seed)
    arrivals: list[tuple[int, int]] = []  # (arrival_ticks, type_id)
    for task_type, process in resolved:
        stream = SplitMix64(master.next_u64())
        now = 0
        while True:
            now += process.draw_gap(stream)
            if now > spec.horizon_ticks:
                break
            arrivals.append((now, task_type.id))

    deadline_offset = {
        task_type.id: round(Fraction(spec.beta) * eet.mean_finite_eet(task_type.id))
        for task_type, _ in resolved
    }
    arrivals.sort(key=lambda pair: (pair[0], pair[1]))
    return [
        Task(
            id=task_id,
            type_id=type_id,
            arrival=arrival,
            deadline=arrival + deadline_offset[type_id],
        )
        for task_id, (arrival, type_id) in enumerate(arrivals)
    ]
