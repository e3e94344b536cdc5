"""Discrete-event core: event queue, clock, task lifecycle, machine queues.

Events are totally ordered by (time, kind rank, entity id) with kind ranks
Completion=0, DeadlineCheck=1, Arrival=2, SchedulerWake=3. Ranking
completions before deadline checks makes finishing exactly at the deadline
count as on-time, and frees machine slots before the scheduler looks at
the system.

One run is fully determined by its inputs: no wall clock, no hidden RNG.
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass, replace
from enum import IntEnum
from typing import Iterator, Optional, Sequence

from .model import (
    ALLOWED_TRANSITIONS,
    ConfigError,
    EetMatrix,
    MachineSpec,
    SchedulingMode,
    SimConfig,
    Task,
    TaskStatus,
    TERMINAL_STATUSES,
    validate_scenario,
)
from .policies import (
    Assignment,
    BatchedTask,
    MachineSlot,
    MachinesView,
    Policy,
    get_policy,
)
from .timefmt import format_seconds


class EventKind(IntEnum):
    """Rank doubles as the same-tick ordering class."""

    COMPLETION = 0
    DEADLINE_CHECK = 1
    ARRIVAL = 2
    SCHEDULER_WAKE = 3


@dataclass(frozen=True)
class SimEvent:
    """Engine event; ``entity`` is a machine index for completions, a task
    id for arrivals/deadline checks, and 0 for scheduler wakes."""

    time: int
    kind: EventKind
    entity: int
    serial: int = 0  # completions only: guards against dropped executions


def event_order_key(event: SimEvent) -> tuple[int, int, int]:
    return (event.time, int(event.kind), event.entity)


@dataclass(frozen=True)
class StatusChange:
    task_id: int
    old: TaskStatus
    new: TaskStatus


@dataclass(frozen=True)
class AppliedAssignment:
    task_id: int
    machine_index: int
    predicted_completion: int


@dataclass(frozen=True)
class ExecutionStart:
    task_id: int
    machine_index: int
    will_finish: int


@dataclass(frozen=True)
class AppliedEvent:
    """One applied engine event and everything it changed."""

    seq: int
    time: int
    kind: EventKind
    entity: int
    changes: tuple[StatusChange, ...] = ()
    assignments: tuple[AppliedAssignment, ...] = ()
    starts: tuple[ExecutionStart, ...] = ()


def format_event_line(event: AppliedEvent) -> str:
    parts = [
        f"{event.seq}",
        f"t={format_seconds(event.time)}",
        event.kind.name.lower(),
        f"entity={event.entity}",
    ]
    if event.changes:
        parts.append(
            "changes="
            + ";".join(
                f"{c.task_id}:{c.old.value}->{c.new.value}" for c in event.changes
            )
        )
    if event.assignments:
        parts.append(
            "assign="
            + ";".join(
                f"{a.task_id}->m{a.machine_index}@{format_seconds(a.predicted_completion)}"
                for a in event.assignments
            )
        )
    if event.starts:
        parts.append(
            "start="
            + ";".join(
                f"{s.task_id}@m{s.machine_index}until{format_seconds(s.will_finish)}"
                for s in event.starts
            )
        )
    return " ".join(parts)


def format_event_log(events: Sequence[AppliedEvent]) -> str:
    return "\n".join(format_event_line(e) for e in events) + ("\n" if events else "")


class MachineRuntime:
    """A machine's live state: bounded waiting queue plus one execution slot."""

    __slots__ = (
        "spec",
        "waiting",
        "executing",
        "queued_eet",
        "busy_ticks",
        "idle_ticks",
        "completed_count",
        "missed_count",
        "serial",
    )

    def __init__(self, spec: MachineSpec):
        self.spec = spec
        self.waiting: deque[int] = deque()
        self.executing: Optional[tuple[int, int, int]] = None  # (task, start, finish)
        self.queued_eet = 0  # sum of EETs of waiting tasks, for ready_time
        self.busy_ticks = 0
        self.idle_ticks = 0
        self.completed_count = 0
        self.missed_count = 0
        self.serial = 0  # bumped per execution start; stale-completion guard


@dataclass(frozen=True)
class MachineSnapshot:
    index: int
    name: str
    waiting: tuple[int, ...]
    executing_task: Optional[int]
    executing_started: Optional[int]
    executing_will_finish: Optional[int]
    progress: Optional[float]
    busy_ticks: int
    idle_ticks: int


@dataclass(frozen=True)
class StateSnapshot:
    """Immutable view of a simulation for control surfaces and streams."""

    clock: int
    batch: tuple[int, ...]
    machines: tuple[MachineSnapshot, ...]
    completed: int
    canceled: int
    missed: int
    total_tasks: int
    pending: int
    finished: bool
    last_event: Optional[AppliedEvent]


@dataclass
class SimOutcome:
    """Finished-run record: the source of every report."""

    tasks: list[Task]
    eet: EetMatrix
    machine_specs: list[MachineSpec]
    config: SimConfig
    completed: int
    canceled: int
    missed: int
    makespan: int
    final_clock: int
    machine_busy_ticks: list[int]
    machine_completed: list[int]
    machine_missed: list[int]
    event_log: list[AppliedEvent]
    assignment_log: list[tuple[int, AppliedAssignment]]  # (time, assignment)

    @property
    def total_tasks(self) -> int:
        return len(self.tasks)

    def assignment_sequence(self) -> list[tuple[int, int, int, int]]:
        """(time, task, machine, predicted completion) in engine order."""
        return [
            (when, a.task_id, a.machine_index, a.predicted_completion)
            for when, a in self.assignment_log
        ]


class Simulation:
    """One simulation session; single-owner, advanced one event at a time."""

    def __init__(
        self,
        eet: EetMatrix,
        machines: Sequence[MachineSpec],
        workload: Sequence[Task],
        config: SimConfig,
    ):
        report = validate_scenario(eet, machines, workload)
        if not report.ok:
            raise ConfigError(f"invalid scenario: {report}", report=report)
        policy = get_policy(config.policy)
        if policy.mode is not config.mode:
            raise ConfigError(
                f"policy {policy.name!r} is {policy.mode.value}-mode, "
                f"config says {config.mode.value}"
            )
        self.eet = eet
        self.config = config
        self.policy: Policy = policy
        # Fresh copies: reruns over the same workload objects must not
        # observe bookkeeping from a previous run.
        self.tasks: dict[int, Task] = {
            t.id: replace(
                t,
                status=TaskStatus.PENDING,
                assigned_machine=None,
                assign_time=None,
                start=None,
                finish=None,
                predicted_completion=None,
                energy_j=0.0,
            )
            for t in workload
        }
        self.machines = [MachineRuntime(spec) for spec in machines]
        self.clock = 0
        self.batch: deque[int] = deque()
        self.completed = 0
        self.canceled = 0
        self.missed = 0
        self.event_log: list[AppliedEvent] = []
        self.assignment_log: list[tuple[int, AppliedAssignment]] = []  # (time, a)
        self._heap: list[tuple[tuple[int, int, int], int, SimEvent]] = []
        self._push_counter = 0
        self._wake_pending: set[int] = set()
        self._last_terminal = 0  # latest completion/cancel/miss moment
        for task in self.tasks.values():
            self._push(SimEvent(task.arrival, EventKind.ARRIVAL, task.id))
            self._push(SimEvent(task.deadline, EventKind.DEADLINE_CHECK, task.id))

    # -- event queue ------------------------------------------------------

    def _push(self, event: SimEvent) -> None:
        self._push_counter += 1
        heapq.heappush(self._heap, (event_order_key(event), self._push_counter, event))

    def _completion_stale(self, event: SimEvent) -> bool:
        machine = self.machines[event.entity]
        return machine.executing is None or machine.serial != event.serial

    def _peek(self) -> Optional[SimEvent]:
        while self._heap:
            event = self._heap[0][2]
            if event.kind is EventKind.COMPLETION and self._completion_stale(event):
                heapq.heappop(self._heap)
                continue
            return event
        return None

    @property
    def finished(self) -> bool:
        return self._peek() is None

    @property
    def pending_event_count(self) -> int:
        """Live events still queued (stale completions excluded)."""
        count = 0
        for _, _, event in self._heap:
            if event.kind is EventKind.COMPLETION and self._completion_stale(event):
                continue
            count += 1
        return count

    def next_event_time(self) -> Optional[int]:
        event = self._peek()
        return None if event is None else event.time

    # -- stepping -----------------------------------------------------------

    def step(self) -> AppliedEvent:
        """Pop and apply the minimum-key event; returns what it changed."""
        event = self._peek()
        if event is None:
            raise RuntimeError("step() called on a finished simulation")
        heapq.heappop(self._heap)
        self._advance_clock(event.time)

        self._changes: list[StatusChange] = []
        self._assignments: list[AppliedAssignment] = []
        self._starts: list[ExecutionStart] = []
        if event.kind is EventKind.ARRIVAL:
            self._apply_arrival(self.tasks[event.entity])
        elif event.kind is EventKind.COMPLETION:
            self._apply_completion(self.machines[event.entity])
        elif event.kind is EventKind.DEADLINE_CHECK:
            self._apply_deadline_check(self.tasks[event.entity])
        else:
            self._wake_pending.discard(self.clock)
            self._run_scheduler()
        applied = AppliedEvent(
            seq=len(self.event_log),
            time=event.time,
            kind=event.kind,
            entity=event.entity,
            changes=tuple(self._changes),
            assignments=tuple(self._assignments),
            starts=tuple(self._starts),
        )
        self.event_log.append(applied)
        return applied

    def run_to_completion(self) -> SimOutcome:
        while not self.finished:
            self.step()
        return self.outcome()

    def steps(self) -> Iterator[AppliedEvent]:
        while not self.finished:
            yield self.step()

    def outcome(self) -> SimOutcome:
        if not self.finished:
            raise RuntimeError("outcome() requires a finished simulation")
        tasks = sorted(self.tasks.values(), key=lambda t: t.id)
        for task in tasks:
            if task.status not in TERMINAL_STATUSES:
                raise RuntimeError(
                    f"task {task.id} finished run in non-terminal "
                    f"status {task.status.value}"
                )
        return SimOutcome(
            tasks=[replace(t) for t in tasks],
            eet=self.eet,
            machine_specs=[m.spec for m in self.machines],
            config=self.config,
            completed=self.completed,
            canceled=self.canceled,
            missed=self.missed,
            makespan=self._last_terminal,
            final_clock=self.clock,
            machine_busy_ticks=[m.busy_ticks for m in self.machines],
            machine_completed=[m.completed_count for m in self.machines],
            machine_missed=[m.missed_count for m in self.machines],
            event_log=list(self.event_log),
            assignment_log=list(self.assignment_log),
        )

    # -- clock & accounting -------------------------------------------------

    def _advance_clock(self, to: int) -> None:
        delta = to - self.clock
        if delta < 0:
            raise RuntimeError("event queue yielded a past event")
        if delta:
            for machine in self.machines:
                if machine.executing is not None:
                    machine.busy_ticks += delta
                else:
                    machine.idle_ticks += delta
            self.clock = to

    # -- transitions ----------------------------------------------------------

    def _transition(self, task: Task, new: TaskStatus) -> None:
        if (task.status, new) not in ALLOWED_TRANSITIONS:
            raise RuntimeError(
                f"illegal status transition {task.status.value} -> {new.value} "
                f"for task {task.id}"
            )
        self._changes.append(StatusChange(task.id, task.status, new))
        task.status = new
        if new in TERMINAL_STATUSES and self.clock > self._last_terminal:
            self._last_terminal = self.clock

    def _apply_arrival(self, task: Task) -> None:
        self._transition(task, TaskStatus.BATCHED)
        if task.deadline <= self.clock:
            # Deadline equals arrival: its DeadlineCheck already ran (same
            # tick, earlier rank) while the task was still Pending, so the
            # cancel happens here, passing through Batched.
            self._transition(task, TaskStatus.CANCELED)
            self.canceled += 1
            return
        self.batch.append(task.id)
        self._schedule_wake()

    def _apply_completion(self, machine: MachineRuntime) -> None:
        assert machine.executing is not None
        task_id, started, will_finish = machine.executing
        assert will_finish == self.clock
        task = self.tasks[task_id]
        self._transition(task, TaskStatus.COMPLETED)
        task.finish = self.clock
        task.energy_j = machine.spec.busy_power_w * (self.clock - started) / 1e6
        self.completed += 1
        machine.completed_count += 1
        machine.executing = None
        self._start_next(machine)
        if self.batch:
            self._schedule_wake()

    def _apply_deadline_check(self, task: Task) -> None:
        if task.status in TERMINAL_STATUSES or task.status is TaskStatus.PENDING:
            return  # no-op: already resolved, or handled at arrival
        if task.status is TaskStatus.BATCHED:
            self.batch.remove(task.id)
            self._transition(task, TaskStatus.CANCELED)
            self.canceled += 1
            return
        machine = self.machines[task.assigned_machine]
        if task.status is TaskStatus.QUEUED:
            machine.waiting.remove(task.id)
            machine.queued_eet -= self.eet.lookup(task.type_id, machine.spec.index)
            self._transition(task, TaskStatus.MISSED)
        else:  # EXECUTING: interrupted at exactly the deadline tick
            assert machine.executing is not None and machine.executing[0] == task.id
            started = machine.executing[1]
            task.energy_j = machine.spec.busy_power_w * (self.clock - started) / 1e6
            machine.executing = None
            self._transition(task, TaskStatus.MISSED)
            self._start_next(machine)
        self.missed += 1
        machine.missed_count += 1
        if self.batch:
            self._schedule_wake()

    def _start_next(self, machine: MachineRuntime) -> None:
        if machine.executing is not None or not machine.waiting:
            return
        task_id = machine.waiting.popleft()
        task = self.tasks[task_id]
        eet = self.eet.lookup(task.type_id, machine.spec.index)
        machine.queued_eet -= eet
        self._transition(task, TaskStatus.EXECUTING)
        task.start = self.clock
        will_finish = self.clock + eet
        machine.serial += 1
        machine.executing = (task_id, self.clock, will_finish)
        self._push(
            SimEvent(
                will_finish, EventKind.COMPLETION, machine.spec.index, machine.serial
            )
        )
        self._starts.append(ExecutionStart(task_id, machine.spec.index, will_finish))

    def _schedule_wake(self) -> None:
        # Coalesce: at most one pending wake per timestamp.
        if self.clock in self._wake_pending:
            return
        self._wake_pending.add(self.clock)
        self._push(SimEvent(self.clock, EventKind.SCHEDULER_WAKE, 0))

    # -- scheduling --------------------------------------------------------

    def machines_view(self) -> MachinesView:
        slots = []
        for machine in self.machines:
            if machine.executing is not None:
                ready = machine.executing[2] + machine.queued_eet
                count = len(machine.waiting) + 1
            else:
                ready = self.clock + machine.queued_eet
                count = len(machine.waiting)
            capacity = self.config.queue_capacity
            free = None if capacity is None else capacity - len(machine.waiting)
            slots.append(
                MachineSlot(
                    index=machine.spec.index,
                    name=machine.spec.name,
                    task_count=count,
                    free_slots=free,
                    ready_time=ready,
                )
            )
        return MachinesView(clock=self.clock, eet=self.eet, machines=tuple(slots))

    def batch_view(self) -> tuple[BatchedTask, ...]:
        return tuple(
            BatchedTask(
                id=t.id, type_id=t.type_id, arrival=t.arrival, deadline=t.deadline
            )
            for t in (self.tasks[tid] for tid in self.batch)
        )

    def _run_scheduler(self) -> None:
        while self.batch:
            assignment = self.policy.select(self.batch_view(), self.machines_view())
            if assignment is None:
                return
            self._apply_assignment(assignment)

    def _apply_assignment(self, assignment: Assignment) -> None:
        task = self.tasks.get(assignment.task_id)
        if task is None or task.status is not TaskStatus.BATCHED:
            raise ConfigError(
                f"policy {self.policy.name!r} selected a non-batched task "
                f"{assignment.task_id}"
            )
        machine = self.machines[assignment.machine_index]
        eet = self.eet.lookup(task.type_id, machine.spec.index)
        if eet is None:
            raise ConfigError(
                f"policy {self.policy.name!r} mapped task {task.id} to "
                f"unsupported machine {machine.spec.name}"
            )
        capacity = self.config.queue_capacity
        if capacity is not None and len(machine.waiting) >= capacity:
            raise ConfigError(
                f"policy {self.policy.name!r} mapped task {task.id} to "
                f"slot-full machine {machine.spec.name}"
            )
        self.batch.remove(task.id)
        self._transition(task, TaskStatus.QUEUED)
        task.assigned_machine = machine.spec.index
        task.assign_time = self.clock
        task.predicted_completion = assignment.predicted_completion
        applied = AppliedAssignment(
            task_id=task.id,
            machine_index=machine.spec.index,
            predicted_completion=assignment.predicted_completion,
        )
        self._assignments.append(applied)
        self.assignment_log.append((self.clock, applied))
        machine.waiting.append(task.id)
        machine.queued_eet += eet
        self._start_next(machine)

    # -- snapshots -----------------------------------------------------------

    def snapshot(self) -> StateSnapshot:
        machines = []
        for machine in self.machines:
            if machine.executing is not None:
                task_id, started, will_finish = machine.executing
                duration = will_finish - started
                progress = (self.clock - started) / duration if duration else 1.0
                machines.append(
                    MachineSnapshot(
                        index=machine.spec.index,
                        name=machine.spec.name,
                        waiting=tuple(machine.waiting),
                        executing_task=task_id,
                        executing_started=started,
                        executing_will_finish=will_finish,
                        progress=progress,
                        busy_ticks=machine.busy_ticks,
                        idle_ticks=machine.idle_ticks,
                    )
                )
            else:
                machines.append(
                    MachineSnapshot(
                        index=machine.spec.index,
                        name=machine.spec.name,
                        waiting=tuple(machine.waiting),
                        executing_task=None,
                        executing_started=None,
                        executing_will_finish=None,
                        progress=None,
                        busy_ticks=machine.busy_ticks,
                        idle_ticks=machine.idle_ticks,
                    )
                )
        pending = sum(
            1 for t in self.tasks.values() if t.status is TaskStatus.PENDING
        )
        return StateSnapshot(
            clock=self.clock,
            batch=tuple(self.batch),
            machines=tuple(machines),
            completed=self.completed,
            canceled=self.canceled,
            missed=self.missed,
            total_tasks=len(self.tasks),
            pending=pending,
            finished=self.finished,
            last_event=self.event_log[-1] if self.event_log else None,
        )


def init_simulation(
    eet: EetMatrix,
    machines: Sequence[MachineSpec],
    workload: Sequence[Task],
    config: SimConfig,
) -> Simulation:
    return Simulation(eet, machines, workload, config)


def run_scenario(
    eet: EetMatrix,
    machines: Sequence[MachineSpec],
    workload: Sequence[Task],
    config: SimConfig,
) -> SimOutcome:
    return Simulation(eet, machines, workload, config).run_to_completion()
