"""Shared test utilities: scenario builders, independent oracles, replay checks.

The checkers here deliberately re-derive everything from the event log or
from first principles (explicit enumeration, tick-by-tick integration)
rather than reusing engine internals, so they can act as oracles.
"""

from __future__ import annotations

import math
import random
from collections import defaultdict
from typing import Optional, Sequence

from hetsim import (
    Assignment,
    EetMatrix,
    MachineSpec,
    SchedulingMode,
    SimConfig,
    SimOutcome,
    Task,
    TaskStatus,
    TaskType,
    get_policy,
)
from hetsim.engine import EventKind
from hetsim.model import ALLOWED_TRANSITIONS
from hetsim.policies import ALL_BUILTIN_POLICIES

TICK = 1_000_000  # ticks per second


def s(seconds: float) -> int:
    """Seconds to ticks (tests only use values that are exact)."""
    return round(seconds * TICK)


def mk_eet(
    entries: Sequence[Sequence[Optional[int]]],
    type_names: Optional[Sequence[str]] = None,
    machine_names: Optional[Sequence[str]] = None,
) -> EetMatrix:
    """Build an EET from raw tick entries (None = unsupported)."""
    n_types = len(entries)
    n_machines = len(entries[0])
    type_names = type_names or [f"T{i + 1}" for i in range(n_types)]
    machine_names = machine_names or [f"M{i}" for i in range(n_machines)]
    types = [TaskType(id=i, name=name) for i, name in enumerate(type_names)]
    return EetMatrix(types, machine_names, entries)


def mk_machines(powers: Sequence[tuple[float, float]]) -> list[MachineSpec]:
    return [
        MachineSpec(index=i, name=f"M{i}", idle_power_w=idle, busy_power_w=busy)
        for i, (idle, busy) in enumerate(powers)
    ]


def default_machines(count: int) -> list[MachineSpec]:
    return mk_machines([(10.0, 50.0)] * count)


def mk_task(task_id: int, type_id: int, arrival: int, deadline: int) -> Task:
    return Task(id=task_id, type_id=type_id, arrival=arrival, deadline=deadline)


def config_for(policy: str, capacity: Optional[int] = None, seed: int = 0) -> SimConfig:
    mode = get_policy(policy).mode
    return SimConfig(policy=policy, mode=mode, queue_capacity=capacity, seed=seed)


# --- randomized scenarios -------------------------------------------------


def random_scenario(
    rng: random.Random,
    min_tasks: int = 10,
    max_tasks: int = 500,
    policy: Optional[str] = None,
    max_machines: int = 8,
):
    """One random but valid scenario: (eet, machines, workload, config)."""
    n_machines = rng.randint(2, max_machines)
    n_types = rng.randint(1, 5)
    entries: list[list[Optional[int]]] = []
    for _ in range(n_types):
        row: list[Optional[int]] = [
            None if rng.random() < 0.15 else rng.randint(1_000, 50_000)
            for _ in range(n_machines)
        ]
        if all(e is None for e in row):
            row[rng.randrange(n_machines)] = rng.randint(1_000, 50_000)
        entries.append(row)
    eet = mk_eet(entries)
    machines = mk_machines(
        [
            (round(rng.uniform(0, 20), 3), round(rng.uniform(20, 100), 3))
            for _ in range(n_machines)
        ]
    )
    # Log-uniform sizes: full 10..500 range reachable, small runs common.
    n_tasks = int(
        round(math.exp(rng.uniform(math.log(min_tasks), math.log(max_tasks))))
    )
    n_tasks = max(min_tasks, min(max_tasks, n_tasks))
    workload = []
    for task_id in range(n_tasks):
        type_id = rng.randrange(n_types)
        arrival = rng.randint(0, 300_000)
        roll = rng.random()
        if roll < 0.05:
            slack = 0  # deadline == arrival: instant cancel path
        elif roll < 0.55:
            slack = rng.randint(1, 30_000)
        else:
            slack = rng.randint(30_000, 300_000)
        workload.append(mk_task(task_id, type_id, arrival, arrival + slack))
    policy_name = policy or rng.choice(ALL_BUILTIN_POLICIES)
    mode = get_policy(policy_name).mode
    if mode is SchedulingMode.IMMEDIATE:
        capacity = None
    else:
        capacity = rng.choice([None, 1, 2, 3, 5])
    config = SimConfig(
        policy=policy_name, mode=mode, queue_capacity=capacity, seed=rng.getrandbits(32)
    )
    return eet, machines, workload, config


def scale_scenario(eet: EetMatrix, workload: Sequence[Task], k: int):
    """Multiply every duration, arrival and deadline by integer k."""
    scaled_eet = mk_eet(
        [[None if e is None else e * k for e in row] for row in eet.entries],
        type_names=[t.name for t in eet.task_types],
        machine_names=list(eet.machine_names),
    )
    scaled_workload = [
        mk_task(t.id, t.type_id, t.arrival * k, t.deadline * k) for t in workload
    ]
    return scaled_eet, scaled_workload


# --- event-log replay checker ----------------------------------------------


def execution_intervals(outcome: SimOutcome) -> dict[int, list[tuple[int, int, int]]]:
    """Per machine: (task_id, start, end) intervals rebuilt from the log.

    Status changes inside one applied event are causally ordered (a drop
    clears the slot before the next waiting task starts), so they are
    walked in order; the event's ``starts`` records supply the machine."""
    open_exec: dict[int, tuple[int, int]] = {}  # machine -> (task, start)
    task_machine: dict[int, int] = {}
    intervals: dict[int, list[tuple[int, int, int]]] = defaultdict(list)
    for event in outcome.event_log:
        started_here = {start.task_id: start for start in event.starts}
        for change in event.changes:
            if change.new is TaskStatus.EXECUTING:
                start = started_here[change.task_id]
                machine = start.machine_index
                assert machine not in open_exec, (
                    f"machine {machine} started task {change.task_id} "
                    "while already executing"
                )
                open_exec[machine] = (change.task_id, event.time)
                task_machine[change.task_id] = machine
                continue
            ended = change.new is TaskStatus.COMPLETED or (
                change.old is TaskStatus.EXECUTING
                and change.new is TaskStatus.MISSED
            )
            if ended:
                machine = task_machine[change.task_id]
                task_id, started = open_exec.pop(machine)
                assert task_id == change.task_id
                intervals[machine].append((task_id, started, event.time))
    assert not open_exec, f"executions still open at end of log: {open_exec}"
    return intervals


def replay_and_check(
    eet: EetMatrix,
    machines: Sequence[MachineSpec],
    workload: Sequence[Task],
    config: SimConfig,
    outcome: SimOutcome,
) -> None:
    """Re-derive the whole run from the event log and assert every invariant:
    legal transitions, conservation, queue capacity, non-overlap, exact work
    realization, and clock monotonicity."""
    status = {t.id: TaskStatus.PENDING for t in workload}
    types = {t.id: t.type_id for t in workload}
    batch: list[int] = []
    waiting: dict[int, list[int]] = {m.index: [] for m in machines}
    executing: dict[int, Optional[int]] = {m.index: None for m in machines}
    task_machine: dict[int, int] = {}
    capacity = config.queue_capacity
    last_time = 0
    total = len(workload)
    counts = defaultdict(int)
    counts[TaskStatus.PENDING] = total

    for event in outcome.event_log:
        assert event.time >= last_time, "applied event times must be non-decreasing"
        last_time = event.time

        for assignment in event.assignments:
            tid, m = assignment.task_id, assignment.machine_index
            assert eet.lookup(types[tid], m) is not None, (
                f"task {tid} assigned to unsupported machine {m}"
            )
            task_machine[tid] = m
        for change in event.changes:
            tid = change.task_id
            assert status[tid] is change.old, (
                f"event {event.seq}: task {tid} was {status[tid]}, "
                f"log says {change.old}"
            )
            assert (change.old, change.new) in ALLOWED_TRANSITIONS, (
                f"illegal transition {change.old} -> {change.new}"
            )
            status[tid] = change.new
            counts[change.old] -= 1
            counts[change.new] += 1
            if change.new is TaskStatus.BATCHED:
                batch.append(tid)
            elif change.new is TaskStatus.CANCELED:
                batch.remove(tid)
            elif change.new is TaskStatus.QUEUED:
                batch.remove(tid)
                waiting[task_machine[tid]].append(tid)
            elif change.new is TaskStatus.EXECUTING:
                m = task_machine[tid]
                assert executing[m] is None, f"machine {m} double-booked"
                waiting[m].remove(tid)
                executing[m] = tid
            elif change.new is TaskStatus.COMPLETED:
                m = task_machine[tid]
                assert executing[m] == tid
                executing[m] = None
            elif change.new is TaskStatus.MISSED:
                m = task_machine[tid]
                if executing[m] == tid:
                    executing[m] = None
                else:
                    waiting[m].remove(tid)

        if capacity is not None:
            for m, queue_tasks in waiting.items():
                assert len(queue_tasks) <= capacity, (
                    f"machine {m} queue {len(queue_tasks)} > capacity {capacity}"
                )
        # Conservation at every step: the status counts always partition
        # the workload.
        assert sum(counts.values()) == total and min(counts.values()) >= 0, (
            "conservation broken mid-run"
        )

    # End state: every task terminal, queues empty, counters match.
    for tid, st in status.items():
        assert st in (
            TaskStatus.COMPLETED,
            TaskStatus.CANCELED,
            TaskStatus.MISSED,
        ), f"task {tid} ended in {st}"
    assert not batch and not any(waiting.values())
    assert all(v is None for v in executing.values())
    final = {t.id: t.status for t in outcome.tasks}
    assert final == status, "outcome statuses disagree with log replay"
    assert counts[TaskStatus.COMPLETED] == outcome.completed
    assert counts[TaskStatus.CANCELED] == outcome.canceled
    assert counts[TaskStatus.MISSED] == outcome.missed
    assert outcome.completed + outcome.canceled + outcome.missed == total

    # Executed intervals: disjoint per machine, exact durations for completed.
    by_task = {t.id: t for t in outcome.tasks}
    intervals = execution_intervals(outcome)
    busy_from_log = {m.index: 0 for m in machines}
    for machine_index, spans in intervals.items():
        spans.sort(key=lambda span: span[1])
        prev_end = None
        for task_id, started, ended in spans:
            assert ended >= started
            if prev_end is not None:
                assert started >= prev_end, (
                    f"machine {machine_index}: overlapping executions"
                )
            prev_end = ended
            busy_from_log[machine_index] += ended - started
            task = by_task[task_id]
            if task.status is TaskStatus.COMPLETED:
                duration = eet.lookup(task.type_id, machine_index)
                assert ended - started == duration, (
                    f"completed task {task_id} ran {ended - started}, EET {duration}"
                )
                assert ended <= task.deadline
    for machine_index, busy in busy_from_log.items():
        assert busy == outcome.machine_busy_ticks[machine_index]
        assert busy <= outcome.makespan


# --- brute-force policy oracles ---------------------------------------------
#
# Each oracle enumerates every (task, machine) choice per invocation with
# explicit loops and applies the policy's published rule directly. They are
# kept free of the production selection helpers on purpose.


def _oracle_pairs(batch, view):
    """All feasible (task, machine, ect) triples right now."""
    pairs = []
    for task in batch:
        for slot in view.machines:
            duration = view.eet.lookup(task.type_id, slot.index)
            if duration is None:
                continue
            if slot.free_slots is not None and slot.free_slots <= 0:
                continue
            pairs.append((task, slot, slot.ready_time + duration))
    return pairs


def _mk_assignment(task, slot, ect) -> Assignment:
    return Assignment(
        task_id=task.id, machine_index=slot.index, predicted_completion=ect
    )


def oracle_fcfs(batch, view):
    if not batch:
        return None
    head = batch[0]
    options = [
        (slot.task_count, slot.index, slot, view.eet.lookup(head.type_id, slot.index))
        for slot in view.machines
        if view.eet.lookup(head.type_id, slot.index) is not None
        and (slot.free_slots is None or slot.free_slots > 0)
    ]
    if not options:
        return None
    count, index, slot, duration = min(options, key=lambda o: (o[0], o[1]))
    return _mk_assignment(head, slot, slot.ready_time + duration)


def oracle_mect(batch, view):
    if not batch:
        return None
    head = batch[0]
    pairs = [(t, m, e) for t, m, e in _oracle_pairs([head], view)]
    if not pairs:
        return None
    task, slot, ect = min(pairs, key=lambda p: (p[2], p[1].index))
    return _mk_assignment(task, slot, ect)


def oracle_meet(batch, view):
    if not batch:
        return None
    head = batch[0]
    options = [
        (view.eet.lookup(head.type_id, slot.index), slot.index, slot)
        for slot in view.machines
        if view.eet.lookup(head.type_id, slot.index) is not None
        and (slot.free_slots is None or slot.free_slots > 0)
    ]
    if not options:
        return None
    duration, _, slot = min(options, key=lambda o: (o[0], o[1]))
    return _mk_assignment(head, slot, slot.ready_time + duration)


def oracle_mm(batch, view):
    pairs = _oracle_pairs(batch, view)
    if not pairs:
        return None
    task, slot, ect = min(pairs, key=lambda p: (p[2], p[1].index, p[0].id))
    return _mk_assignment(task, slot, ect)


def _oracle_best_machine(task, view):
    best = None
    for slot in view.machines:
        duration = view.eet.lookup(task.type_id, slot.index)
        if duration is None:
            continue
        if slot.free_slots is not None and slot.free_slots <= 0:
            continue
        ect = slot.ready_time + duration
        if best is None or (ect, slot.index) < (best[0], best[1].index):
            best = (ect, slot)
    return best


def oracle_msd(batch, view):
    candidates = []
    for task in batch:
        best = _oracle_best_machine(task, view)
        if best is None:
            continue
        candidates.append(((task.deadline, task.arrival, task.id), task, best))
    if not candidates:
        return None
    _, task, (ect, slot) = min(candidates, key=lambda c: c[0])
    return _mk_assignment(task, slot, ect)


def oracle_mmu(batch, view):
    candidates = []
    for task in batch:
        best = _oracle_best_machine(task, view)
        if best is None:
            continue
        ect, slot = best
        slack = task.deadline - ect
        candidates.append(((slack, task.deadline, task.id), task, (ect, slot)))
    if not candidates:
        return None
    _, task, (ect, slot) = min(candidates, key=lambda c: c[0])
    return _mk_assignment(task, slot, ect)


ORACLE_SELECTS = {
    "fcfs": oracle_fcfs,
    "mect": oracle_mect,
    "meet": oracle_meet,
    "mm": oracle_mm,
    "msd": oracle_msd,
    "mmu": oracle_mmu,
}


# --- tick-granular energy oracle ---------------------------------------------


def tick_replay_energy(outcome: SimOutcome) -> float:
    """Total joules by integrating instantaneous power tick by tick."""
    import numpy as np

    makespan = outcome.makespan
    total = 0.0
    intervals = execution_intervals(outcome)
    for spec in outcome.machine_specs:
        busy_mask = np.zeros(makespan, dtype=bool)
        for _, started, ended in intervals.get(spec.index, []):
            busy_mask[started:ended] = True
        busy_ticks = int(busy_mask.sum())
        idle_ticks = makespan - busy_ticks
        total += (
            spec.busy_power_w * busy_ticks / TICK + spec.idle_power_w * idle_ticks / TICK
        )
    return total
