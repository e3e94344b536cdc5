"""Scheduling policies: the task->machine mapping rules and their registry.

Every policy is a pure function ``select(batch, view) -> Assignment | None``
returning at most one mapping per call; the engine re-invokes it until it
returns None ("cannot map now"). Immediate-mode policies only ever consider
the head of the batch; batch-mode policies may pick any batched task.

Tie-breaks are fixed so runs are byte-reproducible: machines by ascending
index, tasks by ascending id, unless a policy's own rule says otherwise
(soonest-deadline and smallest-slack break ties on their sort keys first).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

from .model import ConfigError, EetMatrix, SchedulingMode


@dataclass(frozen=True)
class MachineSlot:
    """Read-only per-machine projection handed to policies."""

    index: int
    name: str
    task_count: int  # waiting + executing
    free_slots: Optional[int]  # None = unbounded
    ready_time: int  # ticks; earliest moment a new task could start


@dataclass(frozen=True)
class MachinesView:
    clock: int
    eet: EetMatrix
    machines: tuple[MachineSlot, ...]

    def supports(self, type_id: int, machine_index: int) -> bool:
        return self.eet.supports(type_id, machine_index)


@dataclass(frozen=True)
class BatchedTask:
    id: int
    type_id: int
    arrival: int
    deadline: int


@dataclass(frozen=True)
class Assignment:
    task_id: int
    machine_index: int
    predicted_completion: int  # ready_time + EET at selection time


SelectFn = Callable[[Sequence[BatchedTask], MachinesView], Optional[Assignment]]


def expected_completion_time(
    view: MachinesView, task: BatchedTask
) -> list[Optional[int]]:
    """Per-machine ready_time + EET; None where the type is unsupported."""
    out: list[Optional[int]] = []
    for slot in view.machines:
        eet = view.eet.lookup(task.type_id, slot.index)
        out.append(None if eet is None else slot.ready_time + eet)
    return out


def _open_machines(view: MachinesView, type_id: int) -> list[MachineSlot]:
    """Machines that support the type and still have a free waiting slot."""
    return [
        slot
        for slot in view.machines
        if view.eet.supports(type_id, slot.index)
        and (slot.free_slots is None or slot.free_slots > 0)
    ]


def _assign(view: MachinesView, task: BatchedTask, slot: MachineSlot) -> Assignment:
    eet = view.eet.lookup(task.type_id, slot.index)
    assert eet is not None
    return Assignment(
        task_id=task.id,
        machine_index=slot.index,
        predicted_completion=slot.ready_time + eet,
    )


def fcfs_select(
    batch: Sequence[BatchedTask], view: MachinesView
) -> Optional[Assignment]:
    """First come, first served: the head task joins the least-loaded
    supporting machine. The head is never skipped, so a full supporting
    machine blocks the whole batch."""
    if not batch:
        return None
    head = batch[0]
    candidates = _open_machines(view, head.type_id)
    if not candidates:
        return None
    slot = min(candidates, key=lambda m: (m.task_count, m.index))
    return _assign(view, head, slot)


def mect_select(
    batch: Sequence[BatchedTask], view: MachinesView
) -> Optional[Assignment]:
    """Head task to the machine with minimum expected completion time."""
    if not batch:
        return None
    head = batch[0]
    candidates = _open_machines(view, head.type_id)
    if not candidates:
        return None
    slot = min(
        candidates,
        key=lambda m: (m.ready_time + view.eet.lookup(head.type_id, m.index), m.index),
    )
    return _assign(view, head, slot)


def meet_select(
    batch: Sequence[BatchedTask], view: MachinesView
) -> Optional[Assignment]:
    """Head task to the machine with minimum raw EET, ignoring load."""
    if not batch:
        return None
    head = batch[0]
    candidates = _open_machines(view, head.type_id)
    if not candidates:
        return None
    slot = min(candidates, key=lambda m: (view.eet.lookup(head.type_id, m.index), m.index))
    return _assign(view, head, slot)


def min_min_select(
    batch: Sequence[BatchedTask], view: MachinesView
) -> Optional[Assignment]:
    """Globally minimal (task, machine) expected completion over the batch."""
    best: Optional[tuple[tuple[int, int, int], BatchedTask, MachineSlot]] = None
    for task in batch:
        for slot in _open_machines(view, task.type_id):
            ect = slot.ready_time + view.eet.lookup(task.type_id, slot.index)
            key = (ect, slot.index, task.id)
            if best is None or key < best[0]:
                best = (key, task, slot)
    if best is None:
        return None
    return _assign(view, best[1], best[2])


def _min_ect_machine(
    view: MachinesView, task: BatchedTask
) -> Optional[tuple[int, MachineSlot]]:
    candidates = _open_machines(view, task.type_id)
    if not candidates:
        return None
    slot = min(
        candidates,
        key=lambda m: (m.ready_time + view.eet.lookup(task.type_id, m.index), m.index),
    )
    return slot.ready_time + view.eet.lookup(task.type_id, slot.index), slot


def msd_select(
    batch: Sequence[BatchedTask], view: MachinesView
) -> Optional[Assignment]:
    """Soonest-deadline batched task to its min-completion machine.

    Only tasks that can be mapped right now compete; if every supporting
    machine of the soonest-deadline task is full, the next mappable task
    is considered instead of idling an open machine.
    """
    best: Optional[tuple[tuple[int, int, int], BatchedTask, MachineSlot]] = None
    for task in batch:
        found = _min_ect_machine(view, task)
        if found is None:
            continue
        _, slot = found
        key = (task.deadline, task.arrival, task.id)
        if best is None or key < best[0]:
            best = (key, task, slot)
    if best is None:
        return None
    return _assign(view, best[1], best[2])


def mmu_select(
    batch: Sequence[BatchedTask], view: MachinesView
) -> Optional[Assignment]:
    """Most-urgent batched task (smallest slack = deadline - min ECT) to its
    min-completion machine. Negative slack is still selectable."""
    best: Optional[tuple[tuple[int, int, int], BatchedTask, MachineSlot]] = None
    for task in batch:
        found = _min_ect_machine(view, task)
        if found is None:
            continue
        ect, slot = found
        slack = task.deadline - ect
        key = (slack, task.deadline, task.id)
        if best is None or key < best[0]:
            best = (key, task, slot)
    if best is None:
        return None
    return _assign(view, best[1], best[2])


@dataclass(frozen=True)
class Policy:
    name: str
    mode: SchedulingMode
    select: SelectFn


_REGISTRY: dict[str, Policy] = {}


def register_policy(name: str, select: SelectFn, mode: SchedulingMode) -> str:
    """Make a policy selectable by CLI flag and service config.

    Names are case-insensitive; registering an existing name is an error.
    Returns the canonical (lowercase) policy id.
    """
    key = name.lower()
    if not key:
        raise ConfigError("policy name must be non-empty")
    if key in _REGISTRY:
        raise ConfigError(f"policy {name!r} already registered")
    _REGISTRY[key] = Policy(name=key, mode=mode, select=select)
    return key


def unregister_policy(name: str) -> None:
    key = name.lower()
    if key in _BUILTIN_NAMES:
        raise ConfigError(f"cannot unregister built-in policy {name!r}")
    _REGISTRY.pop(key, None)


def get_policy(name: str) -> Policy:
    policy = _REGISTRY.get(name.lower())
    if policy is None:
        known = ", ".join(sorted(_REGISTRY))
        raise ConfigError(f"unknown policy {name!r} (known: {known})")
    return policy


def list_policies() -> list[Policy]:
    return list(_REGISTRY.values())


for _name, _select, _mode in (
    ("fcfs", fcfs_select, SchedulingMode.IMMEDIATE),
    ("mect", mect_select, SchedulingMode.IMMEDIATE),
    ("meet", meet_select, SchedulingMode.IMMEDIATE),
    ("mm", min_min_select, SchedulingMode.BATCH),
    ("mmu", mmu_select, SchedulingMode.BATCH),
    ("msd", msd_select, SchedulingMode.BATCH),
):
    register_policy(_name, _select, _mode)

_BUILTIN_NAMES = frozenset(_REGISTRY)

IMMEDIATE_POLICIES = ("fcfs", "mect", "meet")
BATCH_POLICIES = ("mm", "mmu", "msd")
ALL_BUILTIN_POLICIES = IMMEDIATE_POLICIES + BATCH_POLICIES
