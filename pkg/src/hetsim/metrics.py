"""Per-machine and system-level statistics, including the energy model.

Energy uses a two-state linear model: a machine draws its busy wattage
while executing and its idle wattage otherwise, including while tasks sit
in its waiting queue. Machine accounting is clipped to the makespan (the
moment the last task resolved); after that point every machine is idle
forever, so nothing meaningful is lost.
"""

from __future__ import annotations

from dataclasses import dataclass

from .engine import SimOutcome
from .model import MachineSpec, TaskStatus


@dataclass(frozen=True)
class MachineStats:
    index: int
    name: str
    completed: int
    missed_dropped: int
    busy_ticks: int
    idle_ticks: int
    utilization: float
    energy_j: float


@dataclass(frozen=True)
class SummaryStats:
    total_tasks: int
    completed: int
    canceled: int
    missed: int
    completion_pct: float
    total_energy_j: float
    makespan_ticks: int
    mean_wait_ticks: float  # assign - arrival over assigned tasks
    mean_response_ticks: float  # finish - arrival over completed tasks


def machine_energy(busy_ticks: int, idle_ticks: int, spec: MachineSpec) -> float:
    """Joules drawn over the given busy/idle split."""
    if busy_ticks < 0 or idle_ticks < 0:
        raise ValueError("tick counts must be non-negative")
    return (
        spec.busy_power_w * busy_ticks / 1e6 + spec.idle_power_w * idle_ticks / 1e6
    )


def summarize(outcome: SimOutcome) -> tuple[SummaryStats, list[MachineStats]]:
    """Fold a finished run into summary and per-machine statistics."""
    makespan = outcome.makespan
    machines: list[MachineStats] = []
    total_energy = 0.0
    for spec, busy, done, dropped in zip(
        outcome.machine_specs,
        outcome.machine_busy_ticks,
        outcome.machine_completed,
        outcome.machine_missed,
    ):
        idle = makespan - busy
        energy = machine_energy(busy, idle, spec)
        total_energy += energy
        machines.append(
            MachineStats(
                index=spec.index,
                name=spec.name,
                completed=done,
                missed_dropped=dropped,
                busy_ticks=busy,
                idle_ticks=idle,
                utilization=busy / makespan if makespan else 0.0,
                energy_j=energy,
            )
        )
    total = outcome.total_tasks
    completion_pct = 100.0 if total == 0 else outcome.completed / total * 100.0
    waits = [
        t.assign_time - t.arrival for t in outcome.tasks if t.assign_time is not None
    ]
    responses = [
        t.finish - t.arrival
        for t in outcome.tasks
        if t.status is TaskStatus.COMPLETED
    ]
    summary = SummaryStats(
        total_tasks=total,
        completed=outcome.completed,
        canceled=outcome.canceled,
        missed=outcome.missed,
        completion_pct=completion_pct,
        total_energy_j=total_energy,
        makespan_ticks=makespan,
        mean_wait_ticks=sum(waits) / len(waits) if waits else 0.0,
        mean_response_ticks=sum(responses) / len(responses) if responses else 0.0,
    )
    return summary, machines
