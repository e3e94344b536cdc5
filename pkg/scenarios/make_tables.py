#!/usr/bin/env python3
"""Regenerate the scenario-pack workloads and the intensity summary tables.

Produces three CSV tables of mean completion percentage (over the pack's
seeds) per policy and intensity, mirroring the classic assignment plots:

* ``table_homogeneous_immediate.csv``  immediate policies, homogeneous EET
* ``table_heterogeneous_immediate.csv`` immediate policies, heterogeneous EET
* ``table_heterogeneous_batch.csv``    batch policies, heterogeneous EET

Run from the repository root or this directory:

    python3 scenarios/make_tables.py
"""

from __future__ import annotations

import json
from pathlib import Path

from hetsim import (
    ExponentialArrivals,
    SimConfig,
    TypeArrivalSpec,
    WorkloadGenSpec,
    format_workload_csv,
    generate_workload,
    get_policy,
    parse_eet_csv,
    parse_machines_csv,
    run_scenario,
    summarize,
)
from hetsim.model import SchedulingMode
from hetsim.timefmt import parse_seconds

PACK_DIR = Path(__file__).resolve().parent

IMMEDIATE = ["fcfs", "mect", "meet"]
BATCH = ["mm", "mmu", "msd"]


def load_pack() -> dict:
    return json.loads((PACK_DIR / "pack.json").read_text())


def mean_completion(eet, machines, pack, policy: str, factor: int, seeds) -> float:
    pol = get_policy(policy)
    capacity = (
        None
        if pol.mode is SchedulingMode.IMMEDIATE
        else pack["batch_queue_capacity"]
    )
    horizon = parse_seconds(pack["horizon_s"])
    rate = pack["base_rate_per_s"] * factor
    pcts = []
    for seed in seeds:
        spec = WorkloadGenSpec(
            entries=tuple(
                TypeArrivalSpec(t.name, ExponentialArrivals(rate))
                for t in eet.task_types
            ),
            horizon_ticks=horizon,
            beta=pack["beta"],
            seed=seed,
        )
        workload = generate_workload(spec, eet)
        config = SimConfig(
            policy=policy, mode=pol.mode, queue_capacity=capacity, seed=seed
        )
        summary, _ = summarize(run_scenario(eet, machines, workload, config))
        pcts.append(summary.completion_pct)
    return sum(pcts) / len(pcts)


def write_table(path: Path, eet, machines, pack, policies) -> None:
    factors = pack["intensity_factors"]
    lines = ["policy," + ",".join(factors)]
    for policy in policies:
        cells = [policy]
        for factor in factors.values():
            value = mean_completion(
                eet, machines, pack, policy, factor, pack["trend_seeds"]
            )
            cells.append(f"{value:.3f}")
        lines.append(",".join(cells))
    path.write_text("\n".join(lines) + "\n")
    print(f"wrote {path.name}")


def regenerate_workloads(eet, pack) -> None:
    horizon = parse_seconds(pack["horizon_s"])
    for label, factor in pack["intensity_factors"].items():
        rate = pack["base_rate_per_s"] * factor
        spec = WorkloadGenSpec(
            entries=tuple(
                TypeArrivalSpec(t.name, ExponentialArrivals(rate))
                for t in eet.task_types
            ),
            horizon_ticks=horizon,
            beta=pack["beta"],
            seed=pack["workload_seed"],
        )
        workload = generate_workload(spec, eet)
        path = PACK_DIR / pack["workloads"][label]
        path.write_text(format_workload_csv(workload, eet))
        print(f"wrote {path.name} ({len(workload)} tasks)")


def main() -> None:
    pack = load_pack()
    het = parse_eet_csv((PACK_DIR / pack["eet_heterogeneous"]).read_text())
    homog = parse_eet_csv((PACK_DIR / pack["eet_homogeneous"]).read_text())
    machines = parse_machines_csv((PACK_DIR / pack["machines"]).read_text())
    regenerate_workloads(het, pack)
    write_table(
        PACK_DIR / "table_homogeneous_immediate.csv", homog, machines, pack, IMMEDIATE
    )
    write_table(
        PACK_DIR / "table_heterogeneous_immediate.csv", het, machines, pack, IMMEDIATE
    )
    write_table(
        PACK_DIR / "table_heterogeneous_batch.csv", het, machines, pack, BATCH
    )


if __name__ == "__main__":
    main()
