"""Acceptance suite: one test per primary criterion, one PASS line each.

Run with ``pytest tests/test_acceptance.py -s`` to see the per-criterion
lines. Tolerances are pinned here and nowhere else.
"""

import json
import random
import time
from pathlib import Path

import pytest

from hetsim import (
    ExponentialArrivals,
    ReportKind,
    SchedulingMode,
    SimConfig,
    TypeArrivalSpec,
    WorkloadGenSpec,
    format_event_log,
    generate_workload,
    get_policy,
    parse_eet_csv,
    parse_machines_csv,
    parse_workload_csv,
    register_policy,
    render_report,
    run_scenario,
    summarize,
    unregister_policy,
)
from hetsim.policies import (
    ALL_BUILTIN_POLICIES,
    BATCH_POLICIES,
    IMMEDIATE_POLICIES,
    mect_select,
    meet_select,
    min_min_select,
)
from hetsim.timefmt import parse_seconds

from helpers import (
    ORACLE_SELECTS,
    config_for,
    default_machines,
    mk_eet,
    mk_task,
    random_scenario,
    replay_and_check,
    s,
    scale_scenario,
    tick_replay_energy,
)
from test_policies import bt, slot, view_for

PACK_DIR = Path(__file__).resolve().parent.parent / "scenarios"


def report_pass(name: str) -> None:
    print(f"\n[ACCEPTANCE] {name}: PASS")


@pytest.fixture(scope="module")
def pack():
    data = json.loads((PACK_DIR / "pack.json").read_text())
    data["_eet_het"] = parse_eet_csv(
        (PACK_DIR / data["eet_heterogeneous"]).read_text()
    )
    data["_machines"] = parse_machines_csv((PACK_DIR / data["machines"]).read_text())
    return data


def pack_completion_means(pack, policies, seeds):
    """Mean completion pct per (policy, intensity) over the given seeds."""
    eet = pack["_eet_het"]
    machines = pack["_machines"]
    horizon = parse_seconds(pack["horizon_s"])
    means = {}
    for policy in policies:
        pol = get_policy(policy)
        capacity = (
            None
            if pol.mode is SchedulingMode.IMMEDIATE
            else pack["batch_queue_capacity"]
        )
        for label, factor in pack["intensity_factors"].items():
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
            means[(policy, label)] = sum(pcts) / len(pcts)
    return means


def test_conservation_and_lifecycle_over_randomized_scenarios():
    """>=100 random scenarios, 2-8 machines, 1-5 types, 10-500 tasks, all 6
    policies: conservation, legal status graph, no execution overlap, queue
    capacity respected. Budget: < 60 s."""
    started = time.monotonic()
    rng = random.Random(20260809)
    policies_seen = set()
    for index in range(104):
        policy = ALL_BUILTIN_POLICIES[index % len(ALL_BUILTIN_POLICIES)]
        policies_seen.add(policy)
        eet, machines, workload, config = random_scenario(rng, policy=policy)
        outcome = run_scenario(eet, machines, workload, config)
        replay_and_check(eet, machines, workload, config, outcome)
        assert (
            outcome.completed + outcome.canceled + outcome.missed
            == len(workload)
        )
    elapsed = time.monotonic() - started
    assert policies_seen == set(ALL_BUILTIN_POLICIES)
    assert elapsed < 60, f"conservation sweep took {elapsed:.1f}s"
    report_pass(
        f"conservation & lifecycle (104 scenarios, {elapsed:.1f}s)"
    )


def test_determinism_rerun_and_cli_vs_service(tmp_path):
    """Same scenario run twice -> byte-identical event logs and reports;
    the CLI and the service produce byte-identical report files."""
    rng = random.Random(7)
    for _ in range(3):
        eet, machines, workload, config = random_scenario(rng, max_tasks=120)
        first = run_scenario(eet, machines, workload, config)
        second = run_scenario(eet, machines, workload, config)
        assert format_event_log(first.event_log) == format_event_log(
            second.event_log
        )
        for kind in ReportKind:
            assert render_report(first, kind) == render_report(second, kind)

    # CLI vs service on the shipped high-intensity scenario.
    from fastapi.testclient import TestClient

    from hetsim.cli import main as cli_main
    from hetsim.service import create_app

    eet_text = (PACK_DIR / "eet_heterogeneous.csv").read_text()
    machines_text = (PACK_DIR / "machines.csv").read_text()
    workload_text = (PACK_DIR / "workload_high.csv").read_text()
    out = tmp_path / "reports"
    import contextlib
    import io

    with contextlib.redirect_stdout(io.StringIO()):
        code = cli_main(
            [
                "run",
                "--eet", str(PACK_DIR / "eet_heterogeneous.csv"),
                "--workload", str(PACK_DIR / "workload_high.csv"),
                "--machines", str(PACK_DIR / "machines.csv"),
                "--policy", "mm",
                "--queue-size", "1",
                "--report", "task",
                "--report", "machine",
                "--report", "summary",
                "--report", "full",
                "--out-dir", str(out),
            ]
        )
    assert code == 0
    with TestClient(create_app()) as client:
        response = client.post(
            "/sessions",
            files={
                "eet": ("eet.csv", eet_text.encode()),
                "workload": ("workload.csv", workload_text.encode()),
                "machines": ("machines.csv", machines_text.encode()),
            },
            data={"policy": "mm", "queue_size": "1"},
        )
        assert response.status_code == 200
        sid = response.json()["id"]
        client.post(
            f"/sessions/{sid}/control",
            json={"command": "set_speed", "speed": 1e9},
        )
        client.post(f"/sessions/{sid}/control", json={"command": "play"})
        deadline = time.monotonic() + 30
        while time.monotonic() < deadline:
            snap = client.get(f"/sessions/{sid}/state").json()["snapshot"]
            if snap["finished"]:
                break
            time.sleep(0.02)
        else:
            raise TimeoutError("service session did not finish")
        for kind in ("task", "machine", "summary", "full"):
            served = client.get(
                f"/sessions/{sid}/report", params={"kind": kind}
            ).content
            assert served == (out / f"{kind}_report.csv").read_bytes()
    report_pass("determinism (rerun + CLI vs service byte-identical)")


ORACLE_FIXTURES = [
    # (eet_entries, tasks(id, type, arrival_s, deadline_s), capacities)
    (
        [[s(2), s(4)], [s(3), s(1)]],
        [(0, 0, 0, 100), (1, 1, 0, 100)],
    ),
    (
        [[s(2), s(4)], [s(3), s(1)]],
        [(0, 0, 0, 3), (1, 1, 0.5, 4), (2, 0, 1, 5), (3, 1, 1.5, 6)],
    ),
    (
        [[s(2), s(4)], [s(3), s(1)]],
        [
            (0, 0, 0, 10),
            (1, 1, 0, 4),
            (2, 0, 0, 4),
            (3, 1, 0, 8),
            (4, 0, 0, 2),
        ],
    ),
    (
        [[s(2), s(4), None], [s(3), s(1), s(2)]],
        [(0, 0, 0, 6), (1, 1, 0, 2), (2, 1, 0.5, 7), (3, 0, 1, 9), (4, 1, 2, 5)],
    ),
]


def test_policy_assignment_sequences_match_brute_force_oracle():
    """On the hand-traced fixture family, each policy's full assignment
    sequence equals an independent brute-force oracle's, exactly."""
    checked = 0
    for entries, raw_tasks in ORACLE_FIXTURES:
        eet = mk_eet(entries)
        machines = default_machines(len(entries[0]))
        workload = [
            mk_task(tid, type_id, s(arr), s(dl))
            for tid, type_id, arr, dl in raw_tasks
        ]
        for policy_name in ALL_BUILTIN_POLICIES:
            mode = get_policy(policy_name).mode
            capacities = (
                [None] if mode is SchedulingMode.IMMEDIATE else [None, 1]
            )
            for capacity in capacities:
                config = SimConfig(
                    policy=policy_name, mode=mode, queue_capacity=capacity
                )
                produced = run_scenario(eet, machines, workload, config)
                oracle_name = register_policy(
                    f"oracle-{policy_name}-{checked}",
                    ORACLE_SELECTS[policy_name],
                    mode,
                )
                try:
                    oracle_config = SimConfig(
                        policy=oracle_name, mode=mode, queue_capacity=capacity
                    )
                    expected = run_scenario(
                        eet, machines, workload, oracle_config
                    )
                finally:
                    unregister_policy(oracle_name)
                assert produced.assignment_sequence() == expected.assignment_sequence()
                assert [t.status for t in produced.tasks] == [
                    t.status for t in expected.tasks
                ]
                checked += 1
    report_pass(
        f"policy oracles ({checked} fixture x policy x capacity runs, exact)"
    )


def test_degeneracy_identities():
    """MM on singletons == MECT; MECT == MEET when idle; MEET scale
    invariant; homogeneous MEET picks machine 0. 50+ instances each."""
    rng = random.Random(4242)

    for _ in range(60):  # MM singleton == MECT
        n = rng.randint(1, 5)
        row = [None if rng.random() < 0.2 else s(rng.randint(1, 30)) for _ in range(n)]
        if all(e is None for e in row):
            row[rng.randrange(n)] = s(2)
        eet = mk_eet([row])
        slots = [
            slot(i, ready=s(rng.randint(0, 20)), free=rng.choice([None, 0, 1]))
            for i in range(n)
        ]
        view = view_for(eet, slots)
        task = bt(rng.randint(0, 9), 0, deadline=s(rng.randint(1, 50)))
        assert min_min_select([task], view) == mect_select([task], view)

    for _ in range(60):  # MECT == MEET on idle machines
        n = rng.randint(1, 5)
        row = [s(rng.randint(1, 30)) for _ in range(n)]
        eet = mk_eet([row])
        view = view_for(eet, [slot(i) for i in range(n)])
        task = bt(0, 0)
        assert mect_select([task], view) == meet_select([task], view)

    for _ in range(60):  # MEET choice invariant under positive scaling
        n = rng.randint(1, 5)
        row = [None if rng.random() < 0.2 else s(rng.randint(1, 30)) for _ in range(n)]
        if all(e is None for e in row):
            row[0] = s(1)
        k = rng.choice([2, 3, 7, 10])
        slots = [slot(i, ready=s(rng.randint(0, 9))) for i in range(n)]
        base_choice = meet_select([bt(0, 0)], view_for(mk_eet([row]), slots))
        scaled_choice = meet_select(
            [bt(0, 0)],
            view_for(mk_eet([[None if e is None else e * k for e in row]]), slots),
        )
        assert base_choice.machine_index == scaled_choice.machine_index

    for _ in range(60):  # homogeneous EET: MEET always machine 0
        n = rng.randint(2, 6)
        eet = mk_eet([[s(rng.randint(1, 9))] * n])
        slots = [
            slot(i, ready=s(rng.randint(0, 9)), count=rng.randint(0, 5))
            for i in range(n)
        ]
        assert meet_select([bt(0, 0)], view_for(eet, slots)).machine_index == 0

    report_pass("degeneracy identities (4 x 60 random instances)")


def test_intensity_trend_on_scenario_pack(pack):
    """Mean completion pct non-increasing in arrival intensity for every
    policy (ties allowed), 10 seeds per intensity. Budget: < 30 s."""
    started = time.monotonic()
    means = pack_completion_means(pack, ALL_BUILTIN_POLICIES, pack["trend_seeds"])
    elapsed = time.monotonic() - started
    labels = list(pack["intensity_factors"])
    for policy in ALL_BUILTIN_POLICIES:
        row = [means[(policy, label)] for label in labels]
        for lighter, heavier in zip(row, row[1:]):
            assert lighter >= heavier, (
                f"{policy}: completion rose with intensity: {row}"
            )
    assert elapsed < 30, f"intensity sweep took {elapsed:.1f}s"
    report_pass(f"intensity trend (6 policies x 3 intensities, {elapsed:.1f}s)")


def test_heterogeneity_claims_on_high_intensity(pack):
    """Scenario-specific regression on the shipped heterogeneous pack:
    MECT >= FCFS and best batch >= best immediate at high intensity."""
    means = pack_completion_means(pack, ALL_BUILTIN_POLICIES, pack["trend_seeds"])
    assert means[("mect", "high")] >= means[("fcfs", "high")]
    best_batch = max(means[(p, "high")] for p in BATCH_POLICIES)
    best_immediate = max(means[(p, "high")] for p in IMMEDIATE_POLICIES)
    assert best_batch >= best_immediate, (
        f"best batch {best_batch:.3f} < best immediate {best_immediate:.3f}"
    )
    report_pass(
        "heterogeneity claims (MECT {:.2f} >= FCFS {:.2f}; "
        "batch {:.2f} >= immediate {:.2f})".format(
            means[("mect", "high")],
            means[("fcfs", "high")],
            best_batch,
            best_immediate,
        )
    )


def test_energy_accounting_against_tick_replay():
    """20 random scenarios: per-machine busy+idle == makespan exactly, and
    total energy matches the tick-granular replay within 1e-6 J."""
    rng = random.Random(31337)
    for _ in range(20):
        eet, machines, workload, config = random_scenario(rng, max_tasks=80)
        outcome = run_scenario(eet, machines, workload, config)
        summary, stats = summarize(outcome)
        for machine in stats:
            assert machine.busy_ticks + machine.idle_ticks == outcome.makespan
        oracle = tick_replay_energy(outcome)
        assert abs(summary.total_energy_j - oracle) < 1e-6, (
            f"energy {summary.total_energy_j} vs replay {oracle}"
        )
    report_pass("energy accounting (20 scenarios, tick replay, <1e-6 J)")


@pytest.mark.parametrize("k", [2, 10])
def test_time_rescaling_preserves_behavior(k):
    """Scaling all times by k preserves statuses and assignments exactly."""
    rng = random.Random(1000 + k)
    for _ in range(15):
        eet, machines, workload, config = random_scenario(rng, max_tasks=60)
        base = run_scenario(eet, machines, workload, config)
        scaled_eet, scaled_workload = scale_scenario(eet, workload, k)
        scaled = run_scenario(scaled_eet, machines, scaled_workload, config)
        assert [(t.id, t.status, t.assigned_machine) for t in base.tasks] == [
            (t.id, t.status, t.assigned_machine) for t in scaled.tasks
        ]
        assert [
            (t * k, a.task_id, a.machine_index)
            for t, a in base.assignment_log
        ] == [(t, a.task_id, a.machine_index) for t, a in scaled.assignment_log]
    report_pass(f"time rescaling by k={k} (15 scenarios, exact)")
