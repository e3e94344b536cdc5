"""Headless entry point: run scenarios, generate workloads, serve the UI.

Exit codes: 0 success (deadline misses are still a successful run),
2 argument errors, 3 validation/parse errors, 4 port already in use.
"""

from __future__ import annotations

import argparse
import errno
import os
import socket
import sys
from pathlib import Path
from typing import Optional, Sequence

from .engine import run_scenario
from .model import ConfigError, SchedulingMode, SimConfig, UNBOUNDED
from .policies import get_policy, list_policies
from .reports import ReportKind, render_report
from .timefmt import parse_seconds
from .workload import (
    ParseError,
    TypeArrivalSpec,
    ConstantArrivals,
    ExponentialArrivals,
    UniformArrivals,
    WorkloadGenSpec,
    format_workload_csv,
    generate_workload,
    parse_eet_csv,
    parse_machines_csv,
    parse_workload_csv,
)

REPORT_CHOICES = ["task", "machine", "summary", "full"]


def _default_seed() -> int:
    env = os.environ.get("E2C_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hetsim",
        description=(
            "Discrete-event simulator for deadline-constrained task "
            "scheduling on heterogeneous machines"
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario headlessly and emit reports")
    run.add_argument("--eet", required=True, help="EET matrix CSV")
    run.add_argument("--workload", required=True, help="workload trace CSV")
    run.add_argument("--machines", required=True, help="machine specs CSV")
    run.add_argument("--policy", required=True, help="scheduling policy name")
    run.add_argument(
        "--queue-size",
        default="inf",
        help="per-machine waiting-queue capacity, or 'inf' (default)",
    )
    run.add_argument(
        "--report",
        action="append",
        choices=REPORT_CHOICES,
        default=None,
        help="report kind to write as <kind>_report.csv (repeatable)",
    )
    run.add_argument("--out-dir", default=".", help="directory for report files")
    run.add_argument("--seed", type=int, default=None, help="run seed (or $E2C_SEED)")

    gen = sub.add_parser("gen", help="generate a seeded workload CSV")
    gen.add_argument("--eet", required=True, help="EET matrix CSV")
    gen.add_argument(
        "--type",
        dest="types",
        action="append",
        required=True,
        metavar="NAME:PROC:ARGS",
        help=(
            "arrival process per task type: NAME:const:PERIOD_S, "
            "NAME:exp:RATE_PER_S, or NAME:uniform:LO_S:HI_S (repeatable)"
        ),
    )
    gen.add_argument("--horizon", required=True, help="generation horizon in seconds")
    gen.add_argument(
        "--beta",
        type=float,
        default=1.5,
        help="deadline slack factor: deadline = arrival + beta * mean EET",
    )
    gen.add_argument("--seed", type=int, default=None, help="generator seed")
    gen.add_argument("-o", "--output", required=True, help="output workload CSV path")

    serve = sub.add_parser("serve", help="start the interactive control service")
    serve.add_argument("--port", type=int, default=8080)
    serve.add_argument("--host", default="127.0.0.1")

    sub.add_parser("policies", help="list registered scheduling policies")
    return parser


def _read_text(parser: argparse.ArgumentParser, path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        parser.error(f"cannot read {path}: {exc}")
        raise AssertionError  # parser.error exits


def _parse_queue_size(parser: argparse.ArgumentParser, text: str) -> Optional[int]:
    if text.lower() == "inf":
        return UNBOUNDED
    try:
        value = int(text)
    except ValueError:
        parser.error(f"--queue-size must be a positive integer or 'inf', got {text!r}")
    if value < 1:
        parser.error("--queue-size must be >= 1")
    return value


def _cmd_run(parser: argparse.ArgumentParser, args: argparse.Namespace) -> int:
    try:
        policy = get_policy(args.policy)
    except ConfigError as exc:
        parser.error(str(exc))
    capacity = _parse_queue_size(parser, args.queue_size)
    if policy.mode is SchedulingMode.IMMEDIATE and capacity is not None:
        parser.error(
            f"policy {policy.name!r} is immediate-mode: machine queues are "
            "unbounded (--queue-size inf)"
        )
    seed = args.seed if args.seed is not None else _default_seed()
    eet_text = _read_text(parser, args.eet)
    workload_text = _read_text(parser, args.workload)
    machines_text = _read_text(parser, args.machines)
    try:
        eet = parse_eet_csv(eet_text)
        machines = parse_machines_csv(machines_text)
        workload = parse_workload_csv(workload_text, eet)
        config = SimConfig(
            policy=policy.name, mode=policy.mode, queue_capacity=capacity, seed=seed
        )
        outcome = run_scenario(eet, machines, workload, config)
    except (ParseError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for kind_name in args.report or []:
        kind = ReportKind.from_name(kind_name)
        path = out_dir / f"{kind.value}_report.csv"
        path.write_text(render_report(outcome, kind), encoding="utf-8")
    sys.stdout.write(render_report(outcome, ReportKind.SUMMARY))
    return 0


def _parse_type_spec(parser: argparse.ArgumentParser, text: str) -> TypeArrivalSpec:
    parts = text.split(":")
    if len(parts) < 3:
        parser.error(f"malformed --type spec {text!r}")
    name, proc = parts[0], parts[1].lower()
    try:
        if proc == "const" and len(parts) == 3:
            process = ConstantArrivals(period_ticks=parse_seconds(parts[2]))
        elif proc == "exp" and len(parts) == 3:
            process = ExponentialArrivals(rate_per_s=float(parts[2]))
        elif proc == "uniform" and len(parts) == 4:
            process = UniformArrivals(
                lo_ticks=parse_seconds(parts[2]), hi_ticks=parse_seconds(parts[3])
            )
        else:
            parser.error(f"malformed --type spec {text!r}")
            raise AssertionError
    except (ValueError, ConfigError) as exc:
        parser.error(f"bad --type spec {text!r}: {exc}")
        raise AssertionError
    return TypeArrivalSpec(type_name=name, process=process)


def _cmd_gen(parser: argparse.ArgumentParser, args: argparse.Namespace) -> int:
    entries = tuple(_parse_type_spec(parser, spec) for spec in args.types)
    try:
        horizon = parse_seconds(args.horizon)
    except ValueError as exc:
        parser.error(f"bad --horizon: {exc}")
    seed = args.seed if args.seed is not None else _default_seed()
    eet_text = _read_text(parser, args.eet)
    try:
        eet = parse_eet_csv(eet_text)
        spec = WorkloadGenSpec(
            entries=entries, horizon_ticks=horizon, beta=args.beta, seed=seed
        )
        workload = generate_workload(spec, eet)
    except (ParseError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    Path(args.output).write_text(format_workload_csv(workload, eet), encoding="utf-8")
    print(f"wrote {len(workload)} tasks to {args.output}")
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    # Probe the port first so "already in use" is a clean, documented exit.
    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.bind((args.host, args.port))
        port = probe.getsockname()[1]
    except OSError as exc:
        if exc.errno in (errno.EADDRINUSE, errno.EACCES):
            print(f"error: port {args.port} is already in use", file=sys.stderr)
            return 4
        raise
    finally:
        probe.close()

    ui_dir = os.environ.get("HETSIM_UI_DIR")
    if ui_dir is None and Path("frontend/dist").is_dir():
        ui_dir = "frontend/dist"
    app = create_app(ui_dir=ui_dir)
    print(f"listening on http://{args.host}:{port}", flush=True)
    if ui_dir:
        print(f"web UI at http://{args.host}:{port}/ui/", flush=True)
    uvicorn.run(app, host=args.host, port=port, log_level="warning")
    return 0


def _cmd_policies() -> int:
    for policy in list_policies():
        print(f"{policy.name}\t{policy.mode.value}")
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command == "run":
        return _cmd_run(parser, args)
    if args.command == "gen":
        return _cmd_gen(parser, args)
    if args.command == "serve":
        return _cmd_serve(args)
    if args.command == "policies":
        return _cmd_policies()
    parser.error(f"unknown command {args.command!r}")
    return 2


if __name__ == "__main__":
    sys.exit(main())
