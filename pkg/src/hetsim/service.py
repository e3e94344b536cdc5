"""Session manager exposing the interactive verbs over HTTP + JSON + SSE.

Endpoints:

* ``POST /sessions``                multipart scenario upload + config
* ``POST /sessions/{id}/control``   ``{"command": "play|pause|step|reset|set_speed|set_policy|set_queue_size", ...}``
* ``GET  /sessions/{id}/state``     current snapshot
* ``GET  /sessions/{id}/report``    ``?kind=task|machine|summary|full`` (text/csv)
* ``GET  /sessions/{id}/events``    server-sent stream: one message per applied event

All numbers in JSON are seconds/joules, matching the CSV formats. Within a
session, commands are serialized under one lock; the play worker advances
events at wall pace = simulated seconds / speed, and pacing never changes
simulated results.
"""

from __future__ import annotations

import json
import queue
import threading
import time
import uuid
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, Form, HTTPException, UploadFile
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import PlainTextResponse, StreamingResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .engine import AppliedEvent, Simulation, StateSnapshot
from .model import ConfigError, SchedulingMode, SimConfig, UNBOUNDED
from .policies import get_policy
from .reports import ReportKind, render_report
from .workload import (
    ParseError,
    parse_eet_csv,
    parse_machines_csv,
    parse_workload_csv,
)

DEFAULT_SESSION_TIMEOUT_S = 30 * 60


def _ticks_to_s(ticks: Optional[int]) -> Optional[float]:
    return None if ticks is None else ticks / 1e6


def _event_payload(event: AppliedEvent) -> dict:
    return {
        "seq": event.seq,
        "time_s": _ticks_to_s(event.time),
        "kind": event.kind.name.lower(),
        "entity": event.entity,
        "changes": [
            {"task": c.task_id, "from": c.old.value, "to": c.new.value}
            for c in event.changes
        ],
        "assignments": [
            {
                "task": a.task_id,
                "machine": a.machine_index,
                "predicted_completion_s": _ticks_to_s(a.predicted_completion),
            }
            for a in event.assignments
        ],
        "starts": [
            {
                "task": s.task_id,
                "machine": s.machine_index,
                "will_finish_s": _ticks_to_s(s.will_finish),
            }
            for s in event.starts
        ],
    }


def _snapshot_payload(snap: StateSnapshot, mode: str, speed: float) -> dict:
    return {
        "clock_s": _ticks_to_s(snap.clock),
        "mode": mode,
        "speed": speed,
        "finished": snap.finished,
        "counters": {
            "total": snap.total_tasks,
            "pending": snap.pending,
            "completed": snap.completed,
            "canceled": snap.canceled,
            "missed": snap.missed,
        },
        "batch": list(snap.batch),
        "machines": [
            {
                "index": m.index,
                "name": m.name,
                "waiting": list(m.waiting),
                "executing": (
                    None
                    if m.executing_task is None
                    else {
                        "task": m.executing_task,
                        "started_s": _ticks_to_s(m.executing_started),
                        "will_finish_s": _ticks_to_s(m.executing_will_finish),
                        "progress": m.progress,
                    }
                ),
                "busy_s": _ticks_to_s(m.busy_ticks),
                "idle_s": _ticks_to_s(m.idle_ticks),
            }
            for m in snap.machines
        ],
        "last_event": (
            None if snap.last_event is None else _event_payload(snap.last_event)
        ),
    }


class Session:
    """One simulation session: engine + playback worker + subscribers."""

    def __init__(self, session_id: str, scenario: dict, config: SimConfig):
        self.id = session_id
        self.scenario = scenario  # eet, machines, workload (parsed, immutable)
        self.config = config
        self.sim = Simulation(
            scenario["eet"], scenario["machines"], scenario["workload"], config
        )
        self.mode = "finished" if self.sim.finished else "paused"
        self.speed = 1.0
        self.lock = threading.RLock()
        self.seq = 0
        self.subscribers: list[queue.SimpleQueue] = []
        self.last_touch = time.monotonic()
        self._worker_gen = 0

    # All methods below assume self.lock is held by the caller.

    def touch(self) -> None:
        self.last_touch = time.monotonic()

    def snapshot_payload(self) -> dict:
        return _snapshot_payload(self.sim.snapshot(), self.mode, self.speed)

    def _publish(self, message: dict) -> None:
        self.seq += 1
        message["stream_seq"] = self.seq
        for q in self.subscribers:
            q.put(message)

    def publish_applied(self, event: AppliedEvent) -> None:
        self._publish(
            {
                "type": "applied",
                "event": _event_payload(event),
                "snapshot": self.snapshot_payload(),
            }
        )

    def publish_state(self, kind: str = "state") -> None:
        self._publish({"type": kind, "snapshot": self.snapshot_payload()})

    def subscribe(self) -> tuple[queue.SimpleQueue, dict]:
        q: queue.SimpleQueue = queue.SimpleQueue()
        self.subscribers.append(q)
        hello = {
            "type": "snapshot",
            "stream_seq": self.seq,
            "snapshot": self.snapshot_payload(),
        }
        return q, hello

    def unsubscribe(self, q: queue.SimpleQueue) -> None:
        try:
            self.subscribers.remove(q)
        except ValueError:
            pass

    def step_once(self) -> AppliedEvent:
        applied = self.sim.step()
        self.publish_applied(applied)
        if self.sim.finished:
            self.mode = "finished"
            self.publish_state()
        return applied

    def start_worker(self) -> None:
        # A fresh generation invalidates any worker still winding down from
        # an earlier play, so two workers never step the same engine.
        self._worker_gen += 1
        worker = threading.Thread(
            target=self._play_loop, args=(self._worker_gen,), daemon=True
        )
        worker.start()

    def _play_loop(self, gen: int) -> None:
        while True:
            with self.lock:
                if self.mode != "running" or gen != self._worker_gen:
                    return
                next_time = self.sim.next_event_time()
                if next_time is None:
                    self.mode = "finished"
                    self.publish_state()
                    return
                gap_s = (next_time - self.sim.clock) / 1e6
            waited = 0.0
            while True:
                with self.lock:
                    if self.mode != "running" or gen != self._worker_gen:
                        return
                    need = gap_s / self.speed
                if waited >= need:
                    break
                chunk = min(0.05, need - waited)
                time.sleep(chunk)
                waited += chunk
            with self.lock:
                if self.mode != "running" or gen != self._worker_gen:
                    return
                if not self.sim.finished:
                    applied = self.sim.step()
                    self.publish_applied(applied)
                if self.sim.finished:
                    self.mode = "finished"
                    self.publish_state()
                    return

    def rebuild(self, config: SimConfig) -> None:
        self._worker_gen += 1  # orphan any worker from the previous run
        self.config = config
        self.sim = Simulation(
            self.scenario["eet"],
            self.scenario["machines"],
            self.scenario["workload"],
            config,
        )
        self.mode = "finished" if self.sim.finished else "paused"


class SessionManager:
    def __init__(self, timeout_s: float = DEFAULT_SESSION_TIMEOUT_S):
        self.timeout_s = timeout_s
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()

    def create(self, scenario: dict, config: SimConfig) -> Session:
        session = Session(uuid.uuid4().hex, scenario, config)
        with self._lock:
            self._evict_expired()
            self._sessions[session.id] = session
        return session

    def get(self, session_id: str) -> Session:
        with self._lock:
            self._evict_expired()
            session = self._sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail="unknown session")
        with session.lock:
            session.touch()
        return session

    def _evict_expired(self) -> None:
        now = time.monotonic()
        expired = [
            sid
            for sid, session in self._sessions.items()
            if now - session.last_touch > self.timeout_s and session.mode != "running"
        ]
        for sid in expired:
            del self._sessions[sid]


class ControlRequest(BaseModel):
    command: str
    speed: Optional[float] = None
    policy: Optional[str] = None
    queue_size: Optional[str] = None


def _parse_queue_size(text: str) -> Optional[int]:
    if text.lower() == "inf":
        return UNBOUNDED
    try:
        value = int(text)
    except ValueError:
        raise ConfigError(
            f"queue_size must be a positive integer or 'inf', got {text!r}"
        ) from None
    return value


def _build_config(policy_name: str, queue_size: str, seed: int) -> SimConfig:
    policy = get_policy(policy_name)
    capacity = _parse_queue_size(queue_size)
    return SimConfig(
        policy=policy.name, mode=policy.mode, queue_capacity=capacity, seed=seed
    )


def create_app(
    session_timeout_s: float = DEFAULT_SESSION_TIMEOUT_S,
    ui_dir: Optional[str] = None,
) -> FastAPI:
    app = FastAPI(title="hetsim control service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    manager = SessionManager(timeout_s=session_timeout_s)
    app.state.manager = manager
    if ui_dir and Path(ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    @app.post("/sessions")
    async def create_session(
        eet: UploadFile,
        workload: UploadFile,
        machines: UploadFile,
        policy: str = Form(...),
        queue_size: str = Form("inf"),
        seed: int = Form(0),
    ):
        try:
            eet_matrix = parse_eet_csv((await eet.read()).decode("utf-8"))
            machine_specs = parse_machines_csv((await machines.read()).decode("utf-8"))
            tasks = parse_workload_csv((await workload.read()).decode("utf-8"), eet_matrix)
            config = _build_config(policy, queue_size, seed)
            scenario = {
                "eet": eet_matrix,
                "machines": machine_specs,
                "workload": tasks,
            }
            session = manager.create(scenario, config)
        except (ParseError, ConfigError) as exc:
            report = getattr(exc, "report", None)
            raise HTTPException(
                status_code=422,
                detail={
                    "message": str(exc),
                    "violations": report.violations if report else [],
                },
            ) from None
        with session.lock:
            return {"id": session.id, "snapshot": session.snapshot_payload()}

    @app.get("/sessions/{session_id}/state")
    def get_state(session_id: str):
        session = manager.get(session_id)
        with session.lock:
            return {"snapshot": session.snapshot_payload()}

    @app.post("/sessions/{session_id}/control")
    def control(session_id: str, request: ControlRequest):
        session = manager.get(session_id)
        command = request.command.lower()
        with session.lock:
            if command == "play":
                if session.mode == "finished":
                    raise HTTPException(409, "simulation already finished")
                if session.mode == "running":
                    session.mode = "paused"
                elif session.sim.finished:
                    session.mode = "finished"
                else:
                    session.mode = "running"
                    session.start_worker()
                session.publish_state()
            elif command == "pause":
                if session.mode == "finished":
                    raise HTTPException(409, "simulation already finished")
                session.mode = "paused"
                session.publish_state()
            elif command == "step":
                if session.mode == "running":
                    raise HTTPException(409, "pause the simulation before stepping")
                if session.mode == "finished" or session.sim.finished:
                    raise HTTPException(409, "simulation already finished")
                session.step_once()
            elif command == "reset":
                if session.mode == "running":
                    raise HTTPException(409, "pause the simulation before reset")
                session.rebuild(session.config)
                session.publish_state("reset")
            elif command == "set_speed":
                if request.speed is None or not request.speed > 0:
                    raise HTTPException(409, "speed must be a positive number")
                if session.mode == "finished":
                    raise HTTPException(409, "simulation already finished")
                session.speed = float(request.speed)
                session.publish_state()
            elif command in ("set_policy", "set_queue_size"):
                if session.mode != "paused" or session.sim.event_log:
                    raise HTTPException(
                        409, "policy and queue size can only change at clock 0"
                    )
                policy_name = (
                    request.policy
                    if command == "set_policy" and request.policy
                    else session.config.policy
                )
                queue_size = (
                    request.queue_size
                    if command == "set_queue_size" and request.queue_size
                    else (
                        "inf"
                        if session.config.queue_capacity is None
                        else str(session.config.queue_capacity)
                    )
                )
                if command == "set_policy" and request.policy is None:
                    raise HTTPException(409, "set_policy requires a policy name")
                if command == "set_queue_size" and request.queue_size is None:
                    raise HTTPException(409, "set_queue_size requires queue_size")
                try:
                    new_config = _build_config(
                        policy_name, queue_size, session.config.seed
                    )
                    session.rebuild(new_config)
                except ConfigError as exc:
                    raise HTTPException(409, str(exc)) from None
                session.publish_state()
            else:
                raise HTTPException(409, f"unknown command {request.command!r}")
            return {"snapshot": session.snapshot_payload()}

    @app.get("/sessions/{session_id}/report")
    def get_report(session_id: str, kind: str = "summary"):
        session = manager.get(session_id)
        try:
            report_kind = ReportKind.from_name(kind)
        except ValueError as exc:
            raise HTTPException(400, str(exc)) from None
        with session.lock:
            if session.mode != "finished":
                raise HTTPException(409, "simulation not finished")
            text = render_report(session.sim.outcome(), report_kind)
        return PlainTextResponse(text, media_type="text/csv; charset=utf-8")

    @app.get("/sessions/{session_id}/events")
    def stream_events(session_id: str):
        session = manager.get(session_id)
        with session.lock:
            q, hello = session.subscribe()

        def sse(message: dict) -> str:
            return (
                f"event: {message['type']}\n"
                f"data: {json.dumps(message, separators=(',', ':'))}\n\n"
            )

        def generate():
            try:
                yield sse(hello)
                while True:
                    try:
                        message = q.get(timeout=0.5)
                    except queue.Empty:
                        yield ": keepalive\n\n"
                        continue
                    yield sse(message)
            finally:
                with session.lock:
                    session.unsubscribe(q)

        return StreamingResponse(generate(), media_type="text/event-stream")

    return app
