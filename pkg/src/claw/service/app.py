"""Session server: REST session management plus NDJSON-over-WebSocket streams.

Each session owns one simulator and one stepper task, so per-session
execution is strictly serialized and sessions cannot perturb each other.
The stepper paces simulated time against the wall clock (configurable time
scale, or flat-out in headless mode); frames are stamped with simulated
time, so wall-clock jitter never changes results.

Wire protocol on ``/api/sessions/{id}/stream``: text frames of
newline-delimited JSON. The server opens with Hello, the client answers
with Hello (role ``leader`` to command, anything else observes), then the
server broadcasts state frames at 50 Hz of simulated time and the leader
may send Command messages. A session that ends keeps its episode log in
memory (and on disk under ``--log-dir``) for one hour; attaching to a
terminal session replays the stored log read-only at real-time rate.
"""

from __future__ import annotations

import asyncio
import itertools
import json
import logging
import os
import time
from dataclasses import dataclass, field as dataclass_field
from datetime import datetime, timezone

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, PlainTextResponse, Response
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from ..errors import MalformedMessageError, ProtocolViolationError
from ..scenario import SPEC_VERSION, ScenarioConfig
from ..session import SimSession
from ..teleop import Bye, Command, Feedback, Hello, decode_line, encode

log = logging.getLogger("claw.service")

#: Paced stepping wakes at this interval and never runs further ahead than
#: one wake's worth of simulated time.
_WAKE_S = 0.005
_HEADLESS_BATCH = 2000


@dataclass
class ServiceSettings:
    max_sessions: int = 16
    time_scale: float = 1.0
    no_pacing: bool = False
    log_dir: str | None = None
    ui_dir: str | None = None
    terminal_ttl_s: float = 3600.0
    clock: callable = time.monotonic

    def __post_init__(self):
        if not self.no_pacing and not 0.1 <= self.time_scale <= 10.0:
            raise ValueError("time_scale must be within [0.1, 10.0]")


class SessionDescriptor(BaseModel):
    session_id: str
    scenario: ScenarioConfig
    created: str
    state: str  # idle | running | terminal
    scenario_hash: str


class ErrorBody(BaseModel):
    error: str
    detail: object | None = None


@dataclass
class ManagedSession:
    session_id: str
    config: ScenarioConfig
    sim: SimSession
    created: str
    created_mono: float
    state: str = "idle"
    terminal_mono: float | None = None
    bye_reason: str | None = None
    task: asyncio.Task | None = None
    clients: list = dataclass_field(default_factory=list)
    commander: object | None = None
    frames: list = dataclass_field(default_factory=list)

    def descriptor(self) -> SessionDescriptor:
        return SessionDescriptor(
            session_id=self.session_id,
            scenario=self.config,
            created=self.created,
            state=self.state,
            scenario_hash=self.config.config_hash(),
        )


class _Client:
    def __init__(self, ws: WebSocket):
        self.ws = ws
        self.queue: asyncio.Queue[str | None] = asyncio.Queue(maxsize=4096)

    def push(self, line: str) -> None:
        try:
            self.queue.put_nowait(line)
        except asyncio.QueueFull:
            # Slow consumer: drop the oldest frame rather than stall the session.
            try:
                self.queue.get_nowait()
            except asyncio.QueueEmpty:
                pass
            self.queue.put_nowait(line)


def create_app(settings: ServiceSettings | None = None) -> FastAPI:
    settings = settings or ServiceSettings()
    app = FastAPI(title="claw session server")
    sessions: dict[str, ManagedSession] = {}
    ids = itertools.count(1)

    @app.exception_handler(RequestValidationError)
    async def _invalid_config(request, exc: RequestValidationError):
        detail = [
            {
                "field": ".".join(str(p) for p in err["loc"] if p != "body"),
                "message": err["msg"],
            }
            for err in exc.errors()
        ]
        return JSONResponse(
            status_code=422,
            content={"error": "invalid-config", "detail": detail},
        )

    def _prune_terminals() -> None:
        now = settings.clock()
        stale = [
            sid
            for sid, ms in sessions.items()
            if ms.terminal_mono is not None
            and now - ms.terminal_mono > settings.terminal_ttl_s
        ]
        for sid in stale:
            del sessions[sid]

    def _persist_log(ms: ManagedSession) -> None:
        if settings.log_dir and ms.sim.log is not None:
            path = os.path.join(settings.log_dir, f"{ms.session_id}.csv")
            try:
                ms.sim.log.save(path)
            except OSError as exc:
                log.warning("failed to persist log for %s: %s", ms.session_id, exc)

    def _broadcast(ms: ManagedSession, line: str) -> None:
        for client in ms.clients:
            client.push(line)

    def _finish(ms: ManagedSession, reason: str | None = None) -> None:
        if ms.state == "terminal":
            return
        ms.state = "terminal"
        ms.terminal_mono = settings.clock()
        ms.bye_reason = reason
        _persist_log(ms)
        if reason:
            _broadcast(ms, encode(Bye(reason=reason)).decode().rstrip("\n"))

    async def _stepper(ms: ManagedSession) -> None:
        sim = ms.sim
        pending: list[dict] = []
        sim.frame_listeners.append(pending.append)
        start_wall = settings.clock()
        start_sim = sim.t
        try:
            while not sim.finished:
                if settings.no_pacing:
                    for _ in range(_HEADLESS_BATCH):
                        if sim.finished:
                            break
                        sim.step_inner()
                else:
                    target = (settings.clock() - start_wall) * settings.time_scale + start_sim
                    steps = 0
                    while sim.t < target and not sim.finished and steps < 4 * _HEADLESS_BATCH:
                        sim.step_inner()
                        steps += 1
                if pending:
                    lines = [json.dumps(f, allow_nan=False) for f in pending]
                    pending.clear()
                    for line in lines:
                        _broadcast(ms, line)
                if not sim.finished:
                    await asyncio.sleep(0.0 if settings.no_pacing else _WAKE_S)
            _finish(ms, reason=f"scenario {sim.status.outcome}")
        except asyncio.CancelledError:
            raise
        except Exception as exc:  # crash containment: session dies, server lives
            log.exception("session %s crashed", ms.session_id)
            _finish(ms, reason=f"session-crashed: {exc}")

    # -- REST ------------------------------------------------------------------

    @app.get("/api/sessions", response_model=list[SessionDescriptor])
    async def list_sessions():
        _prune_terminals()
        return [ms.descriptor() for ms in sessions.values()]

    @app.post("/api/sessions", response_model=SessionDescriptor, status_code=201)
    async def create_session(config: ScenarioConfig):
        _prune_terminals()
        active = sum(1 for ms in sessions.values() if ms.state != "terminal")
        if active >= settings.max_sessions:
            return JSONResponse(status_code=409, content={"error": "capacity-exceeded"})
        session_id = f"s{next(ids):04d}"
        ms = ManagedSession(
            session_id=session_id,
            config=config,
            sim=SimSession(config),
            created=datetime.now(timezone.utc).isoformat(timespec="seconds"),
            created_mono=settings.clock(),
        )
        sessions[session_id] = ms
        return ms.descriptor()

    @app.delete("/api/sessions/{session_id}", status_code=204)
    async def delete_session(session_id: str):
        ms = sessions.pop(session_id, None)
        if ms is None:
            return JSONResponse(status_code=404, content={"error": "unknown-session"})
        if ms.task is not None:
            ms.task.cancel()
        return Response(status_code=204)

    @app.get("/api/sessions/{session_id}/log")
    async def session_log(session_id: str):
        ms = sessions.get(session_id)
        if ms is None or ms.sim.log is None:
            return JSONResponse(status_code=404, content={"error": "unknown-session"})
        return PlainTextResponse(ms.sim.log.to_csv(), media_type="text/csv")

    # -- stream ------------------------------------------------------------------

    async def _send_loop(client: _Client) -> None:
        while True:
            line = await client.queue.get()
            if line is None:
                return
            await client.ws.send_text(line)

    async def _replay_terminal(ms: ManagedSession, ws: WebSocket) -> None:
        """Read-only playback of the stored episode at real-time rate."""
        sim = ms.sim
        rows = sim.log.rows if sim.log is not None else []
        for row in rows:
            frame = {
                "type": "state",
                "t": row.t,
                "pose": row.pose,
                "deflection": row.deflection,
                "wrench": row.wrench,
                "mode": row.mode,
                "carrier_position": sim.lock.carrier_position,
                "estop": row.estop,
                "scenario": {"outcome": "replay"},
            }
            await ws.send_text(json.dumps(frame, allow_nan=False))
            await asyncio.sleep(0.02 / settings.time_scale if not settings.no_pacing else 0)
        await ws.send_text(encode(Bye(reason="replay complete")).decode().rstrip("\n"))

    @app.websocket("/api/sessions/{session_id}/stream")
    async def stream(ws: WebSocket, session_id: str):
        await ws.accept()
        ms = sessions.get(session_id)
        if ms is None:
            await ws.send_text(encode(Bye(reason="unknown-session")).decode().rstrip("\n"))
            await ws.close(code=1008)
            return
        await ws.send_text(
            encode(Hello(spec_version=SPEC_VERSION, role="follower")).decode().rstrip("\n")
        )
        # Handshake: first client line must be a Hello with a matching version.
        try:
            raw = await ws.receive_text()
            hello = decode_line(raw)
        except WebSocketDisconnect:
            return
        except MalformedMessageError as exc:
            await ws.send_text(encode(Bye(reason=f"malformed: {exc.reason}")).decode().rstrip("\n"))
            await ws.close(code=1008)
            return
        if not isinstance(hello, Hello):
            await ws.send_text(encode(Bye(reason="protocol-violation: expected hello")).decode().rstrip("\n"))
            await ws.close(code=1008)
            return
        if hello.spec_version != SPEC_VERSION:
            await ws.send_text(encode(Bye(reason="version-mismatch")).decode().rstrip("\n"))
            await ws.close(code=1008)
            return

        if ms.state == "terminal":
            try:
                await _replay_terminal(ms, ws)
                await ws.close()
            except (WebSocketDisconnect, RuntimeError):
                pass
            return

        is_commander = hello.role == "leader"
        if is_commander and ms.commander is not None:
            await ws.send_text(encode(Bye(reason="commander-conflict")).decode().rstrip("\n"))
            await ws.close(code=1008)
            return

        client = _Client(ws)
        ms.clients.append(client)
        if is_commander:
            ms.commander = client
        if ms.task is None:
            # First attach starts the paused simulation clock.
            ms.state = "running"
            ms.task = asyncio.create_task(_stepper(ms))
        if ms.bye_reason:
            client.push(encode(Bye(reason=ms.bye_reason)).decode().rstrip("\n"))

        sender = asyncio.create_task(_send_loop(client))
        last_seq = -1
        last_mode: str | None = None
        try:
            while True:
                raw = await ws.receive_text()
                try:
                    for chunk in raw.splitlines():
                        if not chunk.strip():
                            continue
                        msg = decode_line(chunk)
                        if isinstance(msg, Bye):
                            raise WebSocketDisconnect(1000)
                        if isinstance(msg, Command):
                            if not is_commander:
                                raise ProtocolViolationError("observer sent a command")
                            if ms.state == "terminal":
                                raise ProtocolViolationError("session is terminal")
                            if msg.seq <= last_seq:
                                continue  # stale/duplicate: dropped
                            last_seq = msg.seq
                            ms.sim.submit_command(pose=list(msg.pose))
                            if msg.mode != last_mode:
                                ms.sim.command_stiffness(msg.mode)
                                last_mode = msg.mode
                        elif isinstance(msg, (Hello, Feedback)):
                            raise ProtocolViolationError("unexpected message type")
                except (MalformedMessageError, ProtocolViolationError) as exc:
                    reason = getattr(exc, "reason", None) or str(exc)
                    await ws.send_text(encode(Bye(reason=reason)).decode().rstrip("\n"))
                    await ws.close(code=1008)
                    break
        except WebSocketDisconnect:
            pass
        finally:
            sender.cancel()
            if client in ms.clients:
                ms.clients.remove(client)
            if ms.commander is client:
                ms.commander = None

    if settings.ui_dir and os.path.isdir(settings.ui_dir):
        app.mount("/", StaticFiles(directory=settings.ui_dir, html=True), name="ui")
    else:
        @app.get("/")
        async def index():
            return {"service": "claw", "spec_version": SPEC_VERSION}

    app.state.settings = settings
    app.state.sessions = sessions
    return app
