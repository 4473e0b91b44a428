"""HTTP transport for live sessions.

Frames are the same JSON envelopes everywhere; this layer only moves them:
clients POST envelopes to /sessions/{sid}/messages and receive the session
stream (snapshots, acks, errors) over a server-sent-event channel at
/sessions/{sid}/events. The engine itself never sees the transport.

Sessions are isolated: each has its own engine, subscriber list, and pacing
task. A session created with paced=false only advances via explicit
POST /sessions/{sid}/ticks, which keeps integration tests deterministic.
"""

from __future__ import annotations

import asyncio
import json
from contextlib import asynccontextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, StreamingResponse

from .errors import ScenarioError
from .protocol import (
    TYPE_HELLO,
    TYPE_JOIN,
    TYPE_SNAPSHOT,
    TYPE_STATE,
    Envelope,
    make_ack,
    make_error,
)
from .runner import run_scenario
from .scenario import parse_scenario
from .session import Session, handle_frame


@dataclass
class SessionHost:
    session: Session
    paced: bool
    subscribers: list[asyncio.Queue] = field(default_factory=list)
    task: Optional[asyncio.Task] = None
    closed: bool = False

    def broadcast(self, env: Envelope) -> dict:
        frame = env.to_dict()
        for queue in list(self.subscribers):
            queue.put_nowait(frame)
        return frame

    def pump(self) -> list[dict]:
        """Advance one tick; ship and return whatever the engine produced."""
        session = self.session
        payload = session.tick()
        frames = [self.broadcast(env) for env in session.drain_outbox()]
        if payload is not None:
            frames.append(
                self.broadcast(
                    Envelope(
                        type=TYPE_STATE,
                        seq=session._next_seq(),
                        sid=session.sid,
                        payload=payload,
                        t=payload["tick"],
                    )
                )
            )
        return frames


class Hub:
    def __init__(self):
        self.hosts: dict[str, SessionHost] = {}
        self._counter = 0

    def create(self, scenario, sid: Optional[str], paced: bool) -> SessionHost:
        if sid is None:
            self._counter += 1
            sid = f"s{self._counter}"
        if sid in self.hosts:
            raise ValueError(f"session {sid!r} already exists")
        host = SessionHost(session=Session(scenario, sid=sid), paced=paced)
        self.hosts[sid] = host
        return host

    def close_all(self) -> None:
        for host in self.hosts.values():
            host.closed = True
            if host.task is not None:
                host.task.cancel()
        self.hosts.clear()


async def _pace(host: SessionHost) -> None:
    dt = host.session.dt
    loop = asyncio.get_running_loop()
    next_at = loop.time()
    while not host.closed and not host.session.frozen:
        try:
            host.pump()
        except Exception:
            for env in host.session.drain_outbox():
                host.broadcast(env)
            break
        next_at += dt
        await asyncio.sleep(max(0.0, next_at - loop.time()))


def build_app(console_dir: Optional[Path] = None) -> FastAPI:
    hub = Hub()

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        yield
        hub.close_all()

    app = FastAPI(title="cobotsim", lifespan=lifespan)
    app.state.hub = hub

    def _not_found(sid: str) -> JSONResponse:
        frame = make_error("server", 0, "unknown_session", f"no session {sid!r}").to_dict()
        return JSONResponse(frame, status_code=404)

    @app.post("/sessions")
    async def create_session(request: Request):
        try:
            body = await request.json()
        except json.JSONDecodeError as exc:
            return JSONResponse(
                make_error("server", 0, "bad_json", str(exc)).to_dict(), status_code=400
            )
        try:
            scenario = parse_scenario(body.get("scenario", {}))
        except ScenarioError as exc:
            return JSONResponse(
                {"error": "invalid_scenario", "findings": [list(f) for f in exc.findings]},
                status_code=400,
            )
        try:
            host = hub.create(scenario, body.get("sid"), bool(body.get("paced", True)))
        except ValueError as exc:
            return JSONResponse({"error": str(exc)}, status_code=409)
        if host.paced:
            host.task = asyncio.get_running_loop().create_task(_pace(host))
        return {"sid": host.session.sid, "tick_hz": scenario.tick_hz}

    @app.post("/sessions/{sid}/messages")
    async def post_message(sid: str, request: Request, client: str = "console"):
        host = hub.hosts.get(sid)
        if host is None:
            return _not_found(sid)
        session = host.session
        raw = await request.body()
        text = raw.decode("utf-8", "replace")
        # handshake frames are transport-level: answered here, never queued
        handshake = _try_handshake(session, text)
        if handshake is not None:
            return {"replies": [env.to_dict() for env in handshake]}
        replies = handle_frame(session, client, text)
        if not host.paced:
            # unpaced sessions still surface acks without a tick running
            replies = replies + session.drain_outbox()
        return {"replies": [env.to_dict() for env in replies]}

    @app.post("/sessions/{sid}/ticks")
    async def post_ticks(sid: str, request: Request):
        host = hub.hosts.get(sid)
        if host is None:
            return _not_found(sid)
        if host.paced:
            return JSONResponse({"error": "session is self-paced"}, status_code=409)
        try:
            body = await request.json()
        except json.JSONDecodeError:
            body = {}
        n = int(body.get("n", 1))
        frames: list[dict] = []
        for _ in range(max(0, n)):
            frames.extend(host.pump())
        return {"tick": host.session.tick_index, "frames": frames}

    @app.get("/sessions/{sid}")
    async def session_status(sid: str):
        host = hub.hosts.get(sid)
        if host is None:
            return _not_found(sid)
        scenario = host.session.scenario
        return {
            "sid": sid,
            "tick": host.session.tick_index,
            "paced": host.paced,
            "frozen": host.session.frozen,
            "tick_hz": host.session.scenario.tick_hz,
            "robot": {
                "link_lengths": list(scenario.robot.link_lengths),
                "probe_radius": scenario.probe_radius,
            },
        }

    @app.get("/sessions/{sid}/events")
    async def events(sid: str, request: Request):
        host = hub.hosts.get(sid)
        if host is None:
            return _not_found(sid)
        queue: asyncio.Queue = asyncio.Queue()
        host.subscribers.append(queue)
        session = host.session
        snapshot = Envelope(
            type=TYPE_SNAPSHOT,
            seq=session._next_seq(),
            sid=session.sid,
            payload=session.snapshot_payload(),
            t=session.tick_index,
        )
        queue.put_nowait(snapshot.to_dict())

        async def stream():
            try:
                while not host.closed:
                    if await request.is_disconnected():
                        break
                    try:
                        frame = await asyncio.wait_for(queue.get(), timeout=1.0)
                    except asyncio.TimeoutError:
                        yield ": keepalive\n\n"
                        continue
                    yield f"data: {json.dumps(frame, allow_nan=False)}\n\n"
            finally:
                if queue in host.subscribers:
                    host.subscribers.remove(queue)

        return StreamingResponse(stream(), media_type="text/event-stream")

    @app.delete("/sessions/{sid}")
    async def close_session(sid: str):
        host = hub.hosts.pop(sid, None)
        if host is None:
            return _not_found(sid)
        host.closed = True
        if host.task is not None:
            host.task.cancel()
        return {"closed": sid}

    @app.post("/runs")
    async def run_headless(request: Request):
        """Execute a whole scenario server-side; serves `run --connect`."""
        try:
            body = await request.json()
        except json.JSONDecodeError as exc:
            return JSONResponse({"error": f"bad json: {exc}"}, status_code=400)
        try:
            scenario = parse_scenario(body.get("scenario", {}))
        except ScenarioError as exc:
            return JSONResponse(
                {"error": "invalid_scenario", "findings": [list(f) for f in exc.findings]},
                status_code=400,
            )
        result = await asyncio.to_thread(run_scenario, scenario)
        return {"report": result.report.to_dict(), "log": result.log_records}

    if console_dir is not None and console_dir.is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/console", StaticFiles(directory=console_dir, html=True), name="console")

    return app


def _try_handshake(session: Session, text: str) -> Optional[list[Envelope]]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError:
        return None  # let handle_frame produce the typed error
    if not isinstance(doc, dict) or doc.get("type") not in (TYPE_HELLO, TYPE_JOIN):
        return None
    seq = doc.get("seq", 0) if isinstance(doc.get("seq"), int) else 0
    if doc.get("type") == TYPE_HELLO:
        return [make_ack(session.sid, session._next_seq(), seq, note="hello")]
    snapshot = Envelope(
        type=TYPE_SNAPSHOT,
        seq=session._next_seq(),
        sid=session.sid,
        payload=session.snapshot_payload(),
        t=session.tick_index,
    )
    return [make_ack(session.sid, session._next_seq(), seq, note="joined"), snapshot]
