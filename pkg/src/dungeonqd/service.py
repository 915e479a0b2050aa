"""Interactive session service: one live engine per edited room.

Clients open a session, POST commands (SetTarget, LockTiles, SetDimensions,
ApplySuggestion, Restart, Stop) and subscribe to a server-sent-event stream
(ElitesUpdated, TargetEcho, Error, Stats). Commands are applied strictly
between generations in arrival order; the engine never blocks on clients.

The transport is a request/stream HTTP binding of the JSON message schema:
every message carries {session, seq, type, payload}; rooms travel as
{cols, rows, tiles, doors, locked}.
"""
from __future__ import annotations

import json
import queue
import threading
import time
import uuid
from collections import deque
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Any

from .dimensions import DimensionDescriptor
from .engine import Engine, EngineConfig
from .room import Room, RoomError, room_from_json, room_to_json

COMMAND_TYPES = (
    "SetTarget",
    "LockTiles",
    "SetDimensions",
    "ApplySuggestion",
    "Restart",
    "Stop",
)


class CommandError(ValueError):
    def __init__(self, code: str, message: str) -> None:
        super().__init__(message)
        self.code = code


def _parse_dims(payload: Any) -> tuple[DimensionDescriptor, ...]:
    try:
        return tuple(
            DimensionDescriptor(d, 5)
            if isinstance(d, str)
            else DimensionDescriptor(d["kind"], int(d.get("granularity", 5)))
            for d in payload["dims"]
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise CommandError("bad_dimensions", f"invalid dimension list: {exc}") from exc


def apply_command(engine: Engine, ctype: str, payload: dict) -> list[tuple[str, dict]]:
    """Apply one validated command between generations; returns events to emit."""
    if ctype == "SetTarget":
        try:
            room = room_from_json(payload["room"])
        except (KeyError, TypeError, RoomError) as exc:
            raise CommandError("bad_room", f"malformed room: {exc}") from exc
        engine.update_target(room)
        return []
    if ctype == "LockTiles":
        coords = [(int(x), int(y)) for x, y in payload.get("coords", [])]
        engine.lock_tiles(coords)
        return []
    if ctype == "SetDimensions":
        engine.change_dimensions(_parse_dims(payload))
        return []
    if ctype == "ApplySuggestion":
        coords = tuple(int(c) for c in payload.get("cell", ()))
        elite = engine.elite_at(coords)
        if elite is None:
            raise CommandError("empty_cell", f"no feasible elite at {list(coords)}")
        adopted = elite.room.with_locked(engine.target.locked)
        engine.update_target(adopted)
        return [("TargetEcho", {"room": room_to_json(adopted)})]
    if ctype == "Restart":
        engine.restart()
        return []
    if ctype == "Stop":
        return [("Stopped", {})]
    raise CommandError("unknown_command", f"unknown command type {ctype!r}")


@dataclass
class _Subscriber:
    events: "queue.Queue[dict | None]" = field(default_factory=queue.Queue)
    pending_stats: dict | None = None
    lock: threading.Lock = field(default_factory=threading.Lock)

    def push(self, event: dict) -> None:
        # Stats events are coalescable: keep only the newest unsent one.
        if event["type"] == "Stats":
            with self.lock:
                if self.pending_stats is not None and not self.pending_stats["sent"]:
                    self.pending_stats["event"] = event
                    return
                self.pending_stats = {"event": event, "sent": False}
                self.events.put(self.pending_stats)
            return
        self.events.put(event)


class Session:
    """Engine loop plus command/event queues for one edited room."""

    def __init__(self, session_id: str, config: EngineConfig, target: Room) -> None:
        self.id = session_id
        self.config = config
        self.engine = Engine(config, target)
        self.commands: "queue.Queue[dict]" = queue.Queue(maxsize=256)
        self.subscribers: list[_Subscriber] = []
        self.script: list[tuple[int, str, dict]] = []  # (generation, type, payload)
        self._seq = 0
        self._lock = threading.Lock()
        self._stop = threading.Event()
        self._window_started = time.monotonic()
        self.thread = threading.Thread(target=self._run, name=f"engine-{session_id}", daemon=True)

    # -- events -------------------------------------------------------------

    def _emit(self, etype: str, payload: dict) -> dict:
        with self._lock:
            self._seq += 1
            event = {"session": self.id, "seq": self._seq, "type": etype, "payload": payload}
            subscribers = list(self.subscribers)
        for sub in subscribers:
            sub.push(event)
        return event

    def subscribe(self) -> _Subscriber:
        sub = _Subscriber()
        with self._lock:
            self.subscribers.append(sub)
        return sub

    def unsubscribe(self, sub: _Subscriber) -> None:
        with self._lock:
            if sub in self.subscribers:
                self.subscribers.remove(sub)

    # -- engine loop ----------------------------------------------------------

    def _drain_commands(self) -> bool:
        """Apply queued commands in arrival order; returns False on Stop."""
        while True:
            try:
                command = self.commands.get_nowait()
            except queue.Empty:
                return True
            ctype = command["type"]
            payload = command.get("payload", {})
            try:
                events = apply_command(self.engine, ctype, payload)
            except CommandError as exc:
                self._emit(
                    "Error",
                    {"code": exc.code, "message": str(exc), "command_seq": command.get("seq")},
                )
                continue
            except ValueError as exc:
                self._emit(
                    "Error",
                    {"code": "rejected", "message": str(exc), "command_seq": command.get("seq")},
                )
                continue
            self.script.append((self.engine.generation, ctype, payload))
            for etype, epayload in events:
                self._emit(etype, epayload)
            if ctype == "Stop":
                return False

    def _broadcast_events(self) -> None:
        broadcast = self.engine.broadcast()
        self._emit("ElitesUpdated", broadcast.to_json())
        now = time.monotonic()
        elapsed = max(now - self._window_started, 1e-9)
        self._window_started = now
        occupancy = self.engine.archive.occupancy()
        self._emit(
            "Stats",
            {
                "generation": self.engine.generation,
                "gens_per_sec": round(self.config.publish_gen / elapsed, 2),
                "occupied_cells": len(occupancy),
                "stored": sum(nf + ni for nf, ni in occupancy.values()),
            },
        )

    def _run(self) -> None:
        try:
            while not self._stop.is_set():
                if not self._drain_commands():
                    break
                self.engine.step_generation()
                if self.engine.generation % self.config.publish_gen == 0:
                    self._broadcast_events()
        finally:
            self._stop.set()
            with self._lock:
                subscribers = list(self.subscribers)
            for sub in subscribers:
                sub.events.put(None)

    def start(self) -> None:
        self.thread.start()

    def stop(self) -> None:
        self._stop.set()
        try:
            self.commands.put_nowait({"type": "Stop", "payload": {}})
        except queue.Full:
            pass

    @property
    def stopped(self) -> bool:
        return self._stop.is_set()

    def enqueue(self, command: dict) -> None:
        ctype = command.get("type")
        if ctype not in COMMAND_TYPES:
            raise CommandError("unknown_command", f"unknown command type {ctype!r}")
        self.commands.put(command, timeout=5.0)

    def state(self) -> dict:
        return {
            "session": self.id,
            "generation": self.engine.generation,
            "target": room_to_json(self.engine.target),
            "config": self.config.to_dict(),
            "dims": [
                {"kind": d.kind, "granularity": d.granularity}
                for d in self.engine.archive.dims
            ],
            "stopped": self.stopped,
        }


class SessionManager:
    def __init__(self, default_config: EngineConfig, default_target: Room) -> None:
        self.default_config = default_config
        self.default_target = default_target
        self.sessions: dict[str, Session] = {}
        self._lock = threading.Lock()

    def open(self, body: dict) -> Session:
        config = self.default_config
        if body.get("config"):
            config = EngineConfig.from_dict({**self.default_config.to_dict(), **body["config"]})
        target = self.default_target
        if body.get("target"):
            target = room_from_json(body["target"])
        session = Session(uuid.uuid4().hex[:12], config, target)
        with self._lock:
            self.sessions[session.id] = session
        session.start()
        return session

    def get(self, session_id: str) -> Session | None:
        return self.sessions.get(session_id)

    def stop_all(self) -> None:
        for session in list(self.sessions.values()):
            session.stop()


def make_server(
    host: str, port: int, default_config: EngineConfig, default_target: Room
) -> ThreadingHTTPServer:
    manager = SessionManager(default_config, default_target)

    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def log_message(self, *args) -> None:  # quiet server
            pass

        def _json(self, status: int, payload: dict) -> None:
            body = json.dumps(payload).encode()
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(body)))
            self.send_header("Access-Control-Allow-Origin", "*")
            self.end_headers()
            self.wfile.write(body)

        def _read_body(self) -> dict:
            length = int(self.headers.get("Content-Length") or 0)
            raw = self.rfile.read(length) if length else b"{}"
            try:
                data = json.loads(raw or b"{}")
            except json.JSONDecodeError as exc:
                raise CommandError("bad_json", f"request body is not JSON: {exc}") from exc
            if not isinstance(data, dict):
                raise CommandError("bad_json", "request body must be a JSON object")
            return data

        def do_OPTIONS(self) -> None:
            self.send_response(204)
            self.send_header("Access-Control-Allow-Origin", "*")
            self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
            self.send_header("Access-Control-Allow-Headers", "Content-Type")
            self.send_header("Content-Length", "0")
            self.end_headers()

        def do_POST(self) -> None:
            parts = self.path.strip("/").split("/")
            try:
                if parts == ["sessions"]:
                    session = manager.open(self._read_body())
                    self._json(
                        200,
                        {
                            "session": session.id,
                            "seq": 0,
                            "type": "SessionOpened",
                            "payload": session.state(),
                        },
                    )
                    return
                if len(parts) == 3 and parts[0] == "sessions" and parts[2] == "commands":
                    session = manager.get(parts[1])
                    if session is None:
                        self._json(404, {"error": "unknown session"})
                        return
                    command = self._read_body()
                    session.enqueue(command)
                    self._json(200, {"ok": True, "seq": command.get("seq")})
                    return
                self._json(404, {"error": f"unknown path {self.path}"})
            except CommandError as exc:
                self._json(400, {"error": str(exc), "code": exc.code})
            except queue.Full:
                self._json(503, {"error": "command queue full"})

        def do_GET(self) -> None:
            parts = self.path.strip("/").split("/")
            if parts == ["sessions"]:
                self._json(200, {"sessions": sorted(manager.sessions)})
                return
            if len(parts) == 3 and parts[0] == "sessions":
                session = manager.get(parts[1])
                if session is None:
                    self._json(404, {"error": "unknown session"})
                    return
                if parts[2] == "state":
                    self._json(200, session.state())
                    return
                if parts[2] == "events":
                    self._stream_events(session)
                    return
            self._json(404, {"error": f"unknown path {self.path}"})

        def _stream_events(self, session: Session) -> None:
            self.send_response(200)
            self.send_header("Content-Type", "text/event-stream")
            self.send_header("Cache-Control", "no-cache")
            self.send_header("Access-Control-Allow-Origin", "*")
            self.send_header("Connection", "close")
            self.end_headers()
            sub = session.subscribe()
            try:
                while True:
                    try:
                        item = sub.events.get(timeout=2.0)
                    except queue.Empty:
                        self.wfile.write(b": ping\n\n")
                        self.wfile.flush()
                        continue
                    if item is None:
                        break
                    if isinstance(item, dict) and "event" in item:
                        with sub.lock:
                            event = item["event"]
                            item["sent"] = True
                    else:
                        event = item
                    self.wfile.write(b"data: " + json.dumps(event).encode() + b"\n\n")
                    self.wfile.flush()
            except (BrokenPipeError, ConnectionResetError):
                pass
            finally:
                session.unsubscribe(sub)

    server = ThreadingHTTPServer((host, port), Handler)
    server.manager = manager  # type: ignore[attr-defined]
    return server


def serve(host: str, port: int, default_config: EngineConfig, default_target: Room) -> None:
    server = make_server(host, port, default_config, default_target)
    bound = server.server_address[1]
    print(f"session service listening on http://{host}:{bound}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.manager.stop_all()  # type: ignore[attr-defined]
        server.server_close()


def replay_commands(
    config: EngineConfig, target: Room, script: list[tuple[int, str, dict]]
) -> list[dict]:
    """Deterministic replay: apply each scripted command at its recorded
    generation and return the full event stream (Stats excluded)."""
    engine = Engine(config, target)
    events: list[dict] = []
    seq = 0

    def emit(etype: str, payload: dict) -> None:
        nonlocal seq
        seq += 1
        events.append({"seq": seq, "type": etype, "payload": payload})

    pending = deque(script)
    final_gen = max((gen for gen, _, _ in script), default=0)
    horizon = max(final_gen, config.publish_gen)
    while engine.generation < horizon or pending:
        while pending and pending[0][0] <= engine.generation:
            _, ctype, payload = pending.popleft()
            for etype, epayload in apply_command(engine, ctype, payload):
                emit(etype, epayload)
        if engine.generation >= horizon and not pending:
            break
        engine.step_generation()
        if engine.generation % config.publish_gen == 0:
            emit("ElitesUpdated", engine.broadcast().to_json())
    return events
