import http.client
import json
import threading
import time

import pytest

from dungeonqd.dimensions import DimensionDescriptor
from dungeonqd.engine import EngineConfig
from dungeonqd.presets import basic_room
from dungeonqd.room import room_to_json
from dungeonqd.service import make_server, replay_commands

CONFIG = EngineConfig(
    pop_size=60,
    publish_gen=10,
    rng_seed=9,
    dims=(DimensionDescriptor("nsp"), DimensionDescriptor("symmetry")),
)


@pytest.fixture
def server():
    srv = make_server("127.0.0.1", 0, CONFIG, basic_room())
    thread = threading.Thread(target=srv.serve_forever, daemon=True)
    thread.start()
    yield srv
    srv.manager.stop_all()
    srv.shutdown()
    srv.server_close()


def post(srv, path, body):
    conn = http.client.HTTPConnection("127.0.0.1", srv.server_address[1], timeout=10)
    conn.request("POST", path, json.dumps(body), {"Content-Type": "application/json"})
    resp = conn.getresponse()
    data = json.loads(resp.read())
    conn.close()
    return resp.status, data


def get(srv, path):
    conn = http.client.HTTPConnection("127.0.0.1", srv.server_address[1], timeout=10)
    conn.request("GET", path)
    resp = conn.getresponse()
    data = json.loads(resp.read())
    conn.close()
    return resp.status, data


class EventReader:
    """Background SSE consumer collecting decoded events."""

    def __init__(self, srv, session_id):
        self.conn = http.client.HTTPConnection(
            "127.0.0.1", srv.server_address[1], timeout=30
        )
        self.conn.request("GET", f"/sessions/{session_id}/events")
        self.resp = self.conn.getresponse()
        self.events = []
        self.lock = threading.Lock()
        self.thread = threading.Thread(target=self._read, daemon=True)
        self.thread.start()

    def _read(self):
        try:
            while True:
                line = self.resp.fp.readline()
                if not line:
                    return
                if line.startswith(b"data: "):
                    event = json.loads(line[6:])
                    with self.lock:
                        self.events.append(event)
        except (OSError, ValueError):
            return

    def wait_for(self, predicate, timeout=30.0):
        deadline = time.monotonic() + timeout
        while time.monotonic() < deadline:
            with self.lock:
                for event in self.events:
                    if predicate(event):
                        return event
            time.sleep(0.02)
        raise AssertionError("timed out waiting for event")

    def snapshot(self):
        with self.lock:
            return list(self.events)

    def close(self):
        self.conn.close()


def open_session(srv, body=None):
    status, data = post(srv, "/sessions", body or {})
    assert status == 200
    assert data["type"] == "SessionOpened"
    return data["session"]


def command(srv, session_id, ctype, payload=None, seq=1):
    return post(
        srv,
        f"/sessions/{session_id}/commands",
        {"session": session_id, "seq": seq, "type": ctype, "payload": payload or {}},
    )


class TestProtocol:
    def test_open_and_state(self, server):
        session_id = open_session(server)
        status, state = get(server, f"/sessions/{session_id}/state")
        assert status == 200
        assert state["config"]["publishGen"] == 10
        assert state["target"]["cols"] == 13

    def test_unknown_session(self, server):
        status, data = get(server, "/sessions/nope/state")
        assert status == 404

    def test_elites_keep_arriving_while_idle(self, server):
        session_id = open_session(server)
        reader = EventReader(server, session_id)
        first = reader.wait_for(lambda e: e["type"] == "ElitesUpdated")
        second = reader.wait_for(
            lambda e: e["type"] == "ElitesUpdated"
            and e["payload"]["generation"] > first["payload"]["generation"]
        )
        assert second["payload"]["generation"] % 10 == 0
        assert any(e["type"] == "Stats" for e in reader.snapshot())
        reader.close()

    def test_set_target_reflected_in_state_and_search(self, server):
        session_id = open_session(server)
        reader = EventReader(server, session_id)
        room = basic_room()
        tiles = bytearray(room.tiles)
        tiles[room.index(6, 3)] = 1  # drop a wall mid-room
        edited = room.with_tiles(bytes(tiles))
        status, _ = command(server, session_id, "SetTarget", {"room": room_to_json(edited)})
        assert status == 200
        deadline = time.monotonic() + 20
        while time.monotonic() < deadline:
            _, state = get(server, f"/sessions/{session_id}/state")
            if state["target"]["tiles"] == room_to_json(edited)["tiles"]:
                break
            time.sleep(0.05)
        else:
            raise AssertionError("target never updated")
        reader.wait_for(lambda e: e["type"] == "ElitesUpdated")
        reader.close()

    def test_set_dimensions_changes_cell_geometry(self, server):
        session_id = open_session(server)
        reader = EventReader(server, session_id)
        reader.wait_for(lambda e: e["type"] == "ElitesUpdated")
        status, _ = command(
            server, session_id, "SetDimensions",
            {"dims": [{"kind": "nmp", "granularity": 3}, {"kind": "leniency", "granularity": 3}]},
        )
        assert status == 200
        updated = reader.wait_for(
            lambda e: e["type"] == "ElitesUpdated"
            and [d["kind"] for d in e["payload"]["dims"]] == ["nmp", "leniency"]
        )
        assert all(d["granularity"] == 3 for d in updated["payload"]["dims"])
        assert all(len(c["coords"]) == 2 for c in updated["payload"]["cells"])
        reader.close()

    def test_apply_suggestion_round_trip(self, server):
        session_id = open_session(server)
        reader = EventReader(server, session_id)
        broadcast = reader.wait_for(
            lambda e: e["type"] == "ElitesUpdated" and any(
                c["elite"] for c in e["payload"]["cells"]
            )
        )
        cell = next(c for c in broadcast["payload"]["cells"] if c["elite"])
        status, _ = command(server, session_id, "ApplySuggestion", {"cell": cell["coords"]})
        assert status == 200
        echo = reader.wait_for(lambda e: e["type"] == "TargetEcho")
        _, state = get(server, f"/sessions/{session_id}/state")
        assert state["target"]["tiles"] == echo["payload"]["room"]["tiles"]
        reader.close()

    def test_apply_suggestion_empty_cell_errors(self, server):
        session_id = open_session(server)
        reader = EventReader(server, session_id)
        status, _ = command(server, session_id, "ApplySuggestion", {"cell": [4, 4, 4]})
        assert status == 200  # accepted; rejection arrives as an event
        error = reader.wait_for(lambda e: e["type"] == "Error")
        assert error["payload"]["code"] in ("empty_cell", "rejected")
        reader.close()

    def test_malformed_room_is_isolated(self, server):
        session_id = open_session(server)
        reader = EventReader(server, session_id)
        status, _ = command(
            server, session_id, "SetTarget", {"room": {"cols": 3, "rows": 3, "tiles": ["xxx"]}}
        )
        assert status == 200
        error = reader.wait_for(lambda e: e["type"] == "Error")
        assert error["payload"]["code"] == "bad_room"
        # engine survives: broadcasts continue
        gen = error["seq"]
        reader.wait_for(lambda e: e["type"] == "ElitesUpdated" and e["seq"] > gen)
        reader.close()

    def test_unknown_command_rejected_at_http_layer(self, server):
        session_id = open_session(server)
        status, data = command(server, session_id, "Nonsense")
        assert status == 400

    def test_lock_tiles_command(self, server):
        session_id = open_session(server)
        status, _ = command(server, session_id, "LockTiles", {"coords": [[4, 2], [5, 2]]})
        assert status == 200
        deadline = time.monotonic() + 20
        while time.monotonic() < deadline:
            _, state = get(server, f"/sessions/{session_id}/state")
            if state["target"]["locked"] == [[4, 2], [5, 2]]:
                break
            time.sleep(0.05)
        else:
            raise AssertionError("locks never applied")

    def test_stop_ends_stream(self, server):
        session_id = open_session(server)
        reader = EventReader(server, session_id)
        reader.wait_for(lambda e: e["type"] == "ElitesUpdated")
        command(server, session_id, "Stop")
        reader.thread.join(timeout=20)
        assert not reader.thread.is_alive()
        reader.close()


class TestRecordReplay:
    def test_replay_is_deterministic_and_matches_live(self, server):
        session_id = open_session(server)
        reader = EventReader(server, session_id)
        broadcast = reader.wait_for(
            lambda e: e["type"] == "ElitesUpdated" and any(
                c["elite"] for c in e["payload"]["cells"]
            )
        )
        cell = next(c for c in broadcast["payload"]["cells"] if c["elite"])
        command(server, session_id, "ApplySuggestion", {"cell": cell["coords"]})
        reader.wait_for(lambda e: e["type"] == "TargetEcho")
        reader.wait_for(
            lambda e: e["type"] == "ElitesUpdated"
            and e["payload"]["generation"] > broadcast["payload"]["generation"] + 10
        )
        command(server, session_id, "Stop")
        reader.thread.join(timeout=20)

        session = server.manager.get(session_id)
        script = list(session.script)
        live = [
            (e["type"], json.dumps(e["payload"], sort_keys=True))
            for e in reader.snapshot()
            if e["type"] in ("ElitesUpdated", "TargetEcho")
        ]
        replay_a = replay_commands(CONFIG, basic_room(), script)
        replay_b = replay_commands(CONFIG, basic_room(), script)
        assert replay_a == replay_b
        replayed = [
            (e["type"], json.dumps(e["payload"], sort_keys=True))
            for e in replay_a
            if e["type"] in ("ElitesUpdated", "TargetEcho")
        ]
        assert replayed[: len(live)] == live
        reader.close()
