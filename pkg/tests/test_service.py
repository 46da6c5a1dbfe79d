import json
import time

import pytest
from fastapi.testclient import TestClient

from claw.scenario import default_config
from claw.service import ServiceSettings, create_app

PEG = default_config("peg_in_hole", gripper="claw_free").model_dump(mode="json")
HOLD = default_config("wall_touch", script={"type": "hold"}).model_dump(mode="json")
HELLO = json.dumps({"type": "hello", "spec_version": 1, "role": "leader"})
OBSERVE = json.dumps({"type": "hello", "spec_version": 1, "role": "observer"})


@pytest.fixture()
def client():
    app = create_app(ServiceSettings(no_pacing=True))
    with TestClient(app) as tc:
        yield tc


def wait_terminal(client, session_id, timeout=30.0):
    deadline = time.time() + timeout
    while time.time() < deadline:
        rows = client.get("/api/sessions").json()
        row = next(r for r in rows if r["session_id"] == session_id)
        if row["state"] == "terminal":
            return row
        time.sleep(0.02)
    raise AssertionError("session did not reach terminal state")


def read_until(ws, predicate, limit=5000):
    for _ in range(limit):
        msg = json.loads(ws.receive_text())
        if predicate(msg):
            return msg
    raise AssertionError("expected message never arrived")


class TestRest:
    def test_create_list_delete(self, client):
        r = client.post("/api/sessions", json=PEG)
        assert r.status_code == 201
        desc = r.json()
        assert desc["state"] == "idle"
        assert desc["scenario"]["kind"] == "peg_in_hole"
        listed = client.get("/api/sessions").json()
        assert [d["session_id"] for d in listed] == [desc["session_id"]]
        assert client.delete(f"/api/sessions/{desc['session_id']}").status_code == 204
        assert client.get("/api/sessions").json() == []

    def test_unknown_session(self, client):
        r = client.delete("/api/sessions/nope")
        assert r.status_code == 404
        assert r.json()["error"] == "unknown-session"

    def test_invalid_config_names_field(self, client):
        bad = dict(PEG, geometry={"hole_clearance": -1.0})
        r = client.post("/api/sessions", json=bad)
        assert r.status_code == 422
        body = r.json()
        assert body["error"] == "invalid-config"
        assert any("geometry.hole_clearance" in d["field"] + d["message"]
                   for d in body["detail"])

    def test_capacity_cap(self):
        app = create_app(ServiceSettings(no_pacing=True, max_sessions=2))
        with TestClient(app) as tc:
            assert tc.post("/api/sessions", json=HOLD).status_code == 201
            assert tc.post("/api/sessions", json=HOLD).status_code == 201
            r = tc.post("/api/sessions", json=HOLD)
            assert r.status_code == 409
            assert r.json()["error"] == "capacity-exceeded"

    def test_default_capacity_is_16(self):
        assert ServiceSettings().max_sessions == 16

    def test_time_scale_validation(self):
        with pytest.raises(ValueError):
            ServiceSettings(time_scale=0.0)
        with pytest.raises(ValueError):
            ServiceSettings(time_scale=20.0)
        ServiceSettings(time_scale=0.0, no_pacing=True)  # ignored when headless


class TestStream:
    def test_attach_handshake_and_frames(self, client):
        sid = client.post("/api/sessions", json=HOLD).json()["session_id"]
        with client.websocket_connect(f"/api/sessions/{sid}/stream") as ws:
            hello = json.loads(ws.receive_text())
            assert hello == {"type": "hello", "spec_version": 1, "role": "follower"}
            ws.send_text(OBSERVE)
            frame = read_until(ws, lambda m: m.get("type") == "state")
            assert frame["pose"] == [0.0] * 6
            assert frame["deflection"] == [0.0] * 6
            assert frame["mode"] == "free"
            assert frame["estop"] is False
            assert frame["scenario"]["outcome"] == "running"

    def test_unknown_session_stream(self, client):
        with client.websocket_connect("/api/sessions/ghost/stream") as ws:
            bye = json.loads(ws.receive_text())
            assert bye["type"] == "bye" and bye["reason"] == "unknown-session"

    def test_version_mismatch_closes(self, client):
        sid = client.post("/api/sessions", json=HOLD).json()["session_id"]
        with client.websocket_connect(f"/api/sessions/{sid}/stream") as ws:
            ws.receive_text()
            ws.send_text(json.dumps({"type": "hello", "spec_version": 3, "role": "leader"}))
            bye = json.loads(ws.receive_text())
            assert bye["reason"] == "version-mismatch"

    def test_mode_lever_propagates(self, client):
        sid = client.post("/api/sessions", json=HOLD).json()["session_id"]
        with client.websocket_connect(f"/api/sessions/{sid}/stream") as ws:
            ws.receive_text()
            ws.send_text(HELLO)
            read_until(ws, lambda m: m.get("type") == "state")
            ws.send_text(json.dumps({
                "type": "command", "seq": 1, "t": 0.0,
                "pose": [0.0] * 6, "mode": "full_lock",
            }))
            confirmed = read_until(ws, lambda m: m.get("type") == "state"
                                   and m["mode"] == "full_lock"
                                   and m["carrier_position"] == 1.0)
            assert confirmed["estop"] is False

    def test_commander_conflict(self, client):
        sid = client.post("/api/sessions", json=HOLD).json()["session_id"]
        with client.websocket_connect(f"/api/sessions/{sid}/stream") as ws1:
            ws1.receive_text()
            ws1.send_text(HELLO)
            with client.websocket_connect(f"/api/sessions/{sid}/stream") as ws2:
                ws2.receive_text()
                ws2.send_text(HELLO)
                bye = json.loads(ws2.receive_text())
                assert bye["reason"] == "commander-conflict"

    def test_observer_commands_rejected(self, client):
        sid = client.post("/api/sessions", json=HOLD).json()["session_id"]
        with client.websocket_connect(f"/api/sessions/{sid}/stream") as ws:
            ws.receive_text()
            ws.send_text(OBSERVE)
            ws.send_text(json.dumps({
                "type": "command", "seq": 1, "t": 0.0,
                "pose": [0.0] * 6, "mode": "free",
            }))
            bye = read_until(ws, lambda m: m.get("type") == "bye")
            assert "observer" in bye["reason"]

    def test_stale_seq_dropped_over_wire(self, client):
        sid = client.post("/api/sessions", json=HOLD).json()["session_id"]
        with client.websocket_connect(f"/api/sessions/{sid}/stream") as ws:
            ws.receive_text()
            ws.send_text(HELLO)
            first = read_until(ws, lambda m: m.get("type") == "state")
            ws.send_text(json.dumps({"type": "command", "seq": 5, "t": 0.0,
                                     "pose": [7.0, 0, 0, 0, 0, 0], "mode": "free"}))
            ws.send_text(json.dumps({"type": "command", "seq": 3, "t": 0.0,
                                     "pose": [99.0, 0, 0, 0, 0, 0], "mode": "free"}))
            # Simulated time keeps running while the commands land; watch the
            # pose settle on the fresh command, never on the stale one.
            frame = read_until(ws, lambda m: m.get("type") == "state"
                               and abs(m["pose"][0] - 7.0) < 0.5)
            assert frame["pose"][0] < 20.0

    def test_terminal_session_replays_log_read_only(self, client):
        sid = client.post("/api/sessions", json=PEG).json()["session_id"]
        with client.websocket_connect(f"/api/sessions/{sid}/stream") as ws:
            ws.receive_text()
            ws.send_text(OBSERVE)
            read_until(ws, lambda m: m.get("type") == "state")
        wait_terminal(client, sid)
        with client.websocket_connect(f"/api/sessions/{sid}/stream") as ws:
            ws.receive_text()
            ws.send_text(OBSERVE)
            first = json.loads(ws.receive_text())
            assert first["type"] == "state"
            assert first["scenario"]["outcome"] == "replay"
            seen_t = [first["t"]]
            while True:
                msg = json.loads(ws.receive_text())
                if msg["type"] == "bye":
                    assert msg["reason"] == "replay complete"
                    break
                seen_t.append(msg["t"])
            assert seen_t == sorted(seen_t)

    def test_frame_time_strictly_increases(self, client):
        sid = client.post("/api/sessions", json=PEG).json()["session_id"]
        times = []
        with client.websocket_connect(f"/api/sessions/{sid}/stream") as ws:
            ws.receive_text()
            ws.send_text(OBSERVE)
            for _ in range(40):
                msg = json.loads(ws.receive_text())
                if msg.get("type") == "state":
                    times.append(msg["t"])
        assert len(times) > 5
        assert all(b > a for a, b in zip(times, times[1:]))


class TestIsolationAndContainment:
    def test_neighbor_noise_does_not_perturb_session(self, client):
        # Baseline: a scripted peg session running alone.
        sid_a = client.post("/api/sessions", json=PEG).json()["session_id"]
        with client.websocket_connect(f"/api/sessions/{sid_a}/stream") as ws:
            ws.receive_text()
            ws.send_text(OBSERVE)
            read_until(ws, lambda m: m.get("type") == "state")
        wait_terminal(client, sid_a)
        log_a = client.get(f"/api/sessions/{sid_a}/log").text

        # Same session again, now sharing the server with an adversarial
        # neighbor being spammed with commands and lever flips.
        sid_noise = client.post("/api/sessions", json=HOLD).json()["session_id"]
        sid_b = client.post("/api/sessions", json=PEG).json()["session_id"]
        with client.websocket_connect(f"/api/sessions/{sid_noise}/stream") as noisy:
            noisy.receive_text()
            noisy.send_text(HELLO)
            with client.websocket_connect(f"/api/sessions/{sid_b}/stream") as ws:
                ws.receive_text()
                ws.send_text(OBSERVE)
                for i in range(60):
                    noisy.send_text(json.dumps({
                        "type": "command", "seq": i + 1, "t": 0.0,
                        "pose": [float(i % 9), float(-i % 7), 0, 0, 0, 0],
                        "mode": ["free", "half_lock", "full_lock"][i % 3],
                    }))
                read_until(ws, lambda m: m.get("type") == "state")
        wait_terminal(client, sid_b)
        log_b = client.get(f"/api/sessions/{sid_b}/log").text
        assert log_a == log_b  # byte-identical episode logs

    def test_crashing_session_contained(self, client):
        sid = client.post("/api/sessions", json=HOLD).json()["session_id"]
        ms = client.app.state.sessions[sid]

        def explode():
            raise RuntimeError("synthetic fault")

        ms.sim.step_inner = explode
        with client.websocket_connect(f"/api/sessions/{sid}/stream") as ws:
            ws.receive_text()
            ws.send_text(OBSERVE)
            bye = read_until(ws, lambda m: m.get("type") == "bye")
            assert "session-crashed" in bye["reason"]
        row = wait_terminal(client, sid)
        assert row["state"] == "terminal"
        # The server keeps serving other work.
        assert client.post("/api/sessions", json=PEG).status_code == 201

    def test_terminal_ttl_pruning(self):
        fake_now = [0.0]
        app = create_app(ServiceSettings(no_pacing=True, terminal_ttl_s=10.0,
                                         clock=lambda: fake_now[0]))
        with TestClient(app) as tc:
            sid = tc.post("/api/sessions", json=PEG).json()["session_id"]
            with tc.websocket_connect(f"/api/sessions/{sid}/stream") as ws:
                ws.receive_text()
                ws.send_text(OBSERVE)
                read_until(ws, lambda m: m.get("type") == "state")
            wait_terminal(tc, sid)
            fake_now[0] = 11.0
            assert tc.get("/api/sessions").json() == []

    def test_paced_session_tracks_wall_clock(self):
        # At time scale 1.0, one wall second advances simulated time by about
        # one second (generous bounds absorb scheduler jitter).
        app = create_app(ServiceSettings(time_scale=1.0))
        with TestClient(app) as tc:
            sid = tc.post("/api/sessions", json=HOLD).json()["session_id"]
            with tc.websocket_connect(f"/api/sessions/{sid}/stream") as ws:
                ws.receive_text()
                ws.send_text(OBSERVE)
                first = read_until(ws, lambda m: m.get("type") == "state")
                t_wall0 = time.time()
                last_t = first["t"]
                while time.time() - t_wall0 < 1.0:
                    msg = json.loads(ws.receive_text())
                    if msg.get("type") == "state":
                        last_t = msg["t"]
                elapsed_wall = time.time() - t_wall0
                assert last_t - first["t"] == pytest.approx(elapsed_wall, abs=0.4)

    def test_log_persisted_to_disk(self, tmp_path):
        app = create_app(ServiceSettings(no_pacing=True, log_dir=str(tmp_path)))
        with TestClient(app) as tc:
            sid = tc.post("/api/sessions", json=PEG).json()["session_id"]
            with tc.websocket_connect(f"/api/sessions/{sid}/stream") as ws:
                ws.receive_text()
                ws.send_text(OBSERVE)
                read_until(ws, lambda m: m.get("type") == "state")
            wait_terminal(tc, sid)
            on_disk = (tmp_path / f"{sid}.csv").read_text()
            assert on_disk == tc.get(f"/api/sessions/{sid}/log").text
