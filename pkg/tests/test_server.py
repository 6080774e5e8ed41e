"""HTTP service: registration, streaming, traces, sessions, durability."""

import http.server
import json
import shutil
import socket
import threading
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
import pytest
from fastapi.testclient import TestClient

from mdstream.server import ServerConfig, StreamService, create_app
from mdstream.server.wire import WIRE_HEADER, decode_frame_payload
from mdstream.traj import open_trajectory

from conftest import make_contact_event_xtc, make_linear_xtc


@pytest.fixture
def config(tmp_path):
    return ServerConfig(data_dir=tmp_path / "data", cache_mb=4, max_session_mb=1)


@pytest.fixture
def service(config):
    return StreamService(config)


@pytest.fixture
def client(config, service):
    app = create_app(config, service=service)
    with TestClient(app, raise_server_exceptions=False) as c:
        yield c


def stage_fixture(config: ServerConfig, src: Path, name: str | None = None) -> str:
    """Copy a trajectory into the data dir (local registration requires it)."""
    incoming = config.data_dir / "incoming"
    incoming.mkdir(parents=True, exist_ok=True)
    dst = incoming / (name or src.name)
    shutil.copyfile(src, dst)
    return str(dst)


def register(client, config, src: Path, name="fixture") -> dict:
    path = stage_fixture(config, src)
    resp = client.post(
        "/api/trajectories",
        json={"url": path, "name": name, "description": "test data", "source": "unit test"},
    )
    assert resp.status_code == 201, resp.text
    return resp.json()


class FixtureHTTPServer:
    """Serves a directory over real HTTP for download tests."""

    def __init__(self, directory: Path):
        handler = lambda *a, **kw: http.server.SimpleHTTPRequestHandler(
            *a, directory=str(directory), **kw
        )
        self.httpd = http.server.ThreadingHTTPServer(("127.0.0.1", 0), handler)
        self.port = self.httpd.server_address[1]
        self.thread = threading.Thread(target=self.httpd.serve_forever, daemon=True)
        self.thread.start()

    def url(self, name: str) -> str:
        return f"http://127.0.0.1:{self.port}/{name}"

    def close(self):
        self.httpd.shutdown()
        self.httpd.server_close()


class TestRegistration:
    def test_local_path_register(self, client, config, data_dir):
        body = register(client, config, data_dir / "golden.xtc")
        assert body["n_frames"] == 8
        assert body["n_atoms"] == 120
        assert body["format"] == "XTC"
        assert len(body["id"]) >= 12
        assert body["name"] == "fixture"

    def test_metadata_echoed_verbatim(self, client, config, data_dir):
        path = stage_fixture(config, data_dir / "golden.xtc")
        resp = client.post(
            "/api/trajectories",
            json={"url": path, "name": "N", "description": "D", "source": "S"},
        )
        meta = client.get(f"/api/traj/{resp.json()['id']}/meta").json()
        assert (meta["name"], meta["description"], meta["source"]) == ("N", "D", "S")

    def test_url_download_register(self, client, config, data_dir):
        server = FixtureHTTPServer(data_dir)
        try:
            resp = client.post(
                "/api/trajectories",
                json={"url": server.url("golden.xtc"), "name": "via-http",
                      "description": "", "source": ""},
            )
            assert resp.status_code == 201
            assert resp.json()["n_frames"] == 8
        finally:
            server.close()

    def test_url_404_no_record(self, client, config, data_dir):
        server = FixtureHTTPServer(data_dir)
        try:
            resp = client.post(
                "/api/trajectories",
                json={"url": server.url("missing.xtc"), "name": "x",
                      "description": "", "source": ""},
            )
            assert resp.status_code == 502
            assert client.get("/api/trajectories").json() == []
            assert list((config.trajectories_dir).iterdir()) == []
        finally:
            server.close()

    def test_reregister_gives_distinct_ids(self, client, config, data_dir):
        a = register(client, config, data_dir / "golden.xtc")
        b = register(client, config, data_dir / "golden.xtc")
        assert a["id"] != b["id"]
        assert len(client.get("/api/trajectories").json()) == 2

    def test_path_outside_data_dir_rejected(self, client, data_dir):
        resp = client.post(
            "/api/trajectories",
            json={"url": str(data_dir / "golden.xtc"), "name": "x",
                  "description": "", "source": ""},
        )
        assert resp.status_code == 502
        assert "outside the data directory" in resp.json()["detail"]

    def test_unknown_format_rejected(self, client, config, tmp_path):
        junk = tmp_path / "junk.bin"
        junk.write_bytes(b"this is not a trajectory" * 10)
        path = stage_fixture(config, junk)
        resp = client.post(
            "/api/trajectories",
            json={"url": path, "name": "x", "description": "", "source": ""},
        )
        assert resp.status_code == 415
        assert list(config.trajectories_dir.iterdir()) == []

    def test_registry_survives_restart(self, config, data_dir):
        svc1 = StreamService(config)
        path = stage_fixture(config, data_dir / "golden.xtc")
        record = svc1.registry.register(path, "n", "d", "s")
        payload1 = svc1.get_frame(record.id, 3)

        svc2 = StreamService(config)
        payload2 = svc2.get_frame(record.id, 3)
        assert payload1 == payload2
        assert svc2.get_meta(record.id)["name"] == "n"


class TestFrames:
    def test_payload_layout_and_size(self, client, config, tmp_path):
        linear = make_linear_xtc(tmp_path / "linear.xtc")
        body = register(client, config, linear)
        resp = client.get(f"/api/traj/{body['id']}/frame/0")
        assert resp.status_code == 200
        assert resp.headers["content-type"] == "application/octet-stream"
        assert resp.headers["X-MDS-Wire"] == "1"
        # 4*(1 time + 9 box + 1 count + 6 coords) bytes for two atoms
        assert len(resp.content) == 68

    def test_payload_matches_direct_parse_bitwise(self, client, config, data_dir):
        body = register(client, config, data_dir / "golden.xtc")
        with open_trajectory(data_dir / "golden.xtc") as reader:
            for i in (0, 3, 7):
                resp = client.get(f"/api/traj/{body['id']}/frame/{i}")
                t, box, coords = decode_frame_payload(resp.content)
                frame = reader.read_frame(i)
                assert np.array_equal(
                    coords.view(np.int32), frame.coords.view(np.int32)
                )
                assert t == np.float32(frame.time_ps)
                assert np.array_equal(box, frame.box)

    def test_atom_subset(self, client, config, data_dir):
        body = register(client, config, data_dir / "golden.xtc")
        full = client.get(f"/api/traj/{body['id']}/frame/2").content
        sub = client.get(f"/api/traj/{body['id']}/frame/2?atoms=0").content
        assert len(sub) == WIRE_HEADER.size + 12
        _, _, full_coords = decode_frame_payload(full)
        _, _, sub_coords = decode_frame_payload(sub)
        assert np.array_equal(sub_coords, full_coords[:1])

        multi = client.get(f"/api/traj/{body['id']}/frame/2?atoms=1,5,7").content
        _, _, multi_coords = decode_frame_payload(multi)
        assert np.array_equal(multi_coords, full_coords[[1, 5, 7]])

    def test_malformed_subset_400(self, client, config, data_dir):
        body = register(client, config, data_dir / "golden.xtc")
        tid = body["id"]
        assert client.get(f"/api/traj/{tid}/frame/0?atoms=x,y").status_code == 400
        assert client.get(f"/api/traj/{tid}/frame/0?atoms=3,1").status_code == 400
        assert client.get(f"/api/traj/{tid}/frame/0?atoms=0,999").status_code == 400

    def test_out_of_range_416(self, client, config, data_dir):
        body = register(client, config, data_dir / "golden.xtc")
        assert client.get(f"/api/traj/{body['id']}/frame/8").status_code == 416

    def test_unknown_id_404(self, client):
        assert client.get("/api/traj/nope/frame/0").status_code == 404
        assert client.get("/api/traj/nope/meta").status_code == 404

    def test_stride(self, client, config, data_dir):
        body = register(client, config, data_dir / "golden.xtc")
        direct = client.get(f"/api/traj/{body['id']}/frame/6").content
        strided = client.get(f"/api/traj/{body['id']}/frame/3?stride=2").content
        assert direct == strided

    def test_concurrent_reads_equal_serial(self, client, config, data_dir):
        body = register(client, config, data_dir / "golden.xtc")
        tid = body["id"]
        serial = {i: client.get(f"/api/traj/{tid}/frame/{i}").content for i in range(8)}
        rng = np.random.default_rng(0)
        picks = rng.integers(0, 8, 64).tolist()

        def fetch(i):
            return i, client.get(f"/api/traj/{tid}/frame/{i}").content

        with ThreadPoolExecutor(max_workers=8) as pool:
            for i, payload in pool.map(fetch, picks):
                assert payload == serial[i]


class TestCacheBound:
    def test_accounting_never_exceeds_capacity(self, config, data_dir, water_dcd):
        svc = StreamService(config)
        path = stage_fixture(config, water_dcd)
        record = svc.registry.register(path, "water", "", "")
        # swap in a tightly budgeted cache that records every size change
        from mdstream.server.cache import FrameCache

        frame_bytes = len(svc.get_frame(record.id, 0))
        capacity = int(frame_bytes * 3.5)
        sizes = []
        svc.cache = FrameCache(capacity, on_size_change=sizes.append)
        rng = np.random.default_rng(1)
        for i in rng.integers(0, record.meta.n_frames, 500).tolist():
            svc.get_frame(record.id, i)
        assert sizes, "cache hook never fired"
        assert max(sizes) <= capacity
        assert svc.cache.stats()["hits"] > 0

    def test_get_after_put_identical(self, service, config, data_dir):
        path = stage_fixture(config, data_dir / "golden.xtc")
        record = service.registry.register(path, "g", "", "")
        first = service.get_frame(record.id, 5)
        second = service.get_frame(record.id, 5)
        assert first == second
        assert service.cache.stats()["hits"] >= 1


class TestTraces:
    def test_distance_trace_matches_direct(self, client, config, tmp_path):
        path, distances = make_contact_event_xtc(tmp_path / "contact_event.xtc")
        body = register(client, config, path)
        resp = client.post(
            f"/api/traj/{body['id']}/trace",
            json={"kind": "distance", "atoms": [0, 1]},
        )
        assert resp.status_code == 200
        assert resp.headers["X-Cache"] == "miss"
        trace = resp.json()
        assert trace["unit"] == "angstrom"
        assert trace["frames"] == list(range(100))
        assert abs(trace["values"][88] - 2.91) < 1e-4
        from mdstream.analysis import MeasurementSpec, time_trace

        with open_trajectory(path) as reader:
            want = time_trace(reader, None, MeasurementSpec("distance", (0, 1)))
        assert trace["values"] == list(want.values)

    def test_trace_cache_hit_marker(self, client, config, tmp_path):
        path, _ = make_contact_event_xtc(tmp_path / "contact_event.xtc")
        body = register(client, config, path)
        spec = {"kind": "distance", "atoms": [0, 1]}
        first = client.post(f"/api/traj/{body['id']}/trace", json=spec)
        second = client.post(f"/api/traj/{body['id']}/trace", json=spec)
        assert second.headers["X-Cache"] == "hit"
        assert first.json() == second.json()

    def test_rmsd_trace_reference_zero(self, client, config, data_dir):
        body = register(client, config, data_dir / "golden.xtc")
        resp = client.post(
            f"/api/traj/{body['id']}/trace",
            json={"kind": "rmsd", "atoms": list(range(120)), "reference_frame": 0},
        )
        values = resp.json()["values"]
        assert values[0] == pytest.approx(0.0, abs=1e-6)
        assert len(values) == 8

    def test_invalid_spec_400(self, client, config, data_dir):
        body = register(client, config, data_dir / "golden.xtc")
        tid = body["id"]
        bad = [
            {"kind": "distance", "atoms": [0]},
            {"kind": "distance", "atoms": [0, 0]},
            {"kind": "distance", "atoms": [0, 99999]},
            {"kind": "sausage", "atoms": [0, 1]},
        ]
        for spec in bad:
            resp = client.post(f"/api/traj/{tid}/trace", json=spec)
            assert resp.status_code == 400, spec
            assert resp.json()["detail"]

    def test_trace_unknown_id_404(self, client):
        resp = client.post("/api/traj/nope/trace", json={"kind": "distance", "atoms": [0, 1]})
        assert resp.status_code == 404


class TestSessions:
    def test_save_get_round_trip(self, client, config, data_dir):
        body = register(client, config, data_dir / "golden.xtc")
        state = json.dumps({"camera": [1, 2, 3], "frame": 5, "unicode": "Ångström"})
        resp = client.post(
            "/api/sessions",
            json={
                "name": "demo",
                "description": "a prepared view",
                "source": "unit test",
                "state": state,
                "trajectories": [body["id"]],
            },
        )
        assert resp.status_code == 201
        sid = resp.json()["id"]
        got = client.get(f"/api/session/{sid}").json()
        assert got["state"] == state
        assert got["name"] == "demo"
        assert got["trajectories"] == [body["id"]]

    def test_unresolvable_trajectory_422(self, client):
        resp = client.post(
            "/api/sessions",
            json={"name": "x", "description": "", "source": "",
                  "state": "{}", "trajectories": ["nope"]},
        )
        assert resp.status_code == 422

    def test_oversized_state_413(self, client):
        resp = client.post(
            "/api/sessions",
            json={"name": "big", "description": "", "source": "",
                  "state": "x" * (2 * 1024 * 1024), "trajectories": []},
        )
        assert resp.status_code == 413

    def test_list_newest_first(self, client):
        for name in ("first", "second", "third"):
            client.post(
                "/api/sessions",
                json={"name": name, "description": "", "source": "",
                      "state": "{}", "trajectories": []},
            )
        names = [s["name"] for s in client.get("/api/sessions").json()]
        assert names == ["third", "second", "first"]
        assert all("state" not in s for s in client.get("/api/sessions").json())

    def test_sessions_survive_restart(self, config):
        svc1 = StreamService(config)
        meta = svc1.save_session("persist", "", "", '{"f": 1}', [])
        svc2 = StreamService(config)
        got = svc2.get_session(meta.id)
        assert got["state"] == '{"f": 1}'

    def test_interrupted_save_leaves_nothing(self, config, monkeypatch):
        svc = StreamService(config)

        import os as os_mod

        real_replace = os_mod.replace
        calls = {"n": 0}

        def failing_replace(src, dst):
            calls["n"] += 1
            if str(dst).endswith(".json"):
                raise OSError("simulated crash before metadata rename")
            return real_replace(src, dst)

        monkeypatch.setattr("mdstream.server.sessions.os.replace", failing_replace)
        with pytest.raises(OSError):
            svc.save_session("doomed", "", "", "{}", [])
        monkeypatch.undo()

        assert svc.list_sessions() == []
        svc2 = StreamService(config)
        assert svc2.list_sessions() == []
        leftovers = [
            p for p in config.sessions_dir.iterdir() if not p.name.startswith(".")
        ]
        assert leftovers == []

    def test_unknown_session_404(self, client):
        assert client.get("/api/session/nope").status_code == 404


class TestTraceSortFilter:
    def test_server_side_filter(self, client, config, tmp_path):
        path, distances = make_contact_event_xtc(tmp_path / "contact_event.xtc")
        body = register(client, config, path)
        resp = client.post(
            f"/api/traj/{body['id']}/trace",
            json={"kind": "distance", "atoms": [0, 1],
                  "filter": {"min": 0.0, "max": 3.0}},
        )
        trace = resp.json()
        assert trace["frames"] == [88]

    def test_server_side_sort(self, client, config, tmp_path):
        path, _ = make_contact_event_xtc(tmp_path / "contact_event.xtc")
        body = register(client, config, path)
        resp = client.post(
            f"/api/traj/{body['id']}/trace",
            json={"kind": "distance", "atoms": [0, 1], "sort": "ascending"},
        )
        trace = resp.json()
        assert trace["values"] == sorted(trace["values"])
        assert trace["frames"][0] == 88
        # the point->frame pairing survives reordering
        byframe = client.post(
            f"/api/traj/{body['id']}/trace", json={"kind": "distance", "atoms": [0, 1]}
        ).json()
        pairs = dict(zip(byframe["frames"], byframe["values"]))
        for f, v in zip(trace["frames"], trace["values"]):
            assert pairs[f] == v

    def test_filter_min_over_max_400(self, client, config, data_dir):
        body = register(client, config, data_dir / "golden.xtc")
        resp = client.post(
            f"/api/traj/{body['id']}/trace",
            json={"kind": "distance", "atoms": [0, 1],
                  "filter": {"min": 5.0, "max": 1.0}},
        )
        assert resp.status_code == 400

    def test_unknown_sort_400(self, client, config, data_dir):
        body = register(client, config, data_dir / "golden.xtc")
        resp = client.post(
            f"/api/traj/{body['id']}/trace",
            json={"kind": "distance", "atoms": [0, 1], "sort": "sideways"},
        )
        assert resp.status_code == 400


class TestHttpPlumbing:
    def test_cors_allow_list(self, config, service, data_dir):
        import dataclasses

        cors_config = dataclasses.replace(
            config, cors_origins=("http://viewer.example",)
        )
        app = create_app(cors_config, service=service)
        with TestClient(app) as c:
            resp = c.get("/api/sessions", headers={"Origin": "http://viewer.example"})
            assert resp.headers.get("access-control-allow-origin") == "http://viewer.example"
            resp = c.get("/api/sessions", headers={"Origin": "http://evil.example"})
            assert "access-control-allow-origin" not in resp.headers

    def test_access_log_line(self, client, caplog):
        import logging

        with caplog.at_level(logging.INFO, logger="mdstream.http"):
            client.get("/api/sessions")
        line = next(r for r in caplog.records if r.name == "mdstream.http")
        message = line.getMessage()
        assert "GET" in message and "/api/sessions" in message and "200" in message
        assert "ms" in message
