import json
import os
import struct
import time

import numpy as np
import pytest
from fastapi.testclient import TestClient

from trajkit import wire
from trajkit.analysis import SettingsBundle, bundle_to_dict
from trajkit.matching import MatchParams, find_correspondences
from trajkit.parsers import load_trajectory
from trajkit.sampling import SamplingParams, sample
from trajkit.server import create_app, discover_datasets
from trajkit.transforms import OffsetSettings

KITTI_LINES = "\n".join("1 0 0 %d 0 1 0 0 0 0 1 0" % i for i in range(20))

INS_HEADER = "timestamp,latitude,longitude,altitude,roll,pitch,yaw"


def ins_csv(lat0=51.75, north_steps=40, step_deg=1e-5):
    rows = [INS_HEADER]
    for i in range(north_steps):
        rows.append(f"{i * 0.1},{lat0 + i * step_deg},-1.25,100.0,0,0,0.1")
    return "\n".join(rows)


def raw_asgi_get(app, path):
    """Drive the app with an unnormalized raw path, as a socket client could."""
    import anyio

    async def call():
        messages = []

        async def receive():
            return {"type": "http.request", "body": b"", "more_body": False}

        async def send(message):
            messages.append(message)

        scope = {
            "type": "http",
            "http_version": "1.1",
            "method": "GET",
            "path": path,
            "raw_path": path.encode(),
            "query_string": b"",
            "headers": [],
            "scheme": "http",
            "server": ("testserver", 80),
            "client": ("testclient", 123),
            "root_path": "",
            "app": app,
        }
        await app(scope, receive, send)
        return messages

    messages = anyio.run(call)
    status = next(m["status"] for m in messages if m["type"] == "http.response.start")
    body = b"".join(m.get("body", b"") for m in messages if m["type"] == "http.response.body")
    return status, body


NVM_TEXT = (
    "NVM_V3\n2\n"
    "cam0.jpg 500 1 0 0 0 0 0 0 0 0\n"
    "cam1.jpg 500 1 0 0 0 5 0 0 0 0\n"
    "2\n"
    "1 2 3 255 0 0 0\n"
    "4 5 6 0 255 0 0\n"
)


@pytest.fixture
def dataset_root(tmp_path):
    root = tmp_path / "root"
    root.mkdir()
    (root / "kitti").mkdir()
    (root / "kitti" / "00.txt").write_text(KITTI_LINES)
    (root / "oxford").mkdir()
    (root / "oxford" / "ins.csv").write_text(ins_csv())
    (root / "oxford" / "ins_far.csv").write_text(ins_csv(lat0=51.75 + 90 / 111194.9))
    (root / "seasons").mkdir()
    (root / "seasons" / "model.nvm").write_text(NVM_TEXT)
    (root / "seasons" / "cam0.jpg").write_bytes(b"\xff\xd8\xff\xe0fakejpeg")
    return root


@pytest.fixture
def client(dataset_root, tmp_path):
    app = create_app(root=dataset_root, settings_dir=tmp_path / "settings")
    return TestClient(app)


class TestDatasets:
    def test_empty_root(self, tmp_path):
        empty = tmp_path / "empty"
        empty.mkdir()
        app = create_app(root=empty, settings_dir=tmp_path / "s")
        body = TestClient(app).get("/api/datasets").json()
        assert body == []

    def test_lists_discovered_formats(self, client):
        response = client.get("/api/datasets")
        assert response.status_code == 200
        datasets = {d["id"]: d for d in response.json()}
        assert datasets["kitti/00.txt"]["format"] == "kitti"
        assert datasets["oxford/ins.csv"]["format"] == "csv-ins"
        assert datasets["seasons/model.nvm"]["format"] == "nvm"
        assert all(d["trajectoryCount"] == 1 for d in datasets.values())

    def test_listing_deterministic(self, client):
        first = client.get("/api/datasets").content
        second = client.get("/api/datasets").content
        assert first == second

    def test_unreadable_file_skipped_with_warning(self, dataset_root, tmp_path, monkeypatch, caplog):
        # simulate a permission-masked file (this suite runs as root, where
        # chmod 000 would still be readable)
        import trajkit.server as server_mod

        real_sniff = server_mod.sniff_format

        def flaky_sniff(path, head=None):
            if "oxford" in str(path):
                raise OSError("permission denied")
            return real_sniff(path, head)

        monkeypatch.setattr(server_mod, "sniff_format", flaky_sniff)
        app = create_app(root=dataset_root, settings_dir=tmp_path / "s2")
        with caplog.at_level("WARNING"):
            response = TestClient(app).get("/api/datasets")
        assert response.status_code == 200
        ids = [d["id"] for d in response.json()]
        assert "kitti/00.txt" in ids
        assert not any(i.startswith("oxford/") for i in ids)
        assert any("skipping unreadable" in r.message for r in caplog.records)


class TestTrajectories:
    def test_known_id(self, client):
        body = client.get("/api/trajectories/kitti/00.txt").json()
        assert body["schemaVersion"] == 1
        assert body["sourceFormat"] == "kitti"
        assert len(body["poses"]) == 20
        assert body["origin"] is None

    def test_unknown_id(self, client):
        assert client.get("/api/trajectories/nope.txt").status_code == 404

    def test_parse_failure_payload(self, dataset_root, tmp_path):
        # sniffs as kitti from line 1, then fails to parse at line 2
        (dataset_root / "kitti" / "00.txt").write_text(
            "1 0 0 0 0 1 0 0 0 0 1 0\n1 0 0 0 0 1 0 0 0 0 1"
        )
        app = create_app(root=dataset_root, settings_dir=tmp_path / "s")
        response = TestClient(app).get("/api/trajectories/kitti/00.txt")
        assert response.status_code == 422
        error = response.json()["error"]
        assert error["type"] == "MalformedLine"
        assert error["lineNumber"] == 2

    def test_cache_refreshes_on_mtime_change(self, client, dataset_root):
        first = client.get("/api/trajectories/kitti/00.txt").json()
        assert len(first["poses"]) == 20
        path = dataset_root / "kitti" / "00.txt"
        path.write_text("1 0 0 0 0 1 0 0 0 0 1 0")
        stamp = time.time() + 5
        os.utime(path, (stamp, stamp))
        second = client.get("/api/trajectories/kitti/00.txt").json()
        assert len(second["poses"]) == 1

    def test_point_cloud_url_and_binary(self, client):
        body = client.get("/api/trajectories/seasons/model.nvm").json()
        assert body["pointCloudUrl"] == "/api/pointcloud/seasons/model.nvm"
        raw = client.get("/api/pointcloud/seasons/model.nvm").content
        (count,) = struct.unpack_from("<Q", raw)
        assert count == 2
        floats = np.frombuffer(raw[8:], dtype="<f4").reshape(2, 3)
        assert floats[0].tolist() == [1.0, 2.0, 3.0]

    def test_interpolate_query_matches_library(self, client, dataset_root):
        from trajkit.parsers import interpolate_image_poses

        response = client.get("/api/trajectories/seasons/model.nvm?interpolate=true")
        assert response.status_code == 200
        trajectory = load_trajectory(dataset_root / "seasons" / "model.nvm", "nvm",
                                     traj_id="seasons/model.nvm")
        expected = wire.trajectory_to_dict(
            interpolate_image_poses(trajectory), "/api/pointcloud/seasons/model.nvm"
        )
        assert response.content == wire.canonical_bytes(expected)
        body = response.json()
        assert [p["timestamp"] for p in body["poses"]] == [t for t, _ in body["imageManifest"]]

    def test_offsets_query_applies_settings(self, client, tmp_path):
        bundle = SettingsBundle(
            name="scaled", offset_settings=OffsetSettings(uniform_scale=2.0)
        )
        raw = wire.canonical_bytes(bundle_to_dict(bundle))
        assert client.put("/api/settings/scaled", content=raw).status_code == 200
        plain = client.get("/api/trajectories/kitti/00.txt").json()
        scaled = client.get("/api/trajectories/kitti/00.txt?offsets=scaled").json()
        assert scaled["poses"][5]["position"][0] == 2 * plain["poses"][5]["position"][0]


class TestComputeSample:
    def test_wrapper_equality(self, client, dataset_root):
        params = {"mode": "uniform", "tauD": 1.0, "tauTheta": 15.0}
        response = client.post(
            "/api/compute/sample",
            json={"trajectoryId": "kitti/00.txt", "params": params},
        )
        assert response.status_code == 200
        trajectory = load_trajectory(dataset_root / "kitti" / "00.txt", "kitti",
                                     traj_id="kitti/00.txt")
        result = sample(trajectory.poses, SamplingParams(mode="uniform", tau_d=1.0))
        expected = wire.canonical_bytes(
            wire.sample_export("kitti/00.txt", trajectory, result)
        )
        assert response.content == expected

    def test_invalid_params(self, client):
        response = client.post(
            "/api/compute/sample",
            json={"trajectoryId": "kitti/00.txt", "params": {"mode": "uniform", "tauD": 0}},
        )
        assert response.status_code == 400

    def test_unknown_trajectory(self, client):
        response = client.post(
            "/api/compute/sample",
            json={"trajectoryId": "missing.txt", "params": {"mode": "uniform", "tauD": 5}},
        )
        assert response.status_code == 404

    def test_adaptive_without_heading_is_422(self, dataset_root, tmp_path):
        (dataset_root / "lucia").mkdir()
        (dataset_root / "lucia" / "drive.log").write_text("0 51.75 -1.25\n1 51.7501 -1.25\n")
        (dataset_root / "lucia" / "drive.log.columns.json").write_text(
            json.dumps({"formatId": "delimited-generic",
                        "columnMap": {"timestamp": 0, "latitude": 1, "longitude": 2}})
        )
        app = create_app(root=dataset_root, settings_dir=tmp_path / "s")
        response = TestClient(app).post(
            "/api/compute/sample",
            json={"trajectoryId": "lucia/drive.log",
                  "params": {"mode": "adaptive", "tauD": 5, "tauTheta": 15}},
        )
        assert response.status_code == 422
        assert response.json()["error"]["type"] == "MissingHeading"

    def test_concurrent_identical_requests_identical_bodies(self, client):
        payload = {"trajectoryId": "kitti/00.txt", "params": {"mode": "uniform", "tauD": 2.0}}
        bodies = {client.post("/api/compute/sample", json=payload).content for _ in range(4)}
        assert len(bodies) == 1


class TestComputeMatch:
    def test_identity_matching(self, client, dataset_root):
        response = client.post(
            "/api/compute/match",
            json={"queryId": "oxford/ins.csv", "candidateId": "oxford/ins.csv", "params": {}},
        )
        assert response.status_code == 200
        body = response.json()
        assert len(body["pairs"]) == 40
        assert all(p["loss"] == 0 for p in body["pairs"])
        trajectory = load_trajectory(dataset_root / "oxford" / "ins.csv", "csv-ins",
                                     traj_id="oxford/ins.csv")
        pairs = find_correspondences(trajectory, trajectory, MatchParams())
        expected = wire.canonical_bytes(
            wire.match_export("oxford/ins.csv", "oxford/ins.csv", MatchParams(), pairs)
        )
        assert response.content == expected

    def test_disjoint_trajectories_empty(self, client):
        response = client.post(
            "/api/compute/match",
            json={"queryId": "oxford/ins.csv", "candidateId": "oxford/ins_far.csv",
                  "params": {}},
        )
        assert response.status_code == 200
        assert response.json()["pairs"] == []

    def test_invalid_alpha(self, client):
        response = client.post(
            "/api/compute/match",
            json={"queryId": "oxford/ins.csv", "candidateId": "oxford/ins.csv",
                  "params": {"alpha": -1}},
        )
        assert response.status_code == 400

    def test_match_without_gps_is_422(self, client):
        response = client.post(
            "/api/compute/match",
            json={"queryId": "kitti/00.txt", "candidateId": "kitti/00.txt", "params": {}},
        )
        assert response.status_code == 422
        assert response.json()["error"]["type"] == "MissingGps"


class TestImages:
    def test_serves_file_with_content_type(self, client):
        response = client.get("/api/images/seasons/model.nvm/cam0.jpg")
        assert response.status_code == 200
        assert response.headers["content-type"] == "image/jpeg"
        assert response.content.startswith(b"\xff\xd8")

    def test_traversal_rejected_raw_paths(self, dataset_root, tmp_path):
        # bypass client-side URL normalization: the server itself must 403
        app = create_app(root=dataset_root, settings_dir=tmp_path / "s")
        for evil in (
            "/api/images/seasons/model.nvm/../../../etc/passwd",
            "/api/images/kitti/00.txt/../../etc/passwd",
            "/api/images/seasons/model.nvm/../secret.bin",
            "/api/images/seasons/model.nvm/./cam0.jpg",
            "/api/images/seasons/model.nvm//cam0.jpg",
        ):
            status, body = raw_asgi_get(app, evil)
            assert status == 403, evil
            assert b"passwd" not in body

    def test_traversal_rejected_encoded(self, client):
        # %2e%2e decodes to ".." inside the path parameter
        response = client.get("/api/images/seasons/model.nvm/%2e%2e/secret.bin")
        assert response.status_code == 403

    def test_missing_file(self, client):
        assert client.get("/api/images/seasons/model.nvm/ghost.jpg").status_code == 404

    def test_unmatched_dataset(self, client):
        assert client.get("/api/images/who/knows.jpg").status_code == 404


class TestSettings:
    def test_put_get_byte_identical(self, client):
        bundle = SettingsBundle(name="session1", sampling_params=SamplingParams(tau_d=7.0))
        raw = wire.canonical_bytes(bundle_to_dict(bundle))
        assert client.put("/api/settings/session1", content=raw).status_code == 200
        assert client.get("/api/settings/session1").content == raw

    def test_get_unknown(self, client):
        assert client.get("/api/settings/ghost").status_code == 404

    def test_put_invalid_scale(self, client):
        bundle = bundle_to_dict(SettingsBundle(name="bad"))
        bundle["offsetSettings"]["uniformScale"] = -2.0
        bundle.pop("contentHash")
        response = client.put("/api/settings/bad", content=json.dumps(bundle).encode())
        assert response.status_code == 400

    def test_put_name_mismatch(self, client):
        raw = wire.canonical_bytes(bundle_to_dict(SettingsBundle(name="alpha")))
        assert client.put("/api/settings/beta", content=raw).status_code == 400


class TestDiscovery:
    def test_sidecar_files_not_listed(self, dataset_root):
        (dataset_root / "lucia").mkdir()
        (dataset_root / "lucia" / "drive.log").write_text("0 51.75 -1.25\n")
        (dataset_root / "lucia" / "drive.log.columns.json").write_text(
            json.dumps({"formatId": "delimited-generic",
                        "columnMap": {"timestamp": 0, "latitude": 1, "longitude": 2}})
        )
        ids = [e.id for e in discover_datasets(dataset_root)]
        assert "lucia/drive.log" in ids
        assert not any(i.endswith(".columns.json") for i in ids)
