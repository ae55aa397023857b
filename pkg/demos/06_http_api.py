"""The JSON-over-HTTP surface, exercised in-process.

The same app normally runs via `trajkit serve --root <datasets>`; here it is
driven with a test client so the demo needs no open port. Compute endpoints
return byte-identical documents to the CLI exports.
"""

import json
import struct
import tempfile
from pathlib import Path

import numpy as np
from fastapi.testclient import TestClient

from trajkit import create_app

root = Path(tempfile.mkdtemp(prefix="trajkit-demo-"))
(root / "kitti").mkdir()
(root / "kitti" / "00.txt").write_text(
    "\n".join(f"1 0 0 {i} 0 1 0 0 0 0 1 0" for i in range(60))
)
(root / "seasons").mkdir()
(root / "seasons" / "model.nvm").write_text(
    "NVM_V3\n2\n"
    "cam0.jpg 700 1 0 0 0 0 0 0 0 0\n"
    "cam1.jpg 700 1 0 0 0 3 0 0 0 0\n"
    "2\n1 2 3 255 0 0 0\n4 5 6 0 255 0 0\n"
)

client = TestClient(create_app(root=root, settings_dir=root / ".settings"))

datasets = client.get("/api/datasets").json()
print("datasets:", [(d["id"], d["format"]) for d in datasets])

trajectory = client.get("/api/trajectories/kitti/00.txt").json()
print(f"kitti/00.txt: {len(trajectory['poses'])} poses, "
      f"schema v{trajectory['schemaVersion']}")

sampled = client.post(
    "/api/compute/sample",
    json={"trajectoryId": "kitti/00.txt",
          "params": {"mode": "uniform", "tauD": 10.0, "tauTheta": 15.0}},
).json()
print(f"sampled {len(sampled['selectedIndices'])} of {sampled['totalCandidates']} "
      f"poses at tau_d=10")

cloud = client.get("/api/pointcloud/seasons/model.nvm").content
(count,) = struct.unpack_from("<Q", cloud)
points = np.frombuffer(cloud[8:], dtype="<f4").reshape(count, 3)
print(f"point cloud: {count} points, first {points[0].tolist()}")

# Path traversal is refused at the API boundary.
evil = client.get("/api/images/seasons/model.nvm/%2e%2e/%2e%2e/etc/passwd")
print("traversal attempt ->", evil.status_code)
