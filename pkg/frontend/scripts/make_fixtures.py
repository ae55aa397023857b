"""Regenerate the viewer test fixtures from the backend's HTTP surface.

Captures trajectory documents and compute-endpoint export bytes so the
TypeScript tests can prove the client mirrors the server bit-for-bit.
Run from the repo root:  python frontend/scripts/make_fixtures.py
"""

import json
import math
import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

from trajkit.server import create_app

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"


def kitti_route_text(n_straight=120, n_turn=90, n_tail=120, step=1.0, turn_step=0.1):
    """A drive with a 90-degree corner, emitted as 3x4 [R|t] rows."""
    lines = []
    x = y = 0.0
    heading = 0.0
    for k in range(n_straight + n_turn + n_tail):
        if n_straight <= k < n_straight + n_turn:
            heading += math.radians(1.0)
            step_k = turn_step
        else:
            step_k = step
        if k > 0:
            x += step_k * math.sin(heading)
            y += step_k * math.cos(heading)
        c, s = math.cos(heading), math.sin(heading)
        lines.append(f"{c!r} {-s!r} 0 {x!r} {s!r} {c!r} 0 {y!r} 0 0 1 0")
    return "\n".join(lines)


def kitti_wiggle_text(n=5000):
    """A long drive with gentle curvature for the performance fixture."""
    lines = []
    x = y = heading = 0.0
    for k in range(n):
        heading += math.radians(0.25) * math.sin(k / 40.0)
        if k > 0:
            x += 1.0 * math.sin(heading)
            y += 1.0 * math.cos(heading)
        c, s = math.cos(heading), math.sin(heading)
        lines.append(f"{c!r} {-s!r} 0 {x!r} {s!r} {c!r} 0 {y!r} 0 0 1 0")
    return "\n".join(lines)


def capture(client, trajectory_id, cases):
    trajectory = client.get(f"/api/trajectories/{trajectory_id}")
    assert trajectory.status_code == 200
    out = {"trajectory": json.loads(trajectory.content), "cases": []}
    for params in cases:
        response = client.post(
            "/api/compute/sample",
            json={"trajectoryId": trajectory_id, "params": params},
        )
        assert response.status_code == 200, response.content
        out["cases"].append(
            {"params": params, "expectedExport": response.content.decode("utf-8")}
        )
    return out


def main():
    FIXTURES.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory() as tmp:
        root = Path(tmp)
        (root / "corner.txt").write_text(kitti_route_text())
        (root / "long.txt").write_text(kitti_wiggle_text())
        client = TestClient(create_app(root=root, settings_dir=root / ".settings"))

        mirror = capture(
            client,
            "corner.txt",
            [
                {"mode": "uniform", "tauD": 12.0, "tauTheta": 15.0},
                {"mode": "adaptive", "tauD": 12.0, "tauTheta": 15.0},
                {"mode": "uniform", "tauD": 5.0, "tauTheta": 15.0},
                {"mode": "adaptive", "tauD": 3.0, "tauTheta": 7.5},
            ],
        )
        (FIXTURES / "sampling_mirror.json").write_text(json.dumps(mirror))

        perf = capture(
            client, "long.txt", [{"mode": "adaptive", "tauD": 12.0, "tauTheta": 15.0}]
        )
        (FIXTURES / "sampling_perf.json").write_text(json.dumps(perf))

    # number-formatting parity: the client's canonical serializer must render
    # every double exactly as the backend does
    from trajkit.wire import canonical_dumps

    probes = [
        0.0, -0.0, 1.0, -1.0, 5.0, 82.5, 0.1, 0.28, 5.04, -3.75,
        1e-4, 1.0001e-4, 9.999e-5, 1e-5, 1.5e-7, 1e-10,
        111.19492664455875, 10007543.398010286, 1e15, 1e16, 1.5e16,
        123456789012345.6, 2**53 - 1.0, 2.0**53, math.pi, -math.pi,
        1 / 3, 2 / 3, 0.30000000000000004,
    ]
    parity = {"values": probes, "expected": [canonical_dumps(v) for v in probes]}
    (FIXTURES / "number_parity.json").write_text(json.dumps(parity))

    print(f"fixtures written to {FIXTURES}")


if __name__ == "__main__":
    main()
