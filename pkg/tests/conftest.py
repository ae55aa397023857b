import math

import pytest

from trajkit.model import GeoCoordinate, Pose, Trajectory


def line_poses(n, spacing=1.0, heading=0.0, z=0.0, t0=0.0, dt=1.0):
    """n poses marching east along x at fixed spacing with constant heading."""
    return [
        Pose(
            index=i,
            timestamp=t0 + i * dt,
            position=(i * spacing, 0.0, z),
            orientation=(0.0, 0.0, heading),
        )
        for i in range(n)
    ]


def line_trajectory(n, spacing=1.0, traj_id="line", source_format="kitti", **kwargs):
    return Trajectory(
        id=traj_id, source_format=source_format, poses=line_poses(n, spacing, **kwargs)
    )


def gps_line_poses(n, lat0=51.76, lon0=-1.26, step_north_m=1.0, heading=0.0):
    """n poses walking north, with both gps and matching local positions."""
    origin = GeoCoordinate(lat0, lon0)
    from trajkit.model import EARTH_RADIUS_M, gps_to_local

    poses = []
    for i in range(n):
        lat = lat0 + math.degrees(i * step_north_m / EARTH_RADIUS_M)
        gps = GeoCoordinate(lat, lon0)
        x, y = gps_to_local(gps, origin)
        poses.append(
            Pose(
                index=i,
                timestamp=float(i),
                position=(x, y, 0.0),
                orientation=(0.0, 0.0, heading),
                gps=gps,
            )
        )
    return poses, origin


def gps_line_trajectory(n, traj_id="gps-line", **kwargs):
    poses, origin = gps_line_poses(n, **kwargs)
    return Trajectory(id=traj_id, source_format="csv-ins", poses=poses, origin=origin)


@pytest.fixture
def straight_line_101():
    """101 poses on a line at 1 m spacing."""
    return line_trajectory(101)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One PASS/FAIL line per acceptance criterion."""
    rows = []
    for outcome in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(outcome, []):
            nodeid = getattr(report, "nodeid", "")
            if "test_acceptance.py::test_criterion" in nodeid:
                rows.append((nodeid.split("::")[-1], outcome == "passed"))
    if not rows:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for name, ok in sorted(rows):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}")
