"""Pose correspondences between two traversals of the same street.

For every pose of the query traversal the matcher finds the candidate pose
minimizing alpha * distance + beta* * heading difference, one-to-one, with
candidates beyond 30 m never considered. The result exports as the same
JSON document the HTTP compute endpoint returns.
"""

import json
import math
import random
from pathlib import Path

from trajkit import EARTH_RADIUS_M, GeoCoordinate, MatchParams, Pose, Trajectory
from trajkit import find_correspondences, gps_to_local
from trajkit.wire import canonical_dumps, match_export

out = Path(__file__).parent / "output"
out.mkdir(exist_ok=True)

ORIGIN = GeoCoordinate(53.3813, -6.5934)


def traversal(traj_id, lateral_offset_m, n=120, seed=0):
    """North-bound drive at ~1.5 m per fix, displaced sideways by a lane width."""
    rng = random.Random(seed)
    poses = []
    for i in range(n):
        north = 1.5 * i + rng.uniform(-0.2, 0.2)
        east = lateral_offset_m + rng.uniform(-0.3, 0.3)
        lat = ORIGIN.latitude + math.degrees(north / EARTH_RADIUS_M)
        lon = ORIGIN.longitude + math.degrees(
            east / (EARTH_RADIUS_M * math.cos(math.radians(ORIGIN.latitude)))
        )
        gps = GeoCoordinate(lat, lon)
        x, y = gps_to_local(gps, ORIGIN)
        poses.append(Pose(index=i, timestamp=float(i), position=(x, y, 0.0),
                          orientation=(0.0, 0.0, rng.uniform(-0.05, 0.05)), gps=gps))
    return Trajectory(id=traj_id, source_format="csv-ins", poses=poses, origin=ORIGIN)


winter = traversal("winter-day", lateral_offset_m=0.0, seed=1)
summer = traversal("summer-day", lateral_offset_m=3.5, seed=2)

params = MatchParams(alpha=1.0, beta=1.0, tau_loss=30.0)
pairs = find_correspondences(winter, summer, params)

print(f"{len(pairs)} of {len(winter)} query poses matched one-to-one")
losses = [c.loss for c in pairs]
print(f"loss: min={min(losses):.2f}  median={sorted(losses)[len(losses) // 2]:.2f}  "
      f"max={max(losses):.2f}")

document = match_export(winter.id, summer.id, params, pairs)
target = out / "correspondences.json"
target.write_text(canonical_dumps(document))
print(f"wrote {target} ({len(document['pairs'])} pairs, "
      f"ready for metric-learning pipelines)")
