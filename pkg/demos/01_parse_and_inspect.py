"""Parse each supported trajectory format into the canonical pose model.

Every parser returns the same Trajectory shape (indexed poses with local
positions, optional GPS, optional orientation), so downstream sampling,
matching and rendering never care where the data came from.
"""

import math
from pathlib import Path

from trajkit import (
    ParserDescriptor,
    parse_bdd_json,
    parse_csv_ins,
    parse_delimited,
    parse_kitti,
    parse_nvm,
)

out = Path(__file__).parent / "output"
out.mkdir(exist_ok=True)


def describe(trajectory):
    p = trajectory.poses[0]
    print(f"  {trajectory.source_format:18s} poses={len(trajectory):4d} "
          f"first position=({p.position[0]:.2f}, {p.position[1]:.2f}, {p.position[2]:.2f}) "
          f"gps={'yes' if p.gps else 'no'}")


# A pose file of row-major 3x4 [R|t] matrices: x marches east 2 m per line.
kitti_text = "\n".join(f"1 0 0 {2 * i} 0 1 0 0 0 0 1 0" for i in range(50))
describe(parse_kitti(kitti_text))

# Fused GPS/INS rows with a header. Local x/y come out in meters east/north
# of the first fix; z is altitude relative to the first fix.
ins_rows = ["timestamp,latitude,longitude,altitude,roll,pitch,yaw"]
for i in range(50):
    ins_rows.append(f"{i * 0.02},{51.75 + i * 1e-5},-1.25,{100 + 0.1 * i},0,0,{0.01 * i}")
describe(parse_csv_ins("\n".join(ins_rows)))

# A bundler reconstruction: cameras (as poses) plus a colored point cloud.
nvm_text = (
    "NVM_V3\n3\n"
    "img/000.jpg 720 1 0 0 0 0 0 0 0 0\n"
    "img/001.jpg 720 0.9961947 0 0 0.0871557 4 0 0 0 0\n"
    "img/002.jpg 720 0.9848078 0 0 0.1736482 8 1 0 0 0\n"
    "3\n"
    "2 0 1 200 40 40 0\n"
    "6 1 1 40 200 40 0\n"
    "9 2 2 40 40 200 0\n"
)
nvm = parse_nvm(nvm_text)
describe(nvm)
print(f"    point cloud: {len(nvm.point_cloud)} points, "
      f"first color {tuple(int(c) for c in nvm.point_cloud.colors[0])}")

# A driving-log info JSON: course is compass degrees, converted to our yaw.
bdd_text = (
    '{"locations": ['
    + ",".join(
        f'{{"latitude": {37.77 + i * 1e-5}, "longitude": -122.41, '
        f'"timestamp": {1000 * i}, "course": 90}}'
        for i in range(30)
    )
    + "]}"
)
bdd = parse_bdd_json(bdd_text)
describe(bdd)
print(f"    course 90 (compass east) -> yaw {bdd.poses[0].orientation[2]:+.4f} rad")

# Anything column-shaped works through one descriptor: here a whitespace log
# of (time, lat, lon) triples, the extension point for custom datasets.
descriptor = ParserDescriptor(
    format_id="delimited-generic",
    column_map={"timestamp": 0, "latitude": 1, "longitude": 2},
)
log_text = "\n".join(f"{i} {51.3 + i * 2e-5} {-0.5}" for i in range(40))
describe(parse_delimited(log_text, descriptor))
