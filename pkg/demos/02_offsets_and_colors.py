"""View math: offset settings, altitude flattening, time-encoded z, and the
percentile-clipped depth colormap.

Datasets disagree about axes and units; OffsetSettings is the per-trajectory
fix-up bundle (swap axes, invert, scale, offset) applied in one documented
order so saved settings are portable.
"""

from trajkit import (
    OffsetSettings,
    Pose,
    Trajectory,
    apply_offsets,
    apply_settings,
    colormap_viridis,
    depth_percentile_threshold,
    encode_time_in_z,
    normalize_depths_for_color,
)

poses = [
    Pose(index=i, timestamp=float(i), position=(float(i), 0.0, 5.0 + 0.1 * i),
         orientation=(0.0, 0.0, 0.0))
    for i in range(100)
]
traj = Trajectory(id="demo", source_format="kitti", poses=poses)

# A dataset with y up instead of z up, recorded at half scale:
fixup = OffsetSettings(swap_position_axes=(1, 2), uniform_scale=2.0)
fixed = apply_offsets(traj, fixup)
print("pose 10 before:", traj.poses[10].position)
print("pose 10 after :", fixed.poses[10].position)

# GPS altitude is noisy; loops that should close often drift in z.
# Either flatten it, or spend z on time so overlapping laps separate:
flat = apply_settings(traj, OffsetSettings(ignore_altitude=True))
spiral = encode_time_in_z(traj, rate=0.25)
print("flattened z  :", {p.position[2] for p in flat.poses})
print("z-time pose 80:", spiral.poses[80].position[2], "(0.25 m per index)")

# Depth coloring: far points are noisy and would eat the whole color range,
# so everything past the 90th percentile saturates.
depths = [float(d) for d in range(1, 101)]
threshold = depth_percentile_threshold(depths, 90)
units = normalize_depths_for_color(depths, 90)
print(f"90th percentile threshold: {threshold}")
for d in (1.0, 45.0, 90.0, 99.0):
    u = units[depths.index(d)]
    print(f"  depth {d:5.1f} -> u={u:4.2f} -> rgb {colormap_viridis(u)}")
