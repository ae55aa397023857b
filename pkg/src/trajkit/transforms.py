"""Trajectory and point-cloud view math: offset settings, altitude handling,
time-in-z encoding, and the depth colormap helpers.

Everything here is pure: inputs are never mutated, a new trajectory is
returned each time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

from trajkit.model import Pose, Trajectory, normalize_angle
from trajkit._viridis import VIRIDIS_TABLE

GRADIENT_START = (255, 0, 0)
GRADIENT_END = (255, 165, 0)


class EmptyInput(ValueError):
    """Raised when a depth statistic is asked of an empty list."""


@dataclass(frozen=True)
class OffsetSettings:
    """The full per-trajectory view transform bundle.

    Position pipeline order is fixed: swap axes, invert, scale, offset.
    Rotation: swap, invert, add offset per angle. Axis ids are 0/1/2 for
    x/y/z. z_time_rate > 0 replaces altitude with rate * pose index and
    makes ignore_altitude redundant.
    """

    position_offset: tuple = (0.0, 0.0, 0.0)
    rotation_offset: tuple = (0.0, 0.0, 0.0)
    invert_position: tuple = (False, False, False)
    invert_rotation: tuple = (False, False, False)
    swap_position_axes: Optional[tuple] = None
    swap_rotation_axes: Optional[tuple] = None
    uniform_scale: float = 1.0
    ignore_altitude: bool = False
    z_time_rate: float = 0.0

    def __post_init__(self):
        for name in ("position_offset", "rotation_offset"):
            value = tuple(float(v) for v in getattr(self, name))
            if len(value) != 3:
                raise ValueError(f"{name} must be a 3-vector")
            object.__setattr__(self, name, value)
        for name in ("invert_position", "invert_rotation"):
            value = tuple(bool(v) for v in getattr(self, name))
            if len(value) != 3:
                raise ValueError(f"{name} must have 3 flags")
            object.__setattr__(self, name, value)
        for name in ("swap_position_axes", "swap_rotation_axes"):
            pair = getattr(self, name)
            if pair is None:
                continue
            pair = tuple(int(a) for a in pair)
            if len(pair) != 2 or pair[0] == pair[1] or not all(0 <= a <= 2 for a in pair):
                raise ValueError(f"{name} must name two distinct axes in 0..2")
            object.__setattr__(self, name, pair)
        if not self.uniform_scale > 0.0:
            raise ValueError("uniform_scale must be positive")
        if self.z_time_rate < 0.0:
            raise ValueError("z_time_rate must be nonnegative")


def _swap(values: list, pair: Optional[tuple]) -> list:
    if pair is not None:
        i, j = pair
        values[i], values[j] = values[j], values[i]
    return values


def apply_offsets(trajectory: Trajectory, settings: OffsetSettings) -> Trajectory:
    """Apply the swap/invert/scale/offset pipeline to every pose.

    With identity settings the output is field-identical to the input.
    Altitude flattening and z-time encoding are separate steps; see
    apply_settings for the composed form.
    """
    new_poses = []
    for pose in trajectory.poses:
        pos = _swap(list(pose.position), settings.swap_position_axes)
        pos = [-v if inv else v for v, inv in zip(pos, settings.invert_position)]
        pos = [v * settings.uniform_scale for v in pos]
        pos = [v + o for v, o in zip(pos, settings.position_offset)]

        orientation = pose.orientation
        if orientation is not None:
            ang = _swap(list(orientation), settings.swap_rotation_axes)
            ang = [-a if inv else a for a, inv in zip(ang, settings.invert_rotation)]
            ang = [normalize_angle(a + o) for a, o in zip(ang, settings.rotation_offset)]
            orientation = tuple(ang)
        new_poses.append(replace(pose, position=tuple(pos), orientation=orientation))
    return replace(trajectory, poses=tuple(new_poses))


def flatten_altitude(trajectory: Trajectory) -> Trajectory:
    """Zero the z component of every pose, leaving everything else untouched."""
    new_poses = [
        replace(p, position=(p.position[0], p.position[1], 0.0)) for p in trajectory.poses
    ]
    return replace(trajectory, poses=tuple(new_poses))


def encode_time_in_z(trajectory: Trajectory, rate: float) -> Trajectory:
    """Replace altitude with rate * pose index so overlapping loops separate.

    rate 0 degenerates to flatten_altitude. z is nondecreasing along the
    sequence because pose indices are strictly increasing.
    """
    if rate < 0.0:
        raise ValueError("rate must be nonnegative")
    new_poses = [
        replace(p, position=(p.position[0], p.position[1], rate * p.index))
        for p in trajectory.poses
    ]
    return replace(trajectory, poses=tuple(new_poses))


def apply_settings(trajectory: Trajectory, settings: OffsetSettings) -> Trajectory:
    """apply_offsets plus the altitude mode the settings ask for."""
    out = apply_offsets(trajectory, settings)
    if settings.z_time_rate > 0.0:
        return encode_time_in_z(out, settings.z_time_rate)
    if settings.ignore_altitude:
        return flatten_altitude(out)
    return out


def depth_percentile_threshold(depths: Sequence[float], p: float) -> float:
    """Nearest-rank percentile of a depth list.

    Sort ascending and return the element at index ceil(p/100 * n) - 1.
    """
    if len(depths) == 0:
        raise EmptyInput("no depths")
    if not 0.0 < p <= 100.0:
        raise ValueError("percentile must be in (0, 100]")
    ordered = sorted(depths)
    rank = math.ceil(p / 100.0 * len(ordered)) - 1
    return ordered[max(rank, 0)]


def normalize_depths_for_color(depths: Sequence[float], p: float = 90.0) -> list:
    """Map depths to [0, 1] against the p-th percentile threshold.

    Depths at or beyond the threshold saturate at 1; a nonpositive threshold
    maps everything to 0.
    """
    threshold = depth_percentile_threshold(depths, p)
    if threshold <= 0.0:
        return [0.0 for _ in depths]
    return [min(max(d / threshold, 0.0), 1.0) for d in depths]


def colormap_viridis(u: float) -> tuple:
    """Sample the embedded 256-entry viridis table at u in [0, 1].

    u is clamped; between table entries the channels blend linearly.
    """
    u = min(max(u, 0.0), 1.0)
    s = u * 255.0
    i0 = int(s)
    i1 = min(i0 + 1, 255)
    frac = s - i0
    lo, hi = VIRIDIS_TABLE[i0], VIRIDIS_TABLE[i1]
    return tuple(round((1.0 - frac) * lo[k] + frac * hi[k]) for k in range(3))


def gradient_color_for_index(
    i: int, n: int, start: tuple = GRADIENT_START, end: tuple = GRADIENT_END
) -> tuple:
    """Blend from start to end color by i/(n-1); a single pose gets start."""
    if n < 1 or not 0 <= i < n:
        raise ValueError("need 0 <= i < n and n >= 1")
    if n == 1:
        return tuple(start)
    t = i / (n - 1)
    return tuple(round(s + t * (e - s)) for s, e in zip(start, end))
