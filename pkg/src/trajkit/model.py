"""Canonical pose/trajectory types and the spherical-geometry helpers shared
by every other module.

All types are immutable after construction and all functions here are pure,
so everything is safe to share across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

EARTH_RADIUS_M = 6_371_000.0

_TWO_PI = 2.0 * math.pi

SOURCE_FORMATS = ("kitti", "csv-ins", "nvm", "bdd-json", "delimited-generic")


class EmptyTrajectory(ValueError):
    """Raised when an operation needs at least one pose."""


class MissingHeading(ValueError):
    """Raised when an operation needs yaw but a pose carries no orientation."""


class MissingGps(ValueError):
    """Raised when an operation needs GPS but a pose carries none."""


def normalize_angle(angle: float) -> float:
    """Wrap an angle in radians to [-pi, pi).

    Values already inside the interval are returned bit-identical so that
    repeated normalization is a no-op.
    """
    if -math.pi <= angle < math.pi:
        return angle
    wrapped = math.fmod(angle + math.pi, _TWO_PI)
    if wrapped < 0.0:
        wrapped += _TWO_PI
    return wrapped - math.pi


def _normalize_longitude(lon: float) -> float:
    if -180.0 <= lon < 180.0:
        return lon
    wrapped = math.fmod(lon + 180.0, 360.0)
    if wrapped < 0.0:
        wrapped += 360.0
    return wrapped - 180.0


@dataclass(frozen=True)
class GeoCoordinate:
    """A WGS-style latitude/longitude pair in degrees.

    Latitude must lie in [-90, 90]; longitude is normalized to [-180, 180).
    """

    latitude: float
    longitude: float

    def __post_init__(self):
        if not math.isfinite(self.latitude) or not math.isfinite(self.longitude):
            raise ValueError("coordinates must be finite")
        if not -90.0 <= self.latitude <= 90.0:
            raise ValueError(f"latitude {self.latitude} outside [-90, 90]")
        object.__setattr__(self, "longitude", _normalize_longitude(self.longitude))


@dataclass(frozen=True)
class Pose:
    """One vehicle pose.

    position is (x, y, z) meters in a local east-north-up frame; orientation
    is (roll, pitch, yaw) radians with yaw measured from north,
    counter-clockwise positive, each angle normalized to [-pi, pi).
    orientation is absent when the source format carries no attitude.
    """

    index: int
    timestamp: float
    position: tuple
    orientation: Optional[tuple] = None
    gps: Optional[GeoCoordinate] = None
    altitude: Optional[float] = None
    image_index: Optional[int] = None
    image: Optional[str] = None

    def __post_init__(self):
        if self.index < 0:
            raise ValueError("pose index must be nonnegative")
        if len(self.position) != 3:
            raise ValueError("position must be a 3-vector")
        object.__setattr__(self, "position", tuple(float(v) for v in self.position))
        if self.orientation is not None:
            if len(self.orientation) != 3:
                raise ValueError("orientation must be (roll, pitch, yaw)")
            object.__setattr__(
                self,
                "orientation",
                tuple(normalize_angle(float(a)) for a in self.orientation),
            )
        if self.image_index is not None and self.image_index < 0:
            raise ValueError("image_index must be nonnegative")

    @property
    def yaw(self) -> float:
        """Heading in radians; raises MissingHeading when orientation is absent."""
        if self.orientation is None:
            raise MissingHeading(f"pose {self.index} has no orientation")
        return self.orientation[2]


@dataclass(frozen=True)
class PointCloud:
    """3D points (meters, local frame) with optional per-point RGB in [0, 255]."""

    points: np.ndarray
    colors: Optional[np.ndarray] = None

    def __post_init__(self):
        points = np.asarray(self.points, dtype=np.float64).reshape(-1, 3)
        points.flags.writeable = False
        object.__setattr__(self, "points", points)
        if self.colors is not None:
            colors = np.asarray(self.colors, dtype=np.uint8).reshape(-1, 3)
            if len(colors) != len(points):
                raise ValueError("colors must match points in length")
            colors.flags.writeable = False
            object.__setattr__(self, "colors", colors)

    def __len__(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class Trajectory:
    """An ordered pose sequence with optional image manifest and point cloud.

    Pose indices must be strictly increasing and timestamps nondecreasing.
    origin anchors the local frame at the first GPS fix and must be present
    whenever any pose carries GPS.
    """

    id: str
    source_format: str
    poses: tuple = ()
    image_manifest: tuple = ()
    point_cloud: Optional[PointCloud] = None
    origin: Optional[GeoCoordinate] = None

    def __post_init__(self):
        if self.source_format not in SOURCE_FORMATS:
            raise ValueError(f"unknown source format {self.source_format!r}")
        poses = tuple(self.poses)
        manifest = tuple((float(t), str(p)) for t, p in self.image_manifest)
        object.__setattr__(self, "poses", poses)
        object.__setattr__(self, "image_manifest", manifest)
        for prev, cur in zip(poses, poses[1:]):
            if cur.index <= prev.index:
                raise ValueError("pose indices must be strictly increasing")
            if cur.timestamp < prev.timestamp:
                raise ValueError("pose timestamps must be nondecreasing")
        for pose in poses:
            if pose.image_index is not None and pose.image_index >= len(manifest):
                raise ValueError(
                    f"pose {pose.index} imageIndex {pose.image_index} outside manifest"
                )
            if pose.gps is not None and self.origin is None:
                raise ValueError("trajectory with GPS poses must carry an origin")

    def __len__(self) -> int:
        return len(self.poses)


def haversine_distance(a: GeoCoordinate, b: GeoCoordinate) -> float:
    """Great-circle distance in meters between two coordinates.

    Uses the haversine formula on a sphere of radius 6,371,000 m.
    """
    lat1 = math.radians(a.latitude)
    lat2 = math.radians(b.latitude)
    dlat = lat2 - lat1
    dlon = math.radians(b.longitude - a.longitude)
    h = math.sin(dlat / 2.0) ** 2 + math.cos(lat1) * math.cos(lat2) * math.sin(dlon / 2.0) ** 2
    return 2.0 * EARTH_RADIUS_M * math.asin(min(1.0, math.sqrt(h)))


def heading_difference(a: float, b: float) -> float:
    """Absolute shortest-arc difference between two headings, in [0, pi].

    Computed from |a - b| so the result is exactly symmetric in its arguments.
    """
    d = math.fmod(abs(a - b), _TWO_PI)
    if d > math.pi:
        d = _TWO_PI - d
    return d


def gps_to_local(p: GeoCoordinate, origin: GeoCoordinate) -> tuple:
    """Project a coordinate onto the local tangent plane anchored at origin.

    Equirectangular projection: x is meters east, y is meters north.
    Good to well under 1% against the great-circle distance for points a few
    kilometers from the origin away from the poles.
    """
    dlat = math.radians(p.latitude - origin.latitude)
    dlon = normalize_angle(math.radians(p.longitude - origin.longitude))
    x = EARTH_RADIUS_M * dlon * math.cos(math.radians(origin.latitude))
    y = EARTH_RADIUS_M * dlat
    return (x, y)


def planar_distance(a: Pose, b: Pose) -> float:
    """Euclidean distance in the local xy plane between two poses.

    sqrt(dx*dx + dy*dy) rather than hypot: sqrt is correctly rounded in
    IEEE 754, so web clients mirroring this arithmetic reproduce it
    bit-for-bit (hypot implementations vary by platform).
    """
    dx = b.position[0] - a.position[0]
    dy = b.position[1] - a.position[1]
    return math.sqrt(dx * dx + dy * dy)
