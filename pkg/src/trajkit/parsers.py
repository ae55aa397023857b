"""Parsers that turn each supported on-disk format into a canonical
Trajectory, plus image-pose interpolation for datasets whose camera runs at
a lower rate than the INS.

Every parser is a pure function of its input text. Adding a dataset that one
of the generic parsers cannot handle means adding one new parser function
here; column-mapped delimited files need only a ParserDescriptor.
"""

from __future__ import annotations

import json
import math
from bisect import bisect_left
from dataclasses import dataclass, field, replace
from io import StringIO
from pathlib import Path
from typing import Iterable, Optional, Sequence, TextIO, Union

import numpy as np

from trajkit.model import (
    GeoCoordinate,
    PointCloud,
    Pose,
    Trajectory,
    gps_to_local,
    normalize_angle,
)

PARSER_VERSION = 1

# Canonical fields a column map may address.
CANONICAL_FIELDS = (
    "timestamp",
    "latitude",
    "longitude",
    "altitude",
    "roll",
    "pitch",
    "yaw",
    "x",
    "y",
    "z",
)

_INS_REQUIRED = ("timestamp", "latitude", "longitude", "altitude", "roll", "pitch", "yaw")

_GIMBAL_EPS = 1e-6


class ParseError(ValueError):
    """Base class for all trajectory parsing failures."""

    line_number: Optional[int] = None


class MalformedLine(ParseError):
    def __init__(self, line_number: int, reason: str = ""):
        super().__init__(f"malformed line {line_number}" + (f": {reason}" if reason else ""))
        self.line_number = line_number


class NonOrthonormalRotation(ParseError):
    def __init__(self, line_number: int):
        super().__init__(f"rotation block on line {line_number} is not orthonormal")
        self.line_number = line_number


class BadHeader(ParseError):
    pass


class TruncatedFile(ParseError):
    def __init__(self, expected: int, found: int):
        super().__init__(f"expected {expected} records, found {found}")
        self.expected = expected
        self.found = found


class MalformedCamera(ParseError):
    def __init__(self, line_number: int):
        super().__init__(f"malformed camera on line {line_number}")
        self.line_number = line_number


class MalformedPoint(ParseError):
    def __init__(self, line_number: int):
        super().__init__(f"malformed point on line {line_number}")
        self.line_number = line_number


class EmptyFile(ParseError):
    pass


class MissingColumn(ParseError):
    def __init__(self, name: str):
        super().__init__(f"missing column {name!r}")
        self.name = name


class NotJson(ParseError):
    pass


class MissingField(ParseError):
    def __init__(self, record_index: int, field_name: str):
        super().__init__(f"record {record_index} missing field {field_name!r}")
        self.record_index = record_index
        self.field_name = field_name


class EmptyLocations(ParseError):
    pass


class NoOverlap(ParseError):
    """No image timestamp falls inside the pose time range."""


@dataclass(frozen=True)
class ParserDescriptor:
    """How to read one dataset family.

    column_map assigns canonical field names to column indices (delimited
    files) or header names (CSV with a header row). It is required for
    delimited-generic and must cover timestamp plus either latitude/longitude
    or x/y.
    """

    format_id: str
    file_globs: tuple = ()
    column_map: Optional[dict] = None
    angle_unit: str = "radians"
    timestamp_unit: str = "seconds"
    delimiter: Optional[str] = None

    def __post_init__(self):
        if self.angle_unit not in ("degrees", "radians"):
            raise ValueError(f"unknown angle unit {self.angle_unit!r}")
        if self.timestamp_unit not in ("seconds", "milliseconds", "microseconds"):
            raise ValueError(f"unknown timestamp unit {self.timestamp_unit!r}")
        if self.column_map is not None:
            unknown = set(self.column_map) - set(CANONICAL_FIELDS)
            if unknown:
                raise ValueError(f"unknown canonical fields {sorted(unknown)}")
        if self.format_id == "delimited-generic":
            _check_minimum_columns(self.column_map)

    def to_dict(self) -> dict:
        return {
            "formatId": self.format_id,
            "fileGlobs": list(self.file_globs),
            "columnMap": dict(self.column_map) if self.column_map is not None else None,
            "angleUnit": self.angle_unit,
            "timestampUnit": self.timestamp_unit,
            "delimiter": self.delimiter,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ParserDescriptor":
        return cls(
            format_id=data.get("formatId", "delimited-generic"),
            file_globs=tuple(data.get("fileGlobs", ())),
            column_map=data.get("columnMap"),
            angle_unit=data.get("angleUnit", "radians"),
            timestamp_unit=data.get("timestampUnit", "seconds"),
            delimiter=data.get("delimiter"),
        )


def _check_minimum_columns(column_map: Optional[dict]) -> None:
    if not column_map:
        raise MissingColumn("timestamp")
    if "timestamp" not in column_map:
        raise MissingColumn("timestamp")
    has_gps = "latitude" in column_map or "longitude" in column_map
    has_xy = "x" in column_map or "y" in column_map
    if "latitude" in column_map and "longitude" in column_map:
        return
    if "x" in column_map and "y" in column_map:
        return
    if has_gps:
        raise MissingColumn("latitude" if "latitude" not in column_map else "longitude")
    if has_xy:
        raise MissingColumn("x" if "x" not in column_map else "y")
    raise MissingColumn("latitude")


def _as_text(source: Union[str, TextIO]) -> str:
    if hasattr(source, "read"):
        return source.read()
    return source


def _to_seconds(value: float, unit: str) -> float:
    if unit == "milliseconds":
        return value / 1e3
    if unit == "microseconds":
        return value / 1e6
    return value


def _to_radians(value: float, unit: str) -> float:
    return math.radians(value) if unit == "degrees" else value


def _euler_zyx(r) -> tuple:
    """(roll, pitch, yaw) from a rotation matrix, yaw-pitch-roll (ZYX) order.

    Near gimbal lock (|pitch| within 1e-6 of pi/2) roll is fixed at 0 and the
    remaining freedom folds into yaw.
    """
    sin_pitch = min(1.0, max(-1.0, -float(r[2][0])))
    pitch = math.asin(sin_pitch)
    if math.pi / 2 - abs(pitch) < _GIMBAL_EPS:
        roll = 0.0
        yaw = math.atan2(-float(r[0][1]), float(r[1][1]))
    else:
        roll = math.atan2(float(r[2][1]), float(r[2][2]))
        yaw = math.atan2(float(r[1][0]), float(r[0][0]))
    return (roll, pitch, yaw)


def _quaternion_matrix(w: float, x: float, y: float, z: float):
    n = math.sqrt(w * w + x * x + y * y + z * z)
    if n < 1e-12:
        raise ValueError("zero quaternion")
    w, x, y, z = w / n, x / n, y / n, z / n
    return (
        (1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)),
        (2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)),
        (2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)),
    )


def parse_kitti(text: Union[str, TextIO], traj_id: str = "kitti") -> Trajectory:
    """Parse odometry text where each line is a row-major 3x4 pose matrix.

    The format carries no timestamps, so timestamp = line sequence index.
    Rotation blocks must be orthonormal to 1e-3 per entry.
    """
    poses = []
    for line_number, raw in enumerate(_as_text(text).splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        tokens = line.split()
        if len(tokens) != 12:
            raise MalformedLine(line_number, f"expected 12 values, got {len(tokens)}")
        try:
            m = [float(t) for t in tokens]
        except ValueError:
            raise MalformedLine(line_number, "non-numeric value") from None
        if not all(math.isfinite(v) for v in m):
            raise MalformedLine(line_number, "non-finite value")
        r = ((m[0], m[1], m[2]), (m[4], m[5], m[6]), (m[8], m[9], m[10]))
        if _orthonormality_defect(r) > 1e-3:
            raise NonOrthonormalRotation(line_number)
        i = len(poses)
        poses.append(
            Pose(
                index=i,
                timestamp=float(i),
                position=(m[3], m[7], m[11]),
                orientation=_euler_zyx(r),
            )
        )
    if not poses:
        raise EmptyFile("no pose lines")
    return Trajectory(id=traj_id, source_format="kitti", poses=poses)


def _orthonormality_defect(r) -> float:
    worst = 0.0
    for i in range(3):
        for j in range(3):
            dot = sum(r[i][k] * r[j][k] for k in range(3))
            expect = 1.0 if i == j else 0.0
            worst = max(worst, abs(dot - expect))
    return worst


DEFAULT_INS_DESCRIPTOR = ParserDescriptor(
    format_id="csv-ins",
    file_globs=("*.csv",),
    column_map={name: name for name in _INS_REQUIRED},
    angle_unit="radians",
    timestamp_unit="seconds",
    delimiter=",",
)


def parse_csv_ins(
    text: Union[str, TextIO],
    descriptor: Optional[ParserDescriptor] = None,
    traj_id: str = "csv-ins",
) -> Trajectory:
    """Parse a headered CSV of fused GPS/INS rows into a trajectory.

    The descriptor's column map resolves canonical fields to header names
    (or column indices); timestamp, latitude, longitude, altitude, roll,
    pitch and yaw are all required. Local positions are east/north meters
    from the first fix, z is altitude relative to the first fix.
    """
    descriptor = descriptor or DEFAULT_INS_DESCRIPTOR
    column_map = descriptor.column_map or DEFAULT_INS_DESCRIPTOR.column_map
    delimiter = descriptor.delimiter or ","

    lines = _as_text(text).splitlines()
    stripped = [(n, line) for n, line in enumerate(lines, start=1) if line.strip()]
    if not stripped:
        raise EmptyFile("no rows")

    header_no, header_line = stripped[0]
    header = [h.strip() for h in header_line.split(delimiter)]
    columns = {}
    for name in _INS_REQUIRED:
        ref = column_map.get(name, name)
        if isinstance(ref, int):
            if ref >= len(header):
                raise MissingColumn(name)
            columns[name] = ref
        else:
            if ref not in header:
                raise MissingColumn(name)
            columns[name] = header.index(ref)

    rows = stripped[1:]
    if not rows:
        raise EmptyFile("header only")

    poses = []
    origin = None
    alt0 = 0.0
    for line_number, line in rows:
        cells = [c.strip() for c in line.split(delimiter)]
        if len(cells) <= max(columns.values()):
            raise MalformedLine(line_number, "too few columns")
        try:
            values = {name: float(cells[idx]) for name, idx in columns.items()}
        except ValueError:
            raise MalformedLine(line_number, "non-numeric value") from None
        gps = GeoCoordinate(values["latitude"], values["longitude"])
        if origin is None:
            origin = gps
            alt0 = values["altitude"]
        x, y = gps_to_local(gps, origin)
        i = len(poses)
        poses.append(
            Pose(
                index=i,
                timestamp=_to_seconds(values["timestamp"], descriptor.timestamp_unit),
                position=(x, y, values["altitude"] - alt0),
                orientation=tuple(
                    _to_radians(values[a], descriptor.angle_unit)
                    for a in ("roll", "pitch", "yaw")
                ),
                gps=gps,
                altitude=values["altitude"],
            )
        )
    return Trajectory(id=traj_id, source_format="csv-ins", poses=poses, origin=origin)


def parse_nvm(text: Union[str, TextIO], traj_id: str = "nvm") -> Trajectory:
    """Parse an NVM_V3 bundler file: one pose per camera plus the point cloud.

    Camera lines are: image path, focal, quaternion w x y z, center x y z,
    radial distortion, 0. The format carries no timestamps, so
    timestamp = camera sequence index.
    """
    numbered = [
        (n, line.strip())
        for n, line in enumerate(_as_text(text).splitlines(), start=1)
        if line.strip()
    ]
    cursor = 0

    def next_line():
        nonlocal cursor
        if cursor >= len(numbered):
            return None
        item = numbered[cursor]
        cursor += 1
        return item

    head = next_line()
    if head is None or not head[1].startswith("NVM_V3"):
        raise BadHeader("missing NVM_V3 header")

    count_item = next_line()
    if count_item is None:
        raise BadHeader("missing camera count")
    try:
        camera_count = int(count_item[1].split()[0])
    except ValueError:
        raise BadHeader("camera count is not an integer") from None
    if camera_count == 0:
        raise EmptyFile("no cameras")

    poses = []
    manifest = []
    for i in range(camera_count):
        item = next_line()
        if item is None:
            raise TruncatedFile(expected=camera_count, found=i)
        line_number, line = item
        tokens = line.split()
        if len(tokens) < 11:
            raise MalformedCamera(line_number)
        image_path = " ".join(tokens[: len(tokens) - 10])
        try:
            numbers = [float(t) for t in tokens[-10:]]
        except ValueError:
            raise MalformedCamera(line_number) from None
        _focal, qw, qx, qy, qz, cx, cy, cz, _dist, _zero = numbers
        try:
            rotation = _quaternion_matrix(qw, qx, qy, qz)
        except ValueError:
            raise MalformedCamera(line_number) from None
        manifest.append((float(i), image_path))
        poses.append(
            Pose(
                index=i,
                timestamp=float(i),
                position=(cx, cy, cz),
                orientation=_euler_zyx(rotation),
                image_index=i,
                image=image_path,
            )
        )

    cloud = None
    count_item = next_line()
    if count_item is not None:
        line_number, line = count_item
        try:
            point_count = int(line.split()[0])
        except ValueError:
            raise MalformedPoint(line_number) from None
        points = np.zeros((point_count, 3), dtype=np.float64)
        colors = np.zeros((point_count, 3), dtype=np.uint8)
        for j in range(point_count):
            item = next_line()
            if item is None:
                raise TruncatedFile(expected=point_count, found=j)
            line_number, line = item
            tokens = line.split()
            if len(tokens) < 7:
                raise MalformedPoint(line_number)
            try:
                xyz = [float(t) for t in tokens[:3]]
                rgb = [int(float(t)) for t in tokens[3:6]]
                n_meas = int(float(tokens[6]))
            except ValueError:
                raise MalformedPoint(line_number) from None
            if n_meas < 0 or len(tokens) != 7 + 4 * n_meas:
                raise MalformedPoint(line_number)
            if not all(0 <= c <= 255 for c in rgb):
                raise MalformedPoint(line_number)
            points[j] = xyz
            colors[j] = rgb
        cloud = PointCloud(points=points, colors=colors)

    return Trajectory(
        id=traj_id,
        source_format="nvm",
        poses=poses,
        image_manifest=manifest,
        point_cloud=cloud,
    )


def parse_bdd_json(text: Union[str, TextIO], traj_id: str = "bdd") -> Trajectory:
    """Parse a driving-log info JSON with per-fix latitude, longitude,
    timestamp (milliseconds) and course (compass degrees from north)."""
    try:
        doc = json.loads(_as_text(text))
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise NotJson(str(exc)) from None

    if isinstance(doc, list):
        records = doc
    elif isinstance(doc, dict):
        records = doc.get("locations", doc.get("gps"))
    else:
        records = None
    if not isinstance(records, list) or not records:
        raise EmptyLocations("no location records")

    poses = []
    origin = None
    for i, record in enumerate(records):
        if not isinstance(record, dict):
            raise MissingField(i, "latitude")
        values = {}
        for name in ("latitude", "longitude", "timestamp", "course"):
            value = record.get(name)
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise MissingField(i, name)
            values[name] = float(value)
        gps = GeoCoordinate(values["latitude"], values["longitude"])
        if origin is None:
            origin = gps
        x, y = gps_to_local(gps, origin)
        # compass course is clockwise from north; our yaw is counter-clockwise
        yaw = normalize_angle(-math.radians(values["course"]))
        poses.append(
            Pose(
                index=i,
                timestamp=values["timestamp"] / 1e3,
                position=(x, y, 0.0),
                orientation=(0.0, 0.0, yaw),
                gps=gps,
            )
        )
    return Trajectory(id=traj_id, source_format="bdd-json", poses=poses, origin=origin)


def parse_delimited(
    text: Union[str, TextIO],
    descriptor: ParserDescriptor,
    traj_id: str = "delimited",
) -> Trajectory:
    """Parse header-less delimited rows through a column map.

    Unmapped canonical fields stay absent: no yaw column means no
    orientation. Splitting on None means any whitespace run, so space- and
    tab-delimited files with the same content parse identically.
    """
    column_map = descriptor.column_map
    _check_minimum_columns(column_map)
    columns = {name: int(idx) for name, idx in column_map.items()}
    max_index = max(columns.values())

    poses = []
    origin = None
    alt0 = None
    for line_number, raw in enumerate(_as_text(text).splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        tokens = line.split(descriptor.delimiter)
        if len(tokens) <= max_index:
            raise MalformedLine(line_number, "too few columns")
        try:
            values = {name: float(tokens[idx]) for name, idx in columns.items()}
        except ValueError:
            raise MalformedLine(line_number, "non-numeric value") from None

        gps = None
        if "latitude" in values:
            gps = GeoCoordinate(values["latitude"], values["longitude"])
            if origin is None:
                origin = gps
                alt0 = values.get("altitude", 0.0)

        if "x" in values:
            position = (values["x"], values["y"], values.get("z", 0.0))
        else:
            x, y = gps_to_local(gps, origin)
            z = values.get("z", values.get("altitude", alt0) - alt0)
            position = (x, y, z)

        orientation = None
        if "yaw" in values:
            orientation = tuple(
                _to_radians(values.get(a, 0.0), descriptor.angle_unit)
                for a in ("roll", "pitch", "yaw")
            )

        poses.append(
            Pose(
                index=len(poses),
                timestamp=_to_seconds(values["timestamp"], descriptor.timestamp_unit),
                position=position,
                orientation=orientation,
                gps=gps,
                altitude=values.get("altitude"),
            )
        )
    if not poses:
        raise EmptyFile("no rows")
    return Trajectory(
        id=traj_id, source_format="delimited-generic", poses=poses, origin=origin
    )


def _interp_angle(a: float, b: float, lam: float) -> float:
    # shortest-arc: remainder() gives the signed minimal delta in [-pi, pi]
    return normalize_angle(a + lam * math.remainder(b - a, 2.0 * math.pi))


def _interp_pose(a: Pose, b: Pose, lam: float) -> dict:
    position = tuple((1.0 - lam) * u + lam * v for u, v in zip(a.position, b.position))
    orientation = None
    if a.orientation is not None and b.orientation is not None:
        orientation = tuple(
            _interp_angle(u, v, lam) for u, v in zip(a.orientation, b.orientation)
        )
    gps = None
    if a.gps is not None and b.gps is not None:
        gps = GeoCoordinate(
            a.gps.latitude + lam * (b.gps.latitude - a.gps.latitude),
            a.gps.longitude + lam * (b.gps.longitude - a.gps.longitude),
        )
    altitude = None
    if a.altitude is not None and b.altitude is not None:
        altitude = a.altitude + lam * (b.altitude - a.altitude)
    return dict(position=position, orientation=orientation, gps=gps, altitude=altitude)


def interpolate_image_poses(trajectory: Trajectory) -> Trajectory:
    """Build a one-pose-per-image trajectory from a higher-rate pose stream.

    Positions interpolate linearly between the two poses bracketing each
    image timestamp; angles take the shortest arc; gps and altitude
    interpolate linearly. Images outside the pose time range are dropped,
    so the number dropped equals len(image_manifest) - len(result.poses).
    """
    poses = trajectory.poses
    manifest = trajectory.image_manifest
    if not poses or not manifest:
        raise NoOverlap("no images inside the pose time range")
    times = [p.timestamp for p in poses]
    t_min, t_max = times[0], times[-1]

    in_range = sorted(
        ((t, j, path) for j, (t, path) in enumerate(manifest) if t_min <= t <= t_max),
        key=lambda item: (item[0], item[1]),
    )
    if not in_range:
        raise NoOverlap("no images inside the pose time range")

    new_poses = []
    for out_index, (t, j, path) in enumerate(in_range):
        k = bisect_left(times, t)
        if k < len(times) and times[k] == t:
            src = poses[k]
            fields = dict(
                position=src.position,
                orientation=src.orientation,
                gps=src.gps,
                altitude=src.altitude,
            )
        else:
            a, b = poses[k - 1], poses[k]
            lam = (t - a.timestamp) / (b.timestamp - a.timestamp)
            fields = _interp_pose(a, b, lam)
        new_poses.append(
            Pose(index=out_index, timestamp=t, image_index=j, image=path, **fields)
        )
    return replace(trajectory, poses=tuple(new_poses))


# ---------------------------------------------------------------------------
# format detection and file loading (shared by the CLI and the server)

FORMAT_EXTENSIONS = {
    ".nvm": "nvm",
    ".json": "bdd-json",
    ".csv": "csv-ins",
}


def descriptor_sidecar_path(path: Union[str, Path]) -> Path:
    return Path(str(path) + ".columns.json")


def load_descriptor_sidecar(path: Union[str, Path]) -> Optional[ParserDescriptor]:
    sidecar = descriptor_sidecar_path(path)
    if not sidecar.is_file():
        return None
    try:
        return ParserDescriptor.from_dict(json.loads(sidecar.read_text()))
    except (json.JSONDecodeError, ValueError):
        return None


def sniff_format(path: Union[str, Path], head: Optional[str] = None) -> Optional[str]:
    """Guess the parser for a file from its extension plus a header sniff.

    Returns None when nothing applies (e.g. a delimited file without a
    column-map sidecar).
    """
    path = Path(path)
    if head is None:
        try:
            with open(path, "r", errors="replace") as f:
                head = f.read(65536)
        except OSError:
            return None
    suffix = path.suffix.lower()
    first = ""
    for line in head.splitlines():
        if line.strip():
            first = line.strip()
            break

    if first.startswith("NVM_V3") or suffix == ".nvm":
        return "nvm"
    if suffix == ".json" or first[:1] in ("{", "["):
        return "bdd-json" if '"latitude"' in head else None
    if suffix == ".csv":
        return "csv-ins" if "latitude" in head.splitlines()[0].lower() else None
    tokens = first.split()
    if len(tokens) == 12:
        try:
            [float(t) for t in tokens]
            return "kitti"
        except ValueError:
            pass
    if load_descriptor_sidecar(path) is not None:
        return "delimited-generic"
    return None


def parse_text(
    text: Union[str, TextIO],
    format_id: str,
    descriptor: Optional[ParserDescriptor] = None,
    traj_id: Optional[str] = None,
) -> Trajectory:
    """Dispatch to the parser for format_id."""
    traj_id = traj_id or format_id
    if format_id == "kitti":
        return parse_kitti(text, traj_id=traj_id)
    if format_id == "csv-ins":
        return parse_csv_ins(text, descriptor=descriptor, traj_id=traj_id)
    if format_id == "nvm":
        return parse_nvm(text, traj_id=traj_id)
    if format_id == "bdd-json":
        return parse_bdd_json(text, traj_id=traj_id)
    if format_id == "delimited-generic":
        if descriptor is None:
            raise MissingColumn("timestamp")
        return parse_delimited(text, descriptor, traj_id=traj_id)
    raise ValueError(f"unknown format {format_id!r}")


def load_trajectory(
    path: Union[str, Path],
    format_id: str = "auto",
    descriptor: Optional[ParserDescriptor] = None,
    traj_id: Optional[str] = None,
) -> Trajectory:
    """Read and parse a trajectory file, auto-detecting the format by default."""
    path = Path(path)
    try:
        text = path.read_text(errors="replace")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from None
    if descriptor is None:
        descriptor = load_descriptor_sidecar(path)
    if format_id == "auto":
        format_id = sniff_format(path, head=text[:65536])
        if format_id is None:
            raise ParseError(f"cannot detect format of {path}")
    return parse_text(
        text, format_id, descriptor=descriptor, traj_id=traj_id or path.name
    )
