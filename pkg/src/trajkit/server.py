"""Thin JSON-over-HTTP server: dataset discovery, parsed trajectories,
compute endpoints that wrap the library one-to-one, settings persistence,
and static files for the viewer bundle.

Compute endpoints return the same canonical bytes the CLI writes, so HTTP
and batch exports are interchangeable.
"""

from __future__ import annotations

import json
import logging
import mimetypes
import os
import struct
import threading
from collections import OrderedDict
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Tuple, Union

from fastapi import Body, FastAPI, Request
from fastapi.responses import JSONResponse, Response
from fastapi.staticfiles import StaticFiles

from trajkit import wire
from trajkit.analysis import NotFound, SettingsStore, bundle_from_dict
from trajkit.matching import find_correspondences
from trajkit.model import EmptyTrajectory, MissingGps, MissingHeading, Trajectory
from trajkit.parsers import (
    PARSER_VERSION,
    ParseError,
    descriptor_sidecar_path,
    interpolate_image_poses,
    load_trajectory,
    sniff_format,
)
from trajkit.sampling import sample
from trajkit.transforms import apply_settings

log = logging.getLogger("trajkit.server")

DEFAULT_PORT = 8008


@dataclass(frozen=True)
class DatasetEntry:
    id: str
    format: str
    path: Path


def discover_datasets(root: Union[str, Path]) -> List[DatasetEntry]:
    """Walk the dataset root and list every parseable trajectory file.

    Deterministic: entries come back sorted by id. Unreadable subtrees are
    skipped with a warning rather than failing the listing.
    """
    root = Path(root)
    entries = []

    def on_error(error):
        log.warning("skipping unreadable path: %s", error)

    for dirpath, dirnames, filenames in os.walk(root, onerror=on_error):
        dirnames.sort()
        for filename in sorted(filenames):
            if filename.endswith(".columns.json"):
                continue
            path = Path(dirpath) / filename
            try:
                format_id = sniff_format(path)
            except OSError as error:
                log.warning("skipping unreadable file %s: %s", path, error)
                continue
            if format_id is None:
                continue
            entries.append(
                DatasetEntry(
                    id=path.relative_to(root).as_posix(), format=format_id, path=path
                )
            )
    entries.sort(key=lambda e: e.id)
    return entries


class TrajectoryCache:
    """Bounded parse cache keyed by (path, mtime, parser version).

    A per-key lock means concurrent first loads of one file parse once; a
    file changed on disk is reparsed on the next request.
    """

    def __init__(self, max_entries: int = 32):
        self.max_entries = max_entries
        self._entries: "OrderedDict[str, Tuple[float, int, Trajectory]]" = OrderedDict()
        self._guard = threading.Lock()
        self._key_locks: dict = {}

    def _lock_for(self, key: str) -> threading.Lock:
        with self._guard:
            lock = self._key_locks.get(key)
            if lock is None:
                lock = self._key_locks[key] = threading.Lock()
            return lock

    def get(self, entry: DatasetEntry) -> Trajectory:
        mtime = entry.path.stat().st_mtime
        with self._guard:
            cached = self._entries.get(entry.id)
            if cached is not None and cached[0] == mtime and cached[1] == PARSER_VERSION:
                self._entries.move_to_end(entry.id)
                return cached[2]
        with self._lock_for(entry.id):
            with self._guard:
                cached = self._entries.get(entry.id)
                if cached is not None and cached[0] == mtime and cached[1] == PARSER_VERSION:
                    return cached[2]
            trajectory = load_trajectory(entry.path, entry.format, traj_id=entry.id)
            with self._guard:
                self._entries[entry.id] = (mtime, PARSER_VERSION, trajectory)
                self._entries.move_to_end(entry.id)
                while len(self._entries) > self.max_entries:
                    self._entries.popitem(last=False)
            return trajectory


def _error_body(error: Exception) -> dict:
    return {
        "error": {
            "type": type(error).__name__,
            "message": str(error),
            "lineNumber": getattr(error, "line_number", None),
        }
    }


def _json_error(status: int, error: Exception) -> JSONResponse:
    return JSONResponse(status_code=status, content=_error_body(error))


def _canonical_response(payload: dict) -> Response:
    return Response(content=wire.canonical_bytes(payload), media_type="application/json")


def create_app(
    root: Union[str, Path],
    settings_dir: Union[str, Path],
    static_dir: Union[str, Path, None] = None,
    cache_size: int = 32,
) -> FastAPI:
    root = Path(root)
    store = SettingsStore(settings_dir)
    cache = TrajectoryCache(max_entries=cache_size)
    app = FastAPI(title="trajkit", docs_url=None, redoc_url=None)

    def find_entry(trajectory_id: str) -> Optional[DatasetEntry]:
        for entry in discover_datasets(root):
            if entry.id == trajectory_id:
                return entry
        return None

    def load_for(
        trajectory_id: str, interpolate: bool = False, offsets: Optional[str] = None
    ):
        entry = find_entry(trajectory_id)
        if entry is None:
            return None, _json_error(404, KeyError(f"unknown trajectory {trajectory_id!r}"))
        trajectory = cache.get(entry)
        if interpolate:
            trajectory = interpolate_image_poses(trajectory)
        if offsets:
            bundle = store.load(offsets)
            trajectory = apply_settings(trajectory, bundle.offset_settings)
        return trajectory, None

    @app.get("/api/datasets")
    def list_datasets():
        if not root.is_dir() or not os.access(root, os.R_OK):
            return _json_error(500, OSError(f"dataset root {root} is not readable"))
        payload = [
            {"id": e.id, "format": e.format, "trajectoryCount": 1}
            for e in discover_datasets(root)
        ]
        return _canonical_response(payload)

    @app.get("/api/trajectories/{trajectory_id:path}")
    def get_trajectory(trajectory_id: str, interpolate: bool = False, offsets: str = ""):
        try:
            trajectory, failure = load_for(trajectory_id, interpolate, offsets or None)
        except ParseError as error:
            return _json_error(422, error)
        except NotFound as error:
            return _json_error(404, error)
        if failure is not None:
            return failure
        cloud_url = None
        if trajectory.point_cloud is not None and len(trajectory.point_cloud) > 0:
            cloud_url = f"/api/pointcloud/{trajectory_id}"
        return _canonical_response(wire.trajectory_to_dict(trajectory, cloud_url))

    @app.get("/api/pointcloud/{trajectory_id:path}")
    def get_pointcloud(trajectory_id: str):
        try:
            trajectory, failure = load_for(trajectory_id)
        except ParseError as error:
            return _json_error(422, error)
        if failure is not None:
            return failure
        cloud = trajectory.point_cloud
        if cloud is None or len(cloud) == 0:
            return _json_error(404, KeyError(f"{trajectory_id} has no point cloud"))
        body = struct.pack("<Q", len(cloud)) + cloud.points.astype("<f4").tobytes()
        return Response(content=body, media_type="application/octet-stream")

    @app.post("/api/compute/sample")
    def compute_sample(payload: dict = Body(...)):
        trajectory_id = payload.get("trajectoryId", "")
        try:
            params = wire.sampling_params_from_dict(payload.get("params", {}))
        except (ValueError, TypeError) as error:
            return _json_error(400, error)
        try:
            trajectory, failure = load_for(
                trajectory_id, interpolate=bool(payload.get("interpolate", False))
            )
        except ParseError as error:
            return _json_error(422, error)
        if failure is not None:
            return failure
        try:
            result = sample(trajectory.poses, params)
        except (MissingHeading, EmptyTrajectory) as error:
            return _json_error(422, error)
        return _canonical_response(wire.sample_export(trajectory_id, trajectory, result))

    @app.post("/api/compute/match")
    def compute_match(payload: dict = Body(...)):
        query_id = payload.get("queryId", "")
        candidate_id = payload.get("candidateId", "")
        try:
            params = wire.match_params_from_dict(payload.get("params", {}))
        except (ValueError, TypeError) as error:
            return _json_error(400, error)
        try:
            query, failure = load_for(query_id)
            if failure is not None:
                return failure
            candidate, failure = load_for(candidate_id)
            if failure is not None:
                return failure
        except ParseError as error:
            return _json_error(422, error)
        try:
            pairs = find_correspondences(query, candidate, params)
        except (MissingGps, MissingHeading, EmptyTrajectory) as error:
            return _json_error(422, error)
        return _canonical_response(wire.match_export(query_id, candidate_id, params, pairs))

    @app.get("/api/images/{resource:path}")
    def get_image(resource: str):
        parts = resource.split("/")
        if any(part in ("", ".", "..") for part in parts):
            return _json_error(403, PermissionError("path traversal rejected"))
        match = None
        for entry in discover_datasets(root):
            prefix = entry.id + "/"
            if resource.startswith(prefix):
                if match is None or len(entry.id) > len(match.id):
                    match = entry
        if match is None:
            return _json_error(404, KeyError(f"no dataset owns {resource!r}"))
        relative = resource[len(match.id) + 1 :]
        target = (match.path.parent / relative).resolve()
        try:
            target.relative_to(root.resolve())
        except ValueError:
            return _json_error(403, PermissionError("path escapes the dataset root"))
        if not target.is_file():
            return _json_error(404, FileNotFoundError(relative))
        media_type = mimetypes.guess_type(target.name)[0] or "application/octet-stream"
        return Response(content=target.read_bytes(), media_type=media_type)

    @app.get("/api/settings/{name}")
    def get_settings(name: str):
        try:
            raw = store.load_bytes(name)
        except NotFound as error:
            return _json_error(404, error)
        except ValueError as error:
            return _json_error(400, error)
        return Response(content=raw, media_type="application/json")

    @app.put("/api/settings/{name}")
    async def put_settings(name: str, request: Request):
        raw = await request.body()
        try:
            data = json.loads(raw)
            bundle = bundle_from_dict(data)
            if bundle.name != name:
                raise ValueError(
                    f"bundle name {bundle.name!r} does not match URL name {name!r}"
                )
        except (ValueError, KeyError, TypeError) as error:
            return _json_error(400, error)
        store.save_bytes(name, raw)
        return _canonical_response({"saved": name})

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="viewer")

    return app
