"""Versioned JSON wire schemas shared by the CLI and the HTTP server.

Serialization is canonical: keys sorted, no whitespace, floats with an
integral value written as JSON integers. The CLI and the server reuse these
builders, so both produce byte-identical documents for identical inputs.
"""

from __future__ import annotations

import json
import math
from typing import Any, List, Optional, Sequence

from trajkit.matching import Correspondence, MatchParams
from trajkit.model import GeoCoordinate, Pose, Trajectory
from trajkit.sampling import SampleResult, SamplingParams
from trajkit.transforms import OffsetSettings

SCHEMA_VERSION = 1


def canonical(value: Any) -> Any:
    """Normalize a JSON-able structure for canonical serialization."""
    if isinstance(value, dict):
        return {str(k): canonical(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [canonical(v) for v in value]
    if isinstance(value, bool) or value is None or isinstance(value, (int, str)):
        return value
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError("non-finite value cannot be serialized")
        if value.is_integer() and abs(value) < 2**53:
            return int(value)
        return value
    if hasattr(value, "item"):  # numpy scalar
        return canonical(value.item())
    raise TypeError(f"cannot serialize {type(value).__name__}")


def canonical_dumps(value: Any) -> str:
    return json.dumps(canonical(value), sort_keys=True, separators=(",", ":"))


def canonical_bytes(value: Any) -> bytes:
    return canonical_dumps(value).encode("utf-8")


def _geo_to_dict(gps: Optional[GeoCoordinate]) -> Optional[dict]:
    if gps is None:
        return None
    return {"lat": gps.latitude, "lon": gps.longitude}


def _geo_from_dict(data: Optional[dict]) -> Optional[GeoCoordinate]:
    if data is None:
        return None
    return GeoCoordinate(float(data["lat"]), float(data["lon"]))


def pose_to_dict(pose: Pose) -> dict:
    return {
        "index": pose.index,
        "timestamp": pose.timestamp,
        "position": list(pose.position),
        "orientation": list(pose.orientation) if pose.orientation is not None else None,
        "gps": _geo_to_dict(pose.gps),
        "altitude": pose.altitude,
        "imageIndex": pose.image_index,
        "image": pose.image,
    }


def pose_from_dict(data: dict) -> Pose:
    orientation = data.get("orientation")
    return Pose(
        index=int(data["index"]),
        timestamp=float(data["timestamp"]),
        position=tuple(float(v) for v in data["position"]),
        orientation=tuple(float(v) for v in orientation) if orientation is not None else None,
        gps=_geo_from_dict(data.get("gps")),
        altitude=float(data["altitude"]) if data.get("altitude") is not None else None,
        image_index=int(data["imageIndex"]) if data.get("imageIndex") is not None else None,
        image=data.get("image"),
    )


def trajectory_to_dict(trajectory: Trajectory, point_cloud_url: Optional[str] = None) -> dict:
    return {
        "schemaVersion": SCHEMA_VERSION,
        "id": trajectory.id,
        "sourceFormat": trajectory.source_format,
        "origin": _geo_to_dict(trajectory.origin),
        "poses": [pose_to_dict(p) for p in trajectory.poses],
        "imageManifest": [[t, path] for t, path in trajectory.image_manifest],
        "pointCloudUrl": point_cloud_url,
    }


def trajectory_from_dict(data: dict) -> Trajectory:
    return Trajectory(
        id=data["id"],
        source_format=data["sourceFormat"],
        poses=tuple(pose_from_dict(p) for p in data["poses"]),
        image_manifest=tuple((float(t), str(p)) for t, p in data.get("imageManifest", [])),
        origin=_geo_from_dict(data.get("origin")),
    )


def sampling_params_to_dict(params: SamplingParams) -> dict:
    return {"mode": params.mode, "tauD": params.tau_d, "tauTheta": params.tau_theta}


def sampling_params_from_dict(data: dict) -> SamplingParams:
    return SamplingParams(
        mode=data.get("mode", "uniform"),
        tau_d=float(data.get("tauD", 12.0)),
        tau_theta=float(data.get("tauTheta", 15.0)),
    )


def match_params_to_dict(params: MatchParams) -> dict:
    return {
        "alpha": params.alpha,
        "beta": params.beta,
        "tauBetaTheta": params.tau_beta_theta,
        "tauBetaD": params.tau_beta_d,
        "tauLoss": params.tau_loss,
        "maxDistance": params.max_distance,
    }


def match_params_from_dict(data: dict) -> MatchParams:
    return MatchParams(
        alpha=float(data.get("alpha", 1.0)),
        beta=float(data.get("beta", 1.0)),
        tau_beta_theta=float(data.get("tauBetaTheta", 15.0)),
        tau_beta_d=float(data.get("tauBetaD", 12.0)),
        tau_loss=float(data.get("tauLoss", 30.0)),
        max_distance=float(data.get("maxDistance", 30.0)),
    )


def offset_settings_to_dict(settings: OffsetSettings) -> dict:
    return {
        "positionOffset": list(settings.position_offset),
        "rotationOffset": list(settings.rotation_offset),
        "invertPosition": list(settings.invert_position),
        "invertRotation": list(settings.invert_rotation),
        "swapPositionAxes": list(settings.swap_position_axes)
        if settings.swap_position_axes is not None
        else None,
        "swapRotationAxes": list(settings.swap_rotation_axes)
        if settings.swap_rotation_axes is not None
        else None,
        "uniformScale": settings.uniform_scale,
        "ignoreAltitude": settings.ignore_altitude,
        "zTimeRate": settings.z_time_rate,
    }


def offset_settings_from_dict(data: dict) -> OffsetSettings:
    swap_p = data.get("swapPositionAxes")
    swap_r = data.get("swapRotationAxes")
    return OffsetSettings(
        position_offset=tuple(data.get("positionOffset", (0.0, 0.0, 0.0))),
        rotation_offset=tuple(data.get("rotationOffset", (0.0, 0.0, 0.0))),
        invert_position=tuple(data.get("invertPosition", (False, False, False))),
        invert_rotation=tuple(data.get("invertRotation", (False, False, False))),
        swap_position_axes=tuple(swap_p) if swap_p is not None else None,
        swap_rotation_axes=tuple(swap_r) if swap_r is not None else None,
        uniform_scale=float(data.get("uniformScale", 1.0)),
        ignore_altitude=bool(data.get("ignoreAltitude", False)),
        z_time_rate=float(data.get("zTimeRate", 0.0)),
    )


def sample_export(
    trajectory_id: str, trajectory: Trajectory, result: SampleResult
) -> dict:
    """Sampled-poses export document (also the compute endpoint body)."""
    return {
        "schemaVersion": SCHEMA_VERSION,
        "trajectoryId": trajectory_id,
        "params": sampling_params_to_dict(result.params),
        "selectedIndices": list(result.selected_indices),
        "totalCandidates": result.total_candidates,
        "poses": [pose_to_dict(trajectory.poses[i]) for i in result.selected_indices],
    }


def match_export(
    query_id: str,
    candidate_id: str,
    params: MatchParams,
    pairs: Sequence[Correspondence],
) -> dict:
    """Correspondence export document (also the compute endpoint body)."""
    return {
        "schemaVersion": SCHEMA_VERSION,
        "queryId": query_id,
        "candidateId": candidate_id,
        "params": match_params_to_dict(params),
        "pairs": [
            {
                "queryIndex": c.query_index,
                "matchIndex": c.match_index,
                "loss": c.loss,
                "deltaD": c.delta_d,
                "deltaTheta": c.delta_theta,
            }
            for c in pairs
        ],
    }
