"""Extension-data models: named settings bundles with dirty detection,
top-k image-retrieval inspection, and topological-map overlays.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from trajkit.matching import MatchParams
from trajkit.model import Trajectory
from trajkit.parsers import NotJson
from trajkit.sampling import SamplingParams
from trajkit.transforms import OffsetSettings
from trajkit import wire


class NotFound(KeyError):
    """No settings bundle stored under that name."""


class StorageFailure(OSError):
    """The settings store could not be read or written."""


class IndexOutOfRange(IndexError):
    pass


class BadK(ValueError):
    pass


class LengthMismatch(ValueError):
    def __init__(self, nodes: int, poses: int):
        super().__init__(f"{nodes} node labels for {poses} poses")
        self.nodes = nodes
        self.poses = poses


class BadLoopIndex(ValueError):
    pass


_NAME_RE = re.compile(r"^[A-Za-z0-9][A-Za-z0-9._-]*$")


def _check_name(name: str) -> str:
    if not name or not _NAME_RE.match(name) or ".." in name:
        raise ValueError(f"invalid settings name {name!r}")
    return name


@dataclass(frozen=True)
class SettingsBundle:
    """Everything needed to restore a working session.

    content_hash covers every field except saved_at (and itself), so two
    bundles differing only in save time compare clean.
    """

    name: str
    offset_settings: OffsetSettings = OffsetSettings()
    sampling_params: SamplingParams = SamplingParams()
    match_params: MatchParams = MatchParams()
    view_state: dict = field(default_factory=dict)
    scene_settings: dict = field(default_factory=dict)
    loaded_file_ref: str = ""
    saved_at: float = 0.0
    content_hash: str = ""

    def __post_init__(self):
        _check_name(self.name)
        expected = compute_content_hash(self)
        if self.content_hash and self.content_hash != expected:
            raise ValueError("content hash does not match bundle fields")
        object.__setattr__(self, "content_hash", expected)


def compute_content_hash(bundle: SettingsBundle) -> str:
    hashed_fields = {
        "name": bundle.name,
        "viewState": bundle.view_state,
        "offsetSettings": wire.offset_settings_to_dict(bundle.offset_settings),
        "sceneSettings": bundle.scene_settings,
        "samplingParams": wire.sampling_params_to_dict(bundle.sampling_params),
        "matchParams": wire.match_params_to_dict(bundle.match_params),
        "loadedFileRef": bundle.loaded_file_ref,
    }
    return hashlib.sha256(wire.canonical_bytes(hashed_fields)).hexdigest()


def bundle_to_dict(bundle: SettingsBundle) -> dict:
    return {
        "name": bundle.name,
        "viewState": bundle.view_state,
        "offsetSettings": wire.offset_settings_to_dict(bundle.offset_settings),
        "sceneSettings": bundle.scene_settings,
        "samplingParams": wire.sampling_params_to_dict(bundle.sampling_params),
        "matchParams": wire.match_params_to_dict(bundle.match_params),
        "loadedFileRef": bundle.loaded_file_ref,
        "savedAt": bundle.saved_at,
        "contentHash": bundle.content_hash,
    }


def bundle_from_dict(data: dict) -> SettingsBundle:
    return SettingsBundle(
        name=data["name"],
        view_state=data.get("viewState", {}),
        offset_settings=wire.offset_settings_from_dict(data.get("offsetSettings", {})),
        scene_settings=data.get("sceneSettings", {}),
        sampling_params=wire.sampling_params_from_dict(data.get("samplingParams", {})),
        match_params=wire.match_params_from_dict(data.get("matchParams", {})),
        loaded_file_ref=data.get("loadedFileRef", ""),
        saved_at=float(data.get("savedAt", 0.0)),
        content_hash=data.get("contentHash", ""),
    )


def is_dirty(current: SettingsBundle, saved: SettingsBundle) -> bool:
    """True iff anything other than the save timestamp changed."""
    return current.content_hash != saved.content_hash


class SettingsStore:
    """Directory of JSON settings documents keyed by bundle name.

    Saves are last-writer-wins per name. Raw document bytes are preserved,
    so a save/restore round trip is byte-identical.
    """

    def __init__(self, directory: Union[str, Path]):
        self.directory = Path(directory)
        try:
            self.directory.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise StorageFailure(str(exc)) from None

    def _path(self, name: str) -> Path:
        return self.directory / f"{_check_name(name)}.json"

    def save(self, bundle: SettingsBundle) -> str:
        return self.save_bytes(bundle.name, wire.canonical_bytes(bundle_to_dict(bundle)))

    def save_bytes(self, name: str, raw: bytes) -> str:
        try:
            self._path(name).write_bytes(raw)
        except OSError as exc:
            raise StorageFailure(str(exc)) from None
        return name

    def load_bytes(self, name: str) -> bytes:
        path = self._path(name)
        if not path.is_file():
            raise NotFound(name)
        try:
            return path.read_bytes()
        except OSError as exc:
            raise StorageFailure(str(exc)) from None

    def load(self, name: str) -> SettingsBundle:
        return bundle_from_dict(json.loads(self.load_bytes(name)))

    def names(self) -> List[str]:
        return sorted(p.stem for p in self.directory.glob("*.json"))


def save_settings(bundle: SettingsBundle, store: SettingsStore) -> str:
    return store.save(bundle)


def restore_settings(name: str, store: SettingsStore) -> SettingsBundle:
    return store.load(name)


@dataclass(frozen=True)
class RetrievalEpoch:
    """One training epoch's retrieval dump: query-by-gallery distances plus
    labels and the index-to-image mapping."""

    step: int
    distances: np.ndarray
    query_labels: tuple
    gallery_labels: tuple
    index_to_image: dict = field(default_factory=dict)

    def __post_init__(self):
        distances = np.asarray(self.distances, dtype=np.float64)
        if distances.ndim != 2:
            raise ValueError("distances must be a 2-d matrix")
        if (distances < 0).any():
            raise ValueError("distances must be nonnegative")
        query_labels = tuple(int(v) for v in self.query_labels)
        gallery_labels = tuple(int(v) for v in self.gallery_labels)
        if distances.shape != (len(query_labels), len(gallery_labels)):
            raise ValueError("label lists must match the matrix shape")
        distances.flags.writeable = False
        object.__setattr__(self, "distances", distances)
        object.__setattr__(self, "query_labels", query_labels)
        object.__setattr__(self, "gallery_labels", gallery_labels)

    @property
    def gallery_size(self) -> int:
        return self.distances.shape[1]


def epoch_from_dict(data: dict) -> RetrievalEpoch:
    """Load the row-major matrix container: shape header plus a flat list."""
    nq, ng = (int(v) for v in data["shape"])
    flat = np.asarray(data["distances"], dtype=np.float64)
    if flat.size != nq * ng:
        raise ValueError(f"distances length {flat.size} != shape {nq}x{ng}")
    return RetrievalEpoch(
        step=int(data.get("step", 0)),
        distances=flat.reshape(nq, ng),
        query_labels=data["queryLabels"],
        gallery_labels=data["galleryLabels"],
        index_to_image={int(k): str(v) for k, v in data.get("indexToImage", {}).items()},
    )


def epoch_to_dict(epoch: RetrievalEpoch) -> dict:
    return {
        "step": epoch.step,
        "shape": list(epoch.distances.shape),
        "distances": epoch.distances.reshape(-1).tolist(),
        "queryLabels": list(epoch.query_labels),
        "galleryLabels": list(epoch.gallery_labels),
        "indexToImage": {str(k): v for k, v in epoch.index_to_image.items()},
    }


def topk(epoch: RetrievalEpoch, query_row: int, k: int) -> List[Tuple[int, float]]:
    """The k nearest gallery entries for one query, ascending by distance,
    ties broken toward the smaller gallery index."""
    if not 0 <= query_row < epoch.distances.shape[0]:
        raise IndexOutOfRange(f"query row {query_row} out of range")
    if not 1 <= k <= epoch.gallery_size:
        raise BadK(f"k={k} outside 1..{epoch.gallery_size}")
    row = epoch.distances[query_row]
    order = np.argsort(row, kind="stable")[:k]
    return [(int(j), float(row[j])) for j in order]


def topk_accuracy(epoch: RetrievalEpoch, k: int) -> float:
    """Fraction of queries whose top-k contains a gallery item of the same label."""
    hits = 0
    for qi in range(epoch.distances.shape[0]):
        label = epoch.query_labels[qi]
        if any(epoch.gallery_labels[j] == label for j, _ in topk(epoch, qi, k)):
            hits += 1
    return hits / epoch.distances.shape[0]


@dataclass(frozen=True)
class HTMapOverlay:
    """Per-pose topological location ids plus loop-closure pose pairs."""

    node_of_pose: dict
    loop_closures: tuple

    @property
    def location_ids(self) -> tuple:
        return tuple(sorted(set(self.node_of_pose.values())))


def load_htmap(text: str, trajectory: Trajectory) -> HTMapOverlay:
    """Parse {"nodes": [...], "loops": [[a, b], ...]} against a trajectory.

    nodes must carry one location id per pose; loop pairs are validated
    against the pose count, stored unordered and deduplicated.
    """
    try:
        doc = json.loads(text)
    except (json.JSONDecodeError, TypeError) as exc:
        raise NotJson(str(exc)) from None
    if not isinstance(doc, dict) or not isinstance(doc.get("nodes"), list):
        raise NotJson("expected an object with a 'nodes' list")
    nodes = doc["nodes"]
    if len(nodes) != len(trajectory.poses):
        raise LengthMismatch(len(nodes), len(trajectory.poses))
    try:
        node_of_pose = {i: int(v) for i, v in enumerate(nodes)}
    except (TypeError, ValueError):
        raise NotJson("node ids must be integers") from None

    loops = []
    seen = set()
    for pair in doc.get("loops", []):
        if not isinstance(pair, (list, tuple)) or len(pair) != 2:
            raise BadLoopIndex(f"loop pair {pair!r} is not a pair")
        try:
            a, b = int(pair[0]), int(pair[1])
        except (TypeError, ValueError):
            raise BadLoopIndex(f"loop pair {pair!r} is not numeric") from None
        if not (0 <= a < len(trajectory.poses) and 0 <= b < len(trajectory.poses)):
            raise BadLoopIndex(f"loop pair ({a}, {b}) outside 0..{len(trajectory.poses) - 1}")
        key = (min(a, b), max(a, b))
        if key not in seen:
            seen.add(key)
            loops.append(key)
    return HTMapOverlay(node_of_pose=node_of_pose, loop_closures=tuple(loops))
