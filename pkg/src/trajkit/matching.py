"""One-to-one pose correspondence search between two trajectories.

The loss for a query pose x against a candidate pose y is
alpha * delta_d + beta_star * delta_theta, where delta_d is the great-circle
distance in meters, delta_theta the absolute heading difference in degrees,
and beta_star grows beyond beta when the candidate sits in a turn (heading
accumulated over a window around y exceeds the limiter threshold).
Assignment is global greedy by ascending loss, which is deterministic and
has a brute-force oracle.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

from trajkit.model import (
    EARTH_RADIUS_M,
    EmptyTrajectory,
    MissingGps,
    MissingHeading,
    Pose,
    Trajectory,
    haversine_distance,
    heading_difference,
    planar_distance,
)


@dataclass(frozen=True)
class MatchParams:
    """Loss weights and cutoffs.

    alpha weighs meters, beta weighs degrees; the user balances units
    through them. tau_beta_theta (degrees) is the limiter threshold above
    which beta scales up; tau_beta_d (meters) is the window over which
    heading change accumulates around a candidate. Pairs farther than
    max_distance meters or with loss above tau_loss are inadmissible.
    """

    alpha: float = 1.0
    beta: float = 1.0
    tau_beta_theta: float = 15.0
    tau_beta_d: float = 12.0
    tau_loss: float = 30.0
    max_distance: float = 30.0

    def __post_init__(self):
        if self.alpha < 0.0 or self.beta < 0.0 or self.alpha + self.beta <= 0.0:
            raise ValueError("alpha and beta must be nonnegative and not both zero")
        for name in ("tau_beta_theta", "tau_beta_d", "tau_loss", "max_distance"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class Correspondence:
    query_index: int
    match_index: int
    loss: float
    delta_d: float
    delta_theta: float


def _require_gps_and_heading(poses: Sequence[Pose], label: str) -> None:
    for pose in poses:
        if pose.gps is None:
            raise MissingGps(f"{label} pose {pose.index} has no gps")
        if pose.orientation is None:
            raise MissingHeading(f"{label} pose {pose.index} has no heading")


def accumulated_angle(poses: Sequence[Pose], i: int, tau_beta_d: float) -> float:
    """Heading change (degrees) summed over poses within tau_beta_d meters
    of along-track distance from pose i, walking both directions."""
    if not 0 <= i < len(poses):
        raise IndexError(f"pose index {i} out of range")
    total = 0.0
    # forward
    dist = 0.0
    for j in range(i, len(poses) - 1):
        dist += planar_distance(poses[j], poses[j + 1])
        if dist > tau_beta_d:
            break
        total += math.degrees(heading_difference(_yaw(poses[j]), _yaw(poses[j + 1])))
    # backward
    dist = 0.0
    for j in range(i, 0, -1):
        dist += planar_distance(poses[j], poses[j - 1])
        if dist > tau_beta_d:
            break
        total += math.degrees(heading_difference(_yaw(poses[j]), _yaw(poses[j - 1])))
    return total


def _yaw(pose: Pose) -> float:
    if pose.orientation is None:
        raise MissingHeading(f"pose {pose.index} has no heading")
    return pose.orientation[2]


def beta_star(beta: float, theta_acc: float, tau_beta_theta: float) -> float:
    """Adaptive angle importance: scaled up inside turns."""
    if theta_acc > tau_beta_theta:
        return beta * (theta_acc / tau_beta_theta)
    return beta


def match_loss(x: Pose, y: Pose, theta_acc: float, params: MatchParams) -> float:
    """alpha * haversine(x, y) + beta_star * heading difference in degrees."""
    if x.gps is None or y.gps is None:
        raise MissingGps("both poses need gps for matching")
    delta_d = haversine_distance(x.gps, y.gps)
    delta_theta = math.degrees(heading_difference(_yaw(x), _yaw(y)))
    return params.alpha * delta_d + beta_star(
        params.beta, theta_acc, params.tau_beta_theta
    ) * delta_theta


class _GeoGrid:
    """Uniform lat/lon bucket grid sized so a 3x3 neighborhood always covers
    the max_distance ball (exact pruning: a superset is scanned)."""

    def __init__(self, poses: Sequence[Pose], radius_m: float):
        lat_extent = max(abs(p.gps.latitude) for p in poses)
        # widen longitude cells near the poles; clamp keeps cells finite
        cos_floor = max(math.cos(math.radians(min(lat_extent + 0.01, 89.9))), 1e-2)
        self.cell_lat = math.degrees(radius_m / EARTH_RADIUS_M)
        self.cell_lon = math.degrees(radius_m / (EARTH_RADIUS_M * cos_floor))
        self.buckets: Dict[Tuple[int, int], List[int]] = defaultdict(list)
        for j, pose in enumerate(poses):
            self.buckets[self._key(pose)].append(j)

    def _key(self, pose: Pose) -> Tuple[int, int]:
        return (
            math.floor(pose.gps.latitude / self.cell_lat),
            math.floor(pose.gps.longitude / self.cell_lon),
        )

    def near(self, pose: Pose):
        ki, kj = self._key(pose)
        for di in (-1, 0, 1):
            for dj in (-1, 0, 1):
                yield from self.buckets.get((ki + di, kj + dj), ())


def find_correspondences(
    query: Trajectory, candidate: Trajectory, params: MatchParams = MatchParams()
) -> List[Correspondence]:
    """Best one-to-one pairing between query and candidate poses.

    Admissible pairs (within max_distance, loss at most tau_loss) are sorted
    by ascending loss (ties by query index, then match index) and accepted
    greedily while both endpoints are unmatched. Results come back ordered
    by query index.
    """
    if not query.poses or not candidate.poses:
        raise EmptyTrajectory("matching needs nonempty trajectories")
    _require_gps_and_heading(query.poses, "query")
    _require_gps_and_heading(candidate.poses, "candidate")

    theta_acc = [
        accumulated_angle(candidate.poses, j, params.tau_beta_d)
        for j in range(len(candidate.poses))
    ]
    grid = _GeoGrid(candidate.poses, params.max_distance)

    admissible = []
    for qi, x in enumerate(query.poses):
        x_yaw = _yaw(x)
        for cj in grid.near(x):
            y = candidate.poses[cj]
            delta_d = haversine_distance(x.gps, y.gps)
            if delta_d > params.max_distance:
                continue
            delta_theta = math.degrees(heading_difference(x_yaw, _yaw(y)))
            loss = params.alpha * delta_d + beta_star(
                params.beta, theta_acc[cj], params.tau_beta_theta
            ) * delta_theta
            if loss > params.tau_loss:
                continue
            admissible.append((loss, qi, cj, delta_d, delta_theta))

    admissible.sort(key=lambda item: (item[0], item[1], item[2]))
    used_query = set()
    used_candidate = set()
    chosen = []
    for loss, qi, cj, delta_d, delta_theta in admissible:
        if qi in used_query or cj in used_candidate:
            continue
        used_query.add(qi)
        used_candidate.add(cj)
        chosen.append(
            Correspondence(
                query_index=qi,
                match_index=cj,
                loss=loss,
                delta_d=delta_d,
                delta_theta=delta_theta,
            )
        )
    chosen.sort(key=lambda c: c.query_index)
    return chosen
