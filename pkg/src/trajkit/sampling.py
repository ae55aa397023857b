"""Pose decimation: uniform distance-threshold sampling and the adaptive
variant that also triggers on accumulated heading change, so turns keep
their visually distinct poses.

Both samplers walk the sequence once in timestamp order and never bin by
location, which preserves poses on overlapping routes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

from trajkit.model import (
    EmptyTrajectory,
    MissingHeading,
    Pose,
    heading_difference,
    planar_distance,
)

SAMPLING_MODES = ("uniform", "adaptive")


@dataclass(frozen=True)
class SamplingParams:
    """Thresholds for sampling: tau_d in meters, tau_theta in degrees."""

    mode: str = "uniform"
    tau_d: float = 12.0
    tau_theta: float = 15.0

    def __post_init__(self):
        if self.mode not in SAMPLING_MODES:
            raise ValueError(f"unknown sampling mode {self.mode!r}")
        if not self.tau_d > 0.0:
            raise ValueError("tau_d must be positive")
        if self.mode == "adaptive" and not self.tau_theta > 0.0:
            raise ValueError("tau_theta must be positive for adaptive sampling")


@dataclass(frozen=True)
class SampleResult:
    selected_indices: tuple
    total_candidates: int
    params: SamplingParams

    def __post_init__(self):
        object.__setattr__(self, "selected_indices", tuple(self.selected_indices))


def _carry(acc: float, tau: float) -> float:
    # Overshoot past the threshold carries into the next window instead of
    # being discarded, so the average sampling rate tracks tau exactly even
    # when steps do not divide it. An accumulator that did not reach its
    # threshold restarts from zero at the selected pose.
    return math.fmod(acc, tau) if acc >= tau else 0.0


def sample_uniform(poses: Sequence[Pose], tau_d: float) -> SampleResult:
    """Select the first pose, then one pose per tau_d meters of travel."""
    if not poses:
        raise EmptyTrajectory("no poses to sample")
    if not tau_d > 0.0:
        raise ValueError("tau_d must be positive")
    selected = [0]
    d_acc = 0.0
    for k in range(1, len(poses)):
        d_acc += planar_distance(poses[k - 1], poses[k])
        if d_acc >= tau_d:
            selected.append(k)
            d_acc = _carry(d_acc, tau_d)
    return SampleResult(
        selected_indices=tuple(selected),
        total_candidates=len(poses),
        params=SamplingParams(mode="uniform", tau_d=tau_d),
    )


def sample_adaptive(poses: Sequence[Pose], params: SamplingParams) -> SampleResult:
    """Select when accumulated distance reaches tau_d OR accumulated heading
    change reaches tau_theta degrees, resetting both windows at each pick.

    On a zero-curvature trajectory this reduces exactly to sample_uniform.
    """
    if not poses:
        raise EmptyTrajectory("no poses to sample")
    if params.mode != "adaptive":
        params = SamplingParams(mode="adaptive", tau_d=params.tau_d, tau_theta=params.tau_theta)
    for pose in poses:
        if pose.orientation is None:
            raise MissingHeading(f"pose {pose.index} has no heading")
    selected = [0]
    d_acc = 0.0
    theta_acc = 0.0
    for k in range(1, len(poses)):
        d_acc += planar_distance(poses[k - 1], poses[k])
        theta_acc += math.degrees(
            heading_difference(poses[k - 1].orientation[2], poses[k].orientation[2])
        )
        if d_acc >= params.tau_d or theta_acc >= params.tau_theta:
            selected.append(k)
            d_acc = _carry(d_acc, params.tau_d)
            theta_acc = _carry(theta_acc, params.tau_theta)
    return SampleResult(
        selected_indices=tuple(selected), total_candidates=len(poses), params=params
    )


def sample(poses: Sequence[Pose], params: SamplingParams) -> SampleResult:
    """Dispatch on params.mode."""
    if params.mode == "uniform":
        return sample_uniform(poses, params.tau_d)
    return sample_adaptive(poses, params)
