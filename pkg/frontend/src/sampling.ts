/**
 * Client-side mirror of the server's pose sampling, arithmetic-identical so
 * slider feedback is instant while exports stay byte-comparable with the
 * compute endpoint.
 */

import {
  canonicalStringify,
  Json,
  PoseDict,
  poseToJson,
  SamplingParamsDict,
  samplingParamsToJson,
  TrajectoryDict,
} from "./wire";

const TWO_PI = 2 * Math.PI;
const RAD_TO_DEG = 180 / Math.PI;

/** Absolute shortest-arc heading difference in radians, in [0, pi]. */
export function headingDifference(a: number, b: number): number {
  let d = Math.abs(a - b) % TWO_PI;
  if (d > Math.PI) {
    d = TWO_PI - d;
  }
  return d;
}

function planarStep(a: PoseDict, b: PoseDict): number {
  // sqrt(dx^2 + dy^2), matching the server exactly (sqrt is correctly
  // rounded; hypot is not guaranteed to be)
  const dx = b.position[0] - a.position[0];
  const dy = b.position[1] - a.position[1];
  return Math.sqrt(dx * dx + dy * dy);
}

function carry(acc: number, tau: number): number {
  return acc >= tau ? acc % tau : 0;
}

export function sampleUniform(poses: PoseDict[], tauD: number): number[] {
  if (poses.length === 0) {
    throw new Error("no poses to sample");
  }
  if (!(tauD > 0)) {
    throw new Error("tauD must be positive");
  }
  const selected = [0];
  let dAcc = 0;
  for (let k = 1; k < poses.length; k++) {
    dAcc += planarStep(poses[k - 1], poses[k]);
    if (dAcc >= tauD) {
      selected.push(k);
      dAcc = carry(dAcc, tauD);
    }
  }
  return selected;
}

export function sampleAdaptive(poses: PoseDict[], params: SamplingParamsDict): number[] {
  if (poses.length === 0) {
    throw new Error("no poses to sample");
  }
  if (!(params.tauD > 0) || !(params.tauTheta > 0)) {
    throw new Error("thresholds must be positive");
  }
  for (const pose of poses) {
    if (pose.orientation === null) {
      throw new Error(`pose ${pose.index} has no heading`);
    }
  }
  const selected = [0];
  let dAcc = 0;
  let thetaAcc = 0;
  for (let k = 1; k < poses.length; k++) {
    dAcc += planarStep(poses[k - 1], poses[k]);
    thetaAcc +=
      headingDifference(poses[k - 1].orientation![2], poses[k].orientation![2]) *
      RAD_TO_DEG;
    if (dAcc >= params.tauD || thetaAcc >= params.tauTheta) {
      selected.push(k);
      dAcc = carry(dAcc, params.tauD);
      thetaAcc = carry(thetaAcc, params.tauTheta);
    }
  }
  return selected;
}

export function samplePoses(poses: PoseDict[], params: SamplingParamsDict): number[] {
  return params.mode === "uniform"
    ? sampleUniform(poses, params.tauD)
    : sampleAdaptive(poses, params);
}

export interface SampleRecompute {
  selectedIndices: number[];
  /** per-pose highlight flags for re-coloring the scene */
  highlighted: boolean[];
  count: number;
}

/** One slider tick: recompute the selection and the highlight mask. */
export function recomputeSampling(
  poses: PoseDict[],
  params: SamplingParamsDict
): SampleRecompute {
  const selectedIndices = samplePoses(poses, params);
  const highlighted = new Array<boolean>(poses.length).fill(false);
  for (const i of selectedIndices) {
    highlighted[i] = true;
  }
  return { selectedIndices, highlighted, count: selectedIndices.length };
}

/** The export document, byte-identical to POST /api/compute/sample. */
export function buildSampleExport(
  trajectory: TrajectoryDict,
  params: SamplingParamsDict,
  selectedIndices: number[]
): string {
  const doc: Json = {
    schemaVersion: 1,
    trajectoryId: trajectory.id,
    params: samplingParamsToJson(params),
    selectedIndices: [...selectedIndices],
    totalCandidates: trajectory.poses.length,
    poses: selectedIndices.map((i) => poseToJson(trajectory.poses[i])),
  };
  return canonicalStringify(doc);
}
