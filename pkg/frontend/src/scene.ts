/**
 * three.js scene construction: one low-poly car marker per pose with
 * gradient or role coloring, point clouds colored by depth, and overlay
 * geometry. Scene-graph only; the renderer lives in main.ts.
 */

import * as THREE from "three";

import { ColorRole } from "./state";
import { gradientColorForIndex, ROLE_COLORS, rgbToHex } from "./colors";
import { LoopSegment } from "./overlays";
import { PoseDict, TrajectoryDict } from "./wire";

export const SELECTION_COLOR = 0x111111;
export const HIGHLIGHT_COLOR = 0xffffff;

/** A boxy car glyph: body plus cabin, nose pointing +y. */
export function carGeometry(scale: number = 1): THREE.BufferGeometry {
  const body = new THREE.BoxGeometry(1.6 * scale, 3.6 * scale, 1.0 * scale);
  body.translate(0, 0, 0.5 * scale);
  return body;
}

export interface TrajectorySceneOptions {
  colorRole: ColorRole;
  zTimeRate: number;
  markerScale: number;
}

const DEFAULTS: TrajectorySceneOptions = {
  colorRole: "primary",
  zTimeRate: 0,
  markerScale: 1,
};

function poseColor(role: ColorRole, index: number, count: number): THREE.Color {
  if (role === "primary") {
    return new THREE.Color(rgbToHex(gradientColorForIndex(index, count)));
  }
  return new THREE.Color(ROLE_COLORS[role]);
}

function poseZ(pose: PoseDict, zTimeRate: number): number {
  return zTimeRate > 0 ? zTimeRate * pose.index : pose.position[2];
}

/**
 * Build one instanced marker group for a trajectory. userData carries the
 * trajectory id and per-instance base colors so selection highlighting and
 * z-rate changes can restyle without refetching.
 */
export function buildTrajectoryGroup(
  trajectory: TrajectoryDict,
  options: Partial<TrajectorySceneOptions> = {}
): THREE.Group {
  const opts = { ...DEFAULTS, ...options };
  const poses = trajectory.poses;
  const mesh = new THREE.InstancedMesh(
    carGeometry(opts.markerScale),
    new THREE.MeshLambertMaterial(),
    poses.length
  );
  const matrix = new THREE.Matrix4();
  const baseColors: THREE.Color[] = [];
  poses.forEach((pose, i) => {
    const yaw = pose.orientation === null ? 0 : pose.orientation[2];
    matrix.makeRotationZ(-yaw);
    matrix.setPosition(pose.position[0], pose.position[1], poseZ(pose, opts.zTimeRate));
    mesh.setMatrixAt(i, matrix);
    const color = poseColor(opts.colorRole, i, poses.length);
    baseColors.push(color);
    mesh.setColorAt(i, color);
  });
  mesh.instanceMatrix.needsUpdate = true;
  if (mesh.instanceColor) {
    mesh.instanceColor.needsUpdate = true;
  }
  const group = new THREE.Group();
  group.add(mesh);
  group.userData = {
    trajectoryId: trajectory.id,
    poses,
    baseColors,
    markers: mesh,
  };
  return group;
}

/** Re-place markers for a new z-time rate without refetching anything. */
export function applyZTimeRate(group: THREE.Group, zTimeRate: number): void {
  const mesh = group.userData.markers as THREE.InstancedMesh;
  const poses = group.userData.poses as PoseDict[];
  const matrix = new THREE.Matrix4();
  poses.forEach((pose, i) => {
    mesh.getMatrixAt(i, matrix);
    const yaw = pose.orientation === null ? 0 : pose.orientation[2];
    matrix.makeRotationZ(-yaw);
    matrix.setPosition(pose.position[0], pose.position[1], poseZ(pose, zTimeRate));
    mesh.setMatrixAt(i, matrix);
  });
  mesh.instanceMatrix.needsUpdate = true;
}

/** Restyle markers: sampling highlights, selection, or overlay colors. */
export function restyleMarkers(
  group: THREE.Group,
  styler: (index: number, base: THREE.Color) => THREE.Color
): void {
  const mesh = group.userData.markers as THREE.InstancedMesh;
  const baseColors = group.userData.baseColors as THREE.Color[];
  baseColors.forEach((base, i) => {
    mesh.setColorAt(i, styler(i, base));
  });
  if (mesh.instanceColor) {
    mesh.instanceColor.needsUpdate = true;
  }
}

/** Loop-closure overlay: red segments between matched pose pairs. */
export function buildLoopSegments(segments: LoopSegment[]): THREE.LineSegments {
  const positions = new Float32Array(segments.length * 6);
  const colors = new Float32Array(segments.length * 6);
  segments.forEach((segment, i) => {
    positions.set([...segment.a, ...segment.b], i * 6);
    const c = new THREE.Color(segment.color);
    colors.set([c.r, c.g, c.b, c.r, c.g, c.b], i * 6);
  });
  const geometry = new THREE.BufferGeometry();
  geometry.setAttribute("position", new THREE.BufferAttribute(positions, 3));
  geometry.setAttribute("color", new THREE.BufferAttribute(colors, 3));
  const material = new THREE.LineBasicMaterial({ vertexColors: true });
  const lines = new THREE.LineSegments(geometry, material);
  lines.userData = { kind: "loop-closures", count: segments.length };
  return lines;
}

/** Point cloud from the binary endpoint, viridis-colored by depth. */
export function buildPointCloud(
  xyz: Float32Array,
  viridis: (u: number) => [number, number, number],
  normalize: (depths: number[]) => number[],
  pointSize: number = 0.5
): THREE.Points {
  const count = Math.floor(xyz.length / 3);
  const depths: number[] = [];
  for (let i = 0; i < count; i++) {
    const x = xyz[3 * i];
    const y = xyz[3 * i + 1];
    const z = xyz[3 * i + 2];
    depths.push(Math.sqrt(x * x + y * y + z * z));
  }
  const units = count > 0 ? normalize(depths) : [];
  const colors = new Float32Array(count * 3);
  for (let i = 0; i < count; i++) {
    const [r, g, b] = viridis(units[i]);
    colors[3 * i] = r / 255;
    colors[3 * i + 1] = g / 255;
    colors[3 * i + 2] = b / 255;
  }
  const geometry = new THREE.BufferGeometry();
  geometry.setAttribute("position", new THREE.BufferAttribute(xyz, 3));
  geometry.setAttribute("color", new THREE.BufferAttribute(colors, 3));
  return new THREE.Points(
    geometry,
    new THREE.PointsMaterial({ size: pointSize, vertexColors: true })
  );
}
