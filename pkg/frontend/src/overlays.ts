/**
 * Overlay view models: topological-map recoloring with red loop-closure
 * segments, and the top-k retrieval table.
 */

import { LOOP_CLOSURE_COLOR, locationColor } from "./colors";
import { PoseDict, Vec3 } from "./wire";

export interface HtmapOverlayDoc {
  nodes: number[];
  loops: [number, number][];
}

export interface LoopSegment {
  a: Vec3;
  b: Vec3;
  color: string;
}

/** Per-pose colors: one distinct color per topological location id. */
export function htmapPoseColors(overlay: HtmapOverlayDoc): string[] {
  return overlay.nodes.map((id) => locationColor(id));
}

/** Red line segments connecting loop-closure pose pairs. */
export function htmapLoopSegments(
  overlay: HtmapOverlayDoc,
  poses: PoseDict[]
): LoopSegment[] {
  const segments: LoopSegment[] = [];
  for (const [a, b] of overlay.loops) {
    if (a < 0 || b < 0 || a >= poses.length || b >= poses.length) {
      throw new Error(`loop pair (${a}, ${b}) outside 0..${poses.length - 1}`);
    }
    segments.push({
      a: [...poses[a].position] as Vec3,
      b: [...poses[b].position] as Vec3,
      color: LOOP_CLOSURE_COLOR,
    });
  }
  return segments;
}

export interface RetrievalEpochDoc {
  step: number;
  shape: [number, number];
  distances: number[]; // row-major
  queryLabels: number[];
  galleryLabels: number[];
  indexToImage: Record<string, string>;
}

export interface TopkEntry {
  galleryIndex: number;
  distance: number;
  label: number;
  image: string | null;
  correct: boolean;
}

function row(epoch: RetrievalEpochDoc, queryRow: number): number[] {
  const [, ng] = epoch.shape;
  return epoch.distances.slice(queryRow * ng, (queryRow + 1) * ng);
}

/** k nearest gallery entries, ascending, ties toward the smaller index. */
export function topk(epoch: RetrievalEpochDoc, queryRow: number, k: number): TopkEntry[] {
  const [nq, ng] = epoch.shape;
  if (queryRow < 0 || queryRow >= nq) {
    throw new Error(`query row ${queryRow} out of range`);
  }
  if (k < 1 || k > ng) {
    throw new Error(`k=${k} outside 1..${ng}`);
  }
  const values = row(epoch, queryRow);
  const order = values
    .map((d, j) => [d, j] as [number, number])
    .sort((p, q) => (p[0] - q[0]) || (p[1] - q[1]))
    .slice(0, k);
  const queryLabel = epoch.queryLabels[queryRow];
  return order.map(([d, j]) => ({
    galleryIndex: j,
    distance: d,
    label: epoch.galleryLabels[j],
    image: epoch.indexToImage[String(j)] ?? null,
    correct: epoch.galleryLabels[j] === queryLabel,
  }));
}

export function topkAccuracy(epoch: RetrievalEpochDoc, k: number): number {
  const [nq] = epoch.shape;
  let hits = 0;
  for (let qi = 0; qi < nq; qi++) {
    if (topk(epoch, qi, k).some((e) => e.correct)) {
      hits += 1;
    }
  }
  return hits / nq;
}

export interface TopkTableRow {
  queryRow: number;
  queryLabel: number;
  entries: TopkEntry[];
}

/** The whole table for the slider-selected k; shrinking k keeps the prefix. */
export function topkTable(epoch: RetrievalEpochDoc, k: number): TopkTableRow[] {
  const [nq] = epoch.shape;
  const rows: TopkTableRow[] = [];
  for (let qi = 0; qi < nq; qi++) {
    rows.push({ queryRow: qi, queryLabel: epoch.queryLabels[qi], entries: topk(epoch, qi, k) });
  }
  return rows;
}

export interface ComparisonPane {
  groundTruthImage: string | null;
  topMatchImage: string | null;
  thumbnails: (string | null)[];
}

/** Selecting a table row shows ground truth above the top match. */
export function comparisonForRow(
  epoch: RetrievalEpochDoc,
  queryRow: number,
  thumbnails: number = 5
): ComparisonPane {
  const entries = topk(epoch, queryRow, Math.min(thumbnails, epoch.shape[1]));
  const gt = entries.find((e) => e.correct) ?? null;
  return {
    groundTruthImage: gt === null ? null : gt.image,
    topMatchImage: entries.length > 0 ? entries[0].image : null,
    thumbnails: entries.map((e) => e.image),
  };
}
