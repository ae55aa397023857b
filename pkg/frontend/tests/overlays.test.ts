import { describe, expect, it } from "vitest";

import {
  comparisonForRow,
  htmapLoopSegments,
  htmapPoseColors,
  RetrievalEpochDoc,
  topk,
  topkAccuracy,
  topkTable,
} from "../src/overlays";
import { PoseDict } from "../src/wire";

function posesOnLine(n: number): PoseDict[] {
  return Array.from({ length: n }, (_, i) => ({
    index: i,
    timestamp: i,
    position: [i, 0, 0] as [number, number, number],
    orientation: [0, 0, 0] as [number, number, number],
    gps: null,
    altitude: null,
    imageIndex: null,
    image: null,
  }));
}

describe("topological overlay", () => {
  it("assigns one distinct color per location id", () => {
    const overlay = { nodes: [0, 0, 1, 1, 2], loops: [] as [number, number][] };
    const colors = htmapPoseColors(overlay);
    expect(colors[0]).toBe(colors[1]);
    expect(new Set(colors).size).toBe(3);
  });

  it("builds red segments for each loop pair", () => {
    const overlay = { nodes: new Array(100).fill(0), loops: [[0, 99], [10, 89]] as [number, number][] };
    const segments = htmapLoopSegments(overlay, posesOnLine(100));
    expect(segments).toHaveLength(2);
    for (const segment of segments) {
      expect(segment.color).toBe("#ff0000");
    }
    expect(segments[0].a).toEqual([0, 0, 0]);
    expect(segments[0].b).toEqual([99, 0, 0]);
  });

  it("rejects out-of-range loop indices", () => {
    const overlay = { nodes: new Array(10).fill(0), loops: [[0, 20]] as [number, number][] };
    expect(() => htmapLoopSegments(overlay, posesOnLine(10))).toThrow(/outside/);
  });
});

const epoch: RetrievalEpochDoc = {
  step: 7,
  shape: [3, 4],
  distances: [0.1, 5, 6, 7, 4, 0.5, 3, 9, 2, 2, 5, 1],
  queryLabels: [0, 1, 2],
  galleryLabels: [0, 9, 1, 3],
  indexToImage: { "0": "g0.jpg", "1": "g1.jpg", "2": "g2.jpg", "3": "g3.jpg" },
};

describe("top-k table", () => {
  it("sorts ascending with index tie-break", () => {
    const tie: RetrievalEpochDoc = {
      ...epoch,
      shape: [1, 3],
      distances: [2, 2, 5],
      queryLabels: [0],
      galleryLabels: [0, 1, 2],
    };
    const entries = topk(tie, 0, 2);
    expect(entries.map((e) => e.galleryIndex)).toEqual([0, 1]);
  });

  it("shrinking k keeps the prefix", () => {
    const at5 = topkTable(epoch, 4);
    const at3 = topkTable(epoch, 3);
    for (let row = 0; row < 3; row++) {
      expect(at3[row].entries).toEqual(at5[row].entries.slice(0, 3));
    }
  });

  it("accuracy is monotone in k and hits 2/3 at k=2", () => {
    expect(topkAccuracy(epoch, 1)).toBeCloseTo(1 / 3, 12);
    expect(topkAccuracy(epoch, 2)).toBeCloseTo(2 / 3, 12);
    const values = [1, 2, 3, 4].map((k) => topkAccuracy(epoch, k));
    for (let i = 1; i < values.length; i++) {
      expect(values[i]).toBeGreaterThanOrEqual(values[i - 1]);
    }
  });

  it("comparison pane shows ground truth and top match", () => {
    const pane = comparisonForRow(epoch, 0, 4);
    expect(pane.topMatchImage).toBe("g0.jpg");
    expect(pane.groundTruthImage).toBe("g0.jpg");
    expect(pane.thumbnails).toHaveLength(4);
  });

  it("validates k and row bounds", () => {
    expect(() => topk(epoch, 0, 0)).toThrow();
    expect(() => topk(epoch, 0, 9)).toThrow();
    expect(() => topk(epoch, 5, 1)).toThrow();
  });
});
