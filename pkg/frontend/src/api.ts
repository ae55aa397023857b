/**
 * Typed fetch client for the trajectory server. The viewer consumes the
 * HTTP API exclusively; nothing here parses dataset files.
 */

import { MatchExportDict, SamplingParamsDict, TrajectoryDict } from "./wire";

export interface DatasetEntry {
  id: string;
  format: string;
  trajectoryCount: number;
}

async function getJson<T>(url: string): Promise<T> {
  const response = await fetch(url);
  if (!response.ok) {
    throw new Error(`GET ${url} -> ${response.status}`);
  }
  return (await response.json()) as T;
}

export async function listDatasets(): Promise<DatasetEntry[]> {
  return getJson<DatasetEntry[]>("/api/datasets");
}

export async function getTrajectory(
  id: string,
  options: { interpolate?: boolean; offsets?: string } = {}
): Promise<TrajectoryDict> {
  const params = new URLSearchParams();
  if (options.interpolate) {
    params.set("interpolate", "true");
  }
  if (options.offsets) {
    params.set("offsets", options.offsets);
  }
  const query = params.toString();
  return getJson<TrajectoryDict>(
    `/api/trajectories/${id}` + (query ? `?${query}` : "")
  );
}

/** Raw body for byte-comparison with the client-side export. */
export async function computeSampleRaw(
  trajectoryId: string,
  params: SamplingParamsDict
): Promise<string> {
  const response = await fetch("/api/compute/sample", {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify({ trajectoryId, params }),
  });
  if (!response.ok) {
    throw new Error(`compute/sample -> ${response.status}`);
  }
  return await response.text();
}

export async function computeMatch(
  queryId: string,
  candidateId: string,
  params: Partial<MatchExportDict["params"]> = {}
): Promise<MatchExportDict> {
  const response = await fetch("/api/compute/match", {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify({ queryId, candidateId, params }),
  });
  if (!response.ok) {
    throw new Error(`compute/match -> ${response.status}`);
  }
  return (await response.json()) as MatchExportDict;
}

export async function getPointCloud(trajectoryId: string): Promise<Float32Array> {
  const response = await fetch(`/api/pointcloud/${trajectoryId}`);
  if (!response.ok) {
    throw new Error(`pointcloud -> ${response.status}`);
  }
  const buffer = await response.arrayBuffer();
  const view = new DataView(buffer);
  const count = Number(view.getBigUint64(0, true));
  return new Float32Array(buffer, 8, count * 3);
}

export async function putSettings(name: string, body: string): Promise<void> {
  const response = await fetch(`/api/settings/${name}`, {
    method: "PUT",
    headers: { "content-type": "application/json" },
    body,
  });
  if (!response.ok) {
    throw new Error(`PUT settings -> ${response.status}`);
  }
}

export async function getSettings(name: string): Promise<string> {
  const response = await fetch(`/api/settings/${name}`);
  if (!response.ok) {
    throw new Error(`GET settings -> ${response.status}`);
  }
  return await response.text();
}
