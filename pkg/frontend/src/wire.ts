/**
 * Wire types for the trajectory server plus a canonical JSON serializer that
 * reproduces the backend's byte format exactly: keys sorted, no whitespace,
 * integral floats as integers, non-ASCII escaped, backend float rendering.
 */

export type Vec3 = [number, number, number];

export interface GpsDict {
  lat: number;
  lon: number;
}

export interface PoseDict {
  index: number;
  timestamp: number;
  position: Vec3;
  orientation: Vec3 | null;
  gps: GpsDict | null;
  altitude: number | null;
  imageIndex: number | null;
  image: string | null;
}

export interface TrajectoryDict {
  schemaVersion: number;
  id: string;
  sourceFormat: string;
  origin: GpsDict | null;
  poses: PoseDict[];
  imageManifest: [number, string][];
  pointCloudUrl: string | null;
}

export interface SamplingParamsDict {
  mode: "uniform" | "adaptive";
  tauD: number;
  tauTheta: number;
}

export interface MatchParamsDict {
  alpha: number;
  beta: number;
  tauBetaTheta: number;
  tauBetaD: number;
  tauLoss: number;
  maxDistance: number;
}

export interface CorrespondenceDict {
  queryIndex: number;
  matchIndex: number;
  loss: number;
  deltaD: number;
  deltaTheta: number;
}

export interface MatchExportDict {
  schemaVersion: number;
  queryId: string;
  candidateId: string;
  params: MatchParamsDict;
  pairs: CorrespondenceDict[];
}

export type Json = null | boolean | number | string | Json[] | { [key: string]: Json };

const MAX_SAFE = 2 ** 53;

/**
 * Render one finite double exactly the way the backend does: integral values
 * below 2^53 as integers, otherwise shortest-round-trip digits with fixed
 * notation for decimal exponents in (-4, 16] and a two-digit exponent
 * otherwise.
 */
export function formatNumber(v: number): string {
  if (!Number.isFinite(v)) {
    throw new Error("non-finite value cannot be serialized");
  }
  if (Number.isInteger(v) && Math.abs(v) < MAX_SAFE) {
    return Object.is(v, -0) ? "0" : String(v);
  }
  const exp = v.toExponential(); // shortest digits that round-trip
  const m = exp.match(/^(-?)(\d)(?:\.(\d+))?e([+-]\d+)$/);
  if (!m) {
    throw new Error(`unexpected exponential form ${exp}`);
  }
  const sign = m[1];
  const digits = m[2] + (m[3] ?? "");
  const decpt = parseInt(m[4], 10) + 1; // decimal point position in digits
  if (decpt > -4 && decpt <= 16) {
    if (decpt <= 0) {
      return sign + "0." + "0".repeat(-decpt) + digits;
    }
    if (decpt >= digits.length) {
      return sign + digits + "0".repeat(decpt - digits.length) + ".0";
    }
    return sign + digits.slice(0, decpt) + "." + digits.slice(decpt);
  }
  const mantissa = digits.length > 1 ? digits[0] + "." + digits.slice(1) : digits;
  const e = decpt - 1;
  const eAbs = Math.abs(e);
  const ePad = eAbs < 10 ? "0" + eAbs : String(eAbs);
  return sign + mantissa + "e" + (e < 0 ? "-" : "+") + ePad;
}

function formatString(s: string): string {
  // JSON.stringify handles quoting/control chars; escape non-ASCII like the
  // backend's ensure_ascii serializer
  return JSON.stringify(s).replace(/[-￿]/g, (ch) => {
    return "\\u" + ch.charCodeAt(0).toString(16).padStart(4, "0");
  });
}

/** Canonical stringify: sorted keys, compact separators, backend numbers. */
export function canonicalStringify(value: Json): string {
  if (value === null) {
    return "null";
  }
  if (typeof value === "boolean") {
    return value ? "true" : "false";
  }
  if (typeof value === "number") {
    return formatNumber(value);
  }
  if (typeof value === "string") {
    return formatString(value);
  }
  if (Array.isArray(value)) {
    return "[" + value.map(canonicalStringify).join(",") + "]";
  }
  const keys = Object.keys(value).sort();
  const parts = keys.map((k) => formatString(k) + ":" + canonicalStringify(value[k]));
  return "{" + parts.join(",") + "}";
}

/** Rebuild a pose object with exactly the schema's keys, in any source order. */
export function poseToJson(pose: PoseDict): Json {
  return {
    index: pose.index,
    timestamp: pose.timestamp,
    position: [...pose.position],
    orientation: pose.orientation === null ? null : [...pose.orientation],
    gps: pose.gps === null ? null : { lat: pose.gps.lat, lon: pose.gps.lon },
    altitude: pose.altitude,
    imageIndex: pose.imageIndex,
    image: pose.image,
  };
}

export function samplingParamsToJson(params: SamplingParamsDict): Json {
  return { mode: params.mode, tauD: params.tauD, tauTheta: params.tauTheta };
}
