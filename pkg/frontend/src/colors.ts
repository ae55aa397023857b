/**
 * Color math mirrored from the backend: the red-to-orange index gradient
 * (banker's rounding, matching the server), role colors for matched
 * trajectories, and distinct location colors for topological overlays.
 */

export type Rgb = [number, number, number];

export const GRADIENT_START: Rgb = [255, 0, 0];
export const GRADIENT_END: Rgb = [255, 165, 0];

export const ROLE_COLORS: Record<string, string> = {
  primary: "#ff7f2a",
  "match-green": "#2e8b57",
  "match-indigo": "#4b0082",
};

export const LOOP_CLOSURE_COLOR = "#ff0000";
export const GROUND_TRUTH_COLOR = "#ffd700"; // yellow
export const TOP_MATCH_COLOR = "#1e90ff"; // blue

/** Round half to even, like the backend's rounding. */
export function roundHalfEven(x: number): number {
  const floor = Math.floor(x);
  const diff = x - floor;
  if (diff > 0.5) {
    return floor + 1;
  }
  if (diff < 0.5) {
    return floor;
  }
  return floor % 2 === 0 ? floor : floor + 1;
}

export function gradientColorForIndex(
  i: number,
  n: number,
  start: Rgb = GRADIENT_START,
  end: Rgb = GRADIENT_END
): Rgb {
  if (n < 1 || i < 0 || i >= n) {
    throw new Error("need 0 <= i < n and n >= 1");
  }
  if (n === 1) {
    return [...start] as Rgb;
  }
  const t = i / (n - 1);
  return [0, 1, 2].map((k) => roundHalfEven(start[k] + t * (end[k] - start[k]))) as Rgb;
}

/** Stable distinct color per location id (golden-angle hue walk). */
export function locationColor(locationId: number): string {
  const hue = (locationId * 137.50776405003785) % 360;
  return hslToHex(hue, 0.65, 0.5);
}

function hslToHex(h: number, s: number, l: number): string {
  const c = (1 - Math.abs(2 * l - 1)) * s;
  const hh = h / 60;
  const x = c * (1 - Math.abs((hh % 2) - 1));
  let rgb: [number, number, number];
  if (hh < 1) rgb = [c, x, 0];
  else if (hh < 2) rgb = [x, c, 0];
  else if (hh < 3) rgb = [0, c, x];
  else if (hh < 4) rgb = [0, x, c];
  else if (hh < 5) rgb = [x, 0, c];
  else rgb = [c, 0, x];
  const m = l - c / 2;
  const hex = rgb
    .map((v) => Math.round((v + m) * 255).toString(16).padStart(2, "0"))
    .join("");
  return "#" + hex;
}

export function rgbToHex([r, g, b]: Rgb): string {
  return (
    "#" + [r, g, b].map((v) => v.toString(16).padStart(2, "0")).join("")
  );
}
