/**
 * View models for the info panel, image panel and minimap. Pure data in,
 * pure data out; the DOM layer just renders these.
 *
 * The minimap and the external map links exist only for poses that carry
 * GPS; local-frame-only datasets fall back to local coordinates in the
 * info panel.
 */

import { PoseDict } from "./wire";

const RAD_TO_DEG = 180 / Math.PI;
const MINIMAP_ZOOM = 17;

export interface TileRef {
  z: number;
  x: number;
  y: number;
  url: string;
}

export interface MinimapModel {
  visible: boolean;
  center?: TileRef;
  /** marker offset inside the center tile, unit square */
  markerU?: number;
  markerV?: number;
}

export interface PanelModel {
  infoRows: [string, string][];
  imageUrl: string | null;
  minimap: MinimapModel;
  mapsUrl: string | null;
  streetViewUrl: string | null;
}

/** Compass heading in degrees from our counter-clockwise yaw. */
export function compassHeadingDeg(yawRad: number): number {
  const deg = -yawRad * RAD_TO_DEG;
  return ((deg % 360) + 360) % 360;
}

/** Slippy-map tile coordinates for a GPS fix. */
export function tileForCoordinate(
  lat: number,
  lon: number,
  zoom: number = MINIMAP_ZOOM
): { x: number; y: number; u: number; v: number } {
  const n = 2 ** zoom;
  const xf = ((lon + 180) / 360) * n;
  const latRad = (lat * Math.PI) / 180;
  const yf = ((1 - Math.log(Math.tan(latRad) + 1 / Math.cos(latRad)) / Math.PI) / 2) * n;
  const x = Math.floor(xf);
  const y = Math.floor(yf);
  return { x, y, u: xf - x, v: yf - y };
}

export function tileUrl(z: number, x: number, y: number): string {
  return `https://tile.openstreetmap.org/${z}/${x}/${y}.png`;
}

export function buildPanelModel(trajectoryId: string, pose: PoseDict): PanelModel {
  const rows: [string, string][] = [
    ["index", String(pose.index)],
    ["timestamp", pose.timestamp.toFixed(3)],
  ];
  if (pose.gps !== null) {
    rows.push(["latitude", pose.gps.lat.toFixed(7)]);
    rows.push(["longitude", pose.gps.lon.toFixed(7)]);
  } else {
    rows.push(["x", pose.position[0].toFixed(3)]);
    rows.push(["y", pose.position[1].toFixed(3)]);
    rows.push(["z", pose.position[2].toFixed(3)]);
  }
  if (pose.altitude !== null) {
    rows.push(["altitude", pose.altitude.toFixed(2) + " m"]);
  }
  if (pose.orientation !== null) {
    rows.push(["heading", compassHeadingDeg(pose.orientation[2]).toFixed(1) + "°"]);
  }

  const imageUrl =
    pose.image === null ? null : `/api/images/${trajectoryId}/${pose.image}`;

  let minimap: MinimapModel = { visible: false };
  let mapsUrl: string | null = null;
  let streetViewUrl: string | null = null;
  if (pose.gps !== null) {
    const { lat, lon } = pose.gps;
    const tile = tileForCoordinate(lat, lon);
    minimap = {
      visible: true,
      center: { z: MINIMAP_ZOOM, x: tile.x, y: tile.y, url: tileUrl(MINIMAP_ZOOM, tile.x, tile.y) },
      markerU: tile.u,
      markerV: tile.v,
    };
    mapsUrl = `https://www.google.com/maps/search/?api=1&query=${lat},${lon}`;
    if (pose.orientation !== null) {
      const heading = compassHeadingDeg(pose.orientation[2]).toFixed(1);
      streetViewUrl =
        `https://www.google.com/maps/@?api=1&map_action=pano` +
        `&viewpoint=${lat},${lon}&heading=${heading}`;
    } else {
      streetViewUrl = `https://www.google.com/maps/@?api=1&map_action=pano&viewpoint=${lat},${lon}`;
    }
  }

  return { infoRows: rows, imageUrl, minimap, mapsUrl, streetViewUrl };
}
