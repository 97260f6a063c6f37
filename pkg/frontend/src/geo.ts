import type { GeoCircle, GeoPoint } from "./types.js";

const EARTH_RADIUS_M = 6371000;

export function haversineM(a: GeoPoint, b: GeoPoint): number {
  const rad = (d: number) => (d * Math.PI) / 180;
  const dPhi = rad(b.lat - a.lat);
  const dLam = rad(b.lon - a.lon);
  const h =
    Math.sin(dPhi / 2) ** 2 +
    Math.cos(rad(a.lat)) * Math.cos(rad(b.lat)) * Math.sin(dLam / 2) ** 2;
  return 2 * EARTH_RADIUS_M * Math.asin(Math.sqrt(h));
}

/** Boundary-inclusive containment, mirroring the server's geofence. */
export function circleContains(circle: GeoCircle, p: GeoPoint): boolean {
  return haversineM(circle.center, p) <= circle.radiusM;
}
