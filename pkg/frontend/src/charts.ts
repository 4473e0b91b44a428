/** Strip-chart data extraction from the snapshot history. DOM-free. */

import type { Snapshot } from "./protocol.js";
import type { RingBuffer } from "./view.js";

export interface SeriesPoint {
  t: number;
  value: number;
}

export function series(
  history: RingBuffer<Snapshot>,
  select: (snapshot: Snapshot) => number,
): SeriesPoint[] {
  return history.map((snapshot) => ({ t: snapshot.time, value: select(snapshot) }));
}

export interface SeriesBounds {
  tMin: number;
  tMax: number;
  vMin: number;
  vMax: number;
}

export function seriesBounds(points: SeriesPoint[]): SeriesBounds | null {
  if (points.length === 0) return null;
  const first = points[0] as SeriesPoint;
  const bounds: SeriesBounds = { tMin: first.t, tMax: first.t, vMin: first.value, vMax: first.value };
  for (const p of points) {
    if (p.t < bounds.tMin) bounds.tMin = p.t;
    if (p.t > bounds.tMax) bounds.tMax = p.t;
    if (p.value < bounds.vMin) bounds.vMin = p.value;
    if (p.value > bounds.vMax) bounds.vMax = p.value;
  }
  return bounds;
}

/** Map points into pixel space for a width x height chart area.
 *
 * A fixed [vMin, vMax] range keeps axes stable (e.g. lambda in [0, 1]);
 * without one the range follows the data with a small pad.
 */
export function toPixels(
  points: SeriesPoint[],
  width: number,
  height: number,
  vRange?: [number, number],
): Array<[number, number]> {
  const bounds = seriesBounds(points);
  if (bounds === null) return [];
  let { vMin, vMax } = bounds;
  if (vRange) {
    [vMin, vMax] = vRange;
  } else if (vMax - vMin < 1e-9) {
    vMin -= 0.5;
    vMax += 0.5;
  }
  const tSpan = Math.max(bounds.tMax - bounds.tMin, 1e-9);
  const vSpan = vMax - vMin;
  return points.map((p) => [
    ((p.t - bounds.tMin) / tSpan) * width,
    height - ((p.value - vMin) / vSpan) * height,
  ]);
}
