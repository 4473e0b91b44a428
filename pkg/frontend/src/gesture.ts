/** Drag-to-force mapping for the guidance canvas.
 *
 * A drag vector in canvas pixels becomes a wrench in newtons: the vector
 * is normalized by the canvas size, scaled at NEWTONS_PER_UNIT, and the
 * magnitude capped at FORCE_CAP_N. Screen y points down, world y up, so
 * the y component flips sign. DOM-free.
 */

export const NEWTONS_PER_UNIT = 100;
export const FORCE_CAP_N = 50;

export function dragToForce(
  dxPx: number,
  dyPx: number,
  canvasSizePx: number,
  newtonsPerUnit: number = NEWTONS_PER_UNIT,
  capNewtons: number = FORCE_CAP_N,
): [number, number] {
  if (!(canvasSizePx > 0) || !Number.isFinite(dxPx) || !Number.isFinite(dyPx)) {
    return [0, 0];
  }
  let fx = (dxPx / canvasSizePx) * newtonsPerUnit;
  let fy = (-dyPx / canvasSizePx) * newtonsPerUnit;
  const magnitude = Math.hypot(fx, fy);
  if (magnitude > capNewtons) {
    const scale = capNewtons / magnitude;
    fx *= scale;
    fy *= scale;
  }
  // adding zero folds -0 into +0 so a pure-x drag is exactly [f, 0]
  return [fx + 0, fy + 0];
}
