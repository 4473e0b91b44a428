/** Canvas drawing: 2-D workcell view and strip charts. Browser-only. */

import { toPixels, type SeriesPoint } from "./charts.js";
import type { Snapshot } from "./protocol.js";
import type { ConsoleView } from "./view.js";

export interface Geometry {
  linkLengths: number[];
  probeRadius: number;
}

export interface DragPreview {
  f: [number, number];
}

const COLORS = {
  grid: "#2a3140",
  link: "#9fb4d0",
  joint: "#d7e3f4",
  desired: "#5a82c2",
  compliant: "#6fd08c",
  object: "#c9a227",
  grasped: "#e07a3f",
  force: "#e0564f",
  text: "#8fa1b8",
};

export function renderWorkcell(
  ctx: CanvasRenderingContext2D,
  width: number,
  height: number,
  view: ConsoleView,
  geometry: Geometry,
  drag: DragPreview | null,
): void {
  ctx.clearRect(0, 0, width, height);
  const reach = geometry.linkLengths.reduce((a, b) => a + b, 0) || 1;
  const scale = Math.min(width, height) / (2.3 * reach);
  const cx = width / 2;
  const cy = height * 0.62;
  const px = (p: readonly number[]): [number, number] => [
    cx + (p[0] ?? 0) * scale,
    cy - (p[1] ?? 0) * scale,
  ];

  ctx.strokeStyle = COLORS.grid;
  ctx.lineWidth = 1;
  ctx.beginPath();
  ctx.moveTo(0, cy);
  ctx.lineTo(width, cy);
  ctx.moveTo(cx, 0);
  ctx.lineTo(cx, height);
  ctx.stroke();

  drawTrace(ctx, view, (s) => s.compliance.x_d, px, COLORS.desired, [6, 4]);
  drawTrace(ctx, view, (s) => s.compliance.x_c, px, COLORS.compliant, null);

  const snapshot = view.latest;
  if (snapshot === null) return;

  for (const obj of snapshot.world.objects) {
    const [ox, oy] = px(obj.position);
    ctx.beginPath();
    ctx.arc(ox, oy, Math.max(obj.radius * scale, 3), 0, Math.PI * 2);
    ctx.fillStyle = obj.grasped ? COLORS.grasped : COLORS.object;
    ctx.fill();
    ctx.fillStyle = COLORS.text;
    ctx.font = "11px sans-serif";
    ctx.fillText(obj.id, ox + 8, oy - 8);
  }

  const q0 = snapshot.world.q[0] ?? 0;
  const l1 = geometry.linkLengths[0] ?? 0.5;
  const elbow: [number, number] = [l1 * Math.cos(q0), l1 * Math.sin(q0)];
  const base = px([0, 0]);
  const elbowPx = px(elbow);
  const eePx = px(snapshot.world.ee);

  ctx.strokeStyle = COLORS.link;
  ctx.lineWidth = 5;
  ctx.lineCap = "round";
  ctx.beginPath();
  ctx.moveTo(base[0], base[1]);
  ctx.lineTo(elbowPx[0], elbowPx[1]);
  ctx.lineTo(eePx[0], eePx[1]);
  ctx.stroke();
  for (const [jx, jy] of [base, elbowPx]) {
    ctx.beginPath();
    ctx.arc(jx, jy, 5, 0, Math.PI * 2);
    ctx.fillStyle = COLORS.joint;
    ctx.fill();
  }
  ctx.beginPath();
  ctx.arc(eePx[0], eePx[1], Math.max(geometry.probeRadius * scale, 4), 0, Math.PI * 2);
  ctx.strokeStyle = COLORS.compliant;
  ctx.lineWidth = 2;
  ctx.stroke();

  const force = drag?.f ?? (snapshot.wrench as [number, number]);
  const magnitude = Math.hypot(force[0] ?? 0, force[1] ?? 0);
  if (magnitude > 0.05) {
    const arrow = (0.2 + (magnitude / 50) * 0.6) * reach * scale;
    const ux = (force[0] ?? 0) / magnitude;
    const uy = (force[1] ?? 0) / magnitude;
    drawArrow(ctx, eePx, [eePx[0] + ux * arrow, eePx[1] - uy * arrow], COLORS.force);
    ctx.fillStyle = COLORS.force;
    ctx.font = "11px sans-serif";
    ctx.fillText(`${magnitude.toFixed(1)} N`, eePx[0] + ux * arrow + 6, eePx[1] - uy * arrow);
  }
}

function drawTrace(
  ctx: CanvasRenderingContext2D,
  view: ConsoleView,
  select: (s: Snapshot) => number[],
  px: (p: readonly number[]) => [number, number],
  color: string,
  dash: number[] | null,
): void {
  if (view.history.length < 2) return;
  ctx.strokeStyle = color;
  ctx.lineWidth = 1.5;
  ctx.setLineDash(dash ?? []);
  ctx.beginPath();
  for (let i = 0; i < view.history.length; i++) {
    const [x, y] = px(select(view.history.at(i)));
    if (i === 0) ctx.moveTo(x, y);
    else ctx.lineTo(x, y);
  }
  ctx.stroke();
  ctx.setLineDash([]);
}

function drawArrow(
  ctx: CanvasRenderingContext2D,
  from: [number, number],
  to: [number, number],
  color: string,
): void {
  const angle = Math.atan2(to[1] - from[1], to[0] - from[0]);
  ctx.strokeStyle = color;
  ctx.fillStyle = color;
  ctx.lineWidth = 2;
  ctx.beginPath();
  ctx.moveTo(from[0], from[1]);
  ctx.lineTo(to[0], to[1]);
  ctx.stroke();
  ctx.beginPath();
  ctx.moveTo(to[0], to[1]);
  ctx.lineTo(to[0] - 9 * Math.cos(angle - 0.4), to[1] - 9 * Math.sin(angle - 0.4));
  ctx.lineTo(to[0] - 9 * Math.cos(angle + 0.4), to[1] - 9 * Math.sin(angle + 0.4));
  ctx.closePath();
  ctx.fill();
}

export function drawStrip(
  ctx: CanvasRenderingContext2D,
  width: number,
  height: number,
  points: SeriesPoint[],
  color: string,
  label: string,
  vRange?: [number, number],
): void {
  ctx.clearRect(0, 0, width, height);
  ctx.strokeStyle = COLORS.grid;
  ctx.lineWidth = 1;
  ctx.strokeRect(0.5, 0.5, width - 1, height - 1);
  const pixels = toPixels(points, width - 8, height - 8, vRange);
  if (pixels.length >= 2) {
    ctx.strokeStyle = color;
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    pixels.forEach(([x, y], i) => {
      if (i === 0) ctx.moveTo(x + 4, y + 4);
      else ctx.lineTo(x + 4, y + 4);
    });
    ctx.stroke();
  }
  ctx.fillStyle = COLORS.text;
  ctx.font = "11px sans-serif";
  const last = points.length > 0 ? (points[points.length - 1] as SeriesPoint).value : null;
  ctx.fillText(last === null ? label : `${label}: ${last.toFixed(2)}`, 6, 13);
}
