/**
 * Channel-score rendering: a per-component strip over channel index, and an
 * optional 2-D scalp-style map via inverse-distance-weighted interpolation
 * when an electrode layout (name, x, y) is supplied.
 */

import { absMax, divergingColor } from "./color.js";
import { ElectrodePosition } from "./types.js";

export function parseLayoutCsv(text: string): ElectrodePosition[] {
  const out: ElectrodePosition[] = [];
  for (const line of text.split(/\r?\n/)) {
    const trimmed = line.trim();
    if (!trimmed || trimmed.startsWith("#")) continue;
    const parts = trimmed.split(",").map((s) => s.trim());
    if (parts.length < 3) continue;
    if (parts[0].toLowerCase() === "name" || Number.isNaN(Number(parts[1]))) continue;
    out.push({ name: parts[0], x: Number(parts[1]), y: Number(parts[2]) });
  }
  return out;
}

function get2d(canvas: HTMLCanvasElement): CanvasRenderingContext2D | null {
  try {
    return canvas.getContext("2d");
  } catch {
    return null; // canvas-less DOM (tests)
  }
}

/** One colored cell per channel, left to right. */
export function drawChannelStrip(canvas: HTMLCanvasElement, scores: number[]): void {
  const ctx = get2d(canvas);
  if (!ctx) return;
  const n = scores.length;
  const w = canvas.width / Math.max(n, 1);
  const m = absMax(scores);
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  scores.forEach((v, i) => {
    ctx.fillStyle = divergingColor(v, m);
    ctx.fillRect(i * w, 0, Math.ceil(w), canvas.height);
  });
}

/**
 * Inverse-distance-weighted value at (x, y); exact at electrode positions.
 */
export function idwValue(
  x: number,
  y: number,
  positions: ElectrodePosition[],
  scores: number[],
  power = 2,
): number {
  let num = 0;
  let den = 0;
  for (let i = 0; i < positions.length; i++) {
    const dx = x - positions[i].x;
    const dy = y - positions[i].y;
    const d2 = dx * dx + dy * dy;
    if (d2 === 0) return scores[i];
    const w = 1 / Math.pow(d2, power / 2);
    num += w * scores[i];
    den += w;
  }
  return den > 0 ? num / den : 0;
}

export interface ScalpMapOptions {
  gridSize?: number;
  markElectrodes?: boolean;
}

/** Interpolated 2-D layout heatmap inside the positions' bounding circle. */
export function drawScalpMap(
  canvas: HTMLCanvasElement,
  scores: number[],
  positions: ElectrodePosition[],
  opts: ScalpMapOptions = {},
): void {
  const ctx = get2d(canvas);
  if (!ctx || positions.length === 0) return;
  const grid = opts.gridSize ?? 48;
  const xs = positions.map((p) => p.x);
  const ys = positions.map((p) => p.y);
  const cx = (Math.min(...xs) + Math.max(...xs)) / 2;
  const cy = (Math.min(...ys) + Math.max(...ys)) / 2;
  const radius =
    Math.max(
      ...positions.map((p) => Math.hypot(p.x - cx, p.y - cy)),
      1e-9,
    ) * 1.15;
  const m = absMax(scores);
  const cellW = canvas.width / grid;
  const cellH = canvas.height / grid;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  for (let gy = 0; gy < grid; gy++) {
    for (let gx = 0; gx < grid; gx++) {
      const px = cx + ((gx + 0.5) / grid - 0.5) * 2 * radius;
      const py = cy + ((gy + 0.5) / grid - 0.5) * 2 * radius;
      if (Math.hypot(px - cx, py - cy) > radius) continue;
      ctx.fillStyle = divergingColor(idwValue(px, py, positions, scores), m);
      ctx.fillRect(gx * cellW, gy * cellH, Math.ceil(cellW), Math.ceil(cellH));
    }
  }
  if (opts.markElectrodes !== false) {
    ctx.fillStyle = "#222";
    for (const p of positions) {
      const gx = ((p.x - cx) / (2 * radius) + 0.5) * canvas.width;
      const gy = ((p.y - cy) / (2 * radius) + 0.5) * canvas.height;
      ctx.beginPath();
      ctx.arc(gx, gy, 1.5, 0, 2 * Math.PI);
      ctx.fill();
    }
  }
}
