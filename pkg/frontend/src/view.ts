/**
 * World-to-screen mapping and canvas rendering.
 *
 * Rendering is a pure function of (response, geometry, transform): the
 * same inputs produce the same draw commands, and every coordinate on
 * screen is a transformed service coordinate.  Angles are drawn
 * counterclockwise from the positive x axis, sector 1 starting at 0,
 * matching the service's partition convention (the y axis points up in
 * world space, so screen y is flipped).
 */

import type { CaseGeometry, PredictResponse } from "./types.js";

/** The subset of CanvasRenderingContext2D the renderer needs. */
export interface Draw2D {
  clearRect(x: number, y: number, w: number, h: number): void;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  arc(x: number, y: number, r: number, a0: number, a1: number, ccw?: boolean): void;
  closePath(): void;
  stroke(): void;
  fill(): void;
  setLineDash(segments: number[]): void;
  fillText(text: string, x: number, y: number): void;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  fillStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
  globalAlpha: number;
  font: string;
}

export interface Bounds {
  minX: number;
  minY: number;
  maxX: number;
  maxY: number;
}

export class ViewTransform {
  constructor(
    public readonly scale: number,
    public readonly offsetX: number,
    public readonly offsetY: number,
  ) {
    if (!(scale > 0) || !Number.isFinite(offsetX) || !Number.isFinite(offsetY)) {
      throw new Error("degenerate view transform");
    }
  }

  worldToScreen(p: readonly number[]): [number, number] {
    return [this.offsetX + this.scale * p[0], this.offsetY - this.scale * p[1]];
  }

  screenToWorld(p: readonly number[]): [number, number] {
    return [(p[0] - this.offsetX) / this.scale, (this.offsetY - p[1]) / this.scale];
  }

  /** Uniform fit of a world bounding box into a width x height canvas. */
  static fit(bounds: Bounds, width: number, height: number, margin = 30): ViewTransform {
    const spanX = Math.max(bounds.maxX - bounds.minX, 1e-9);
    const spanY = Math.max(bounds.maxY - bounds.minY, 1e-9);
    const scale = Math.min((width - 2 * margin) / spanX, (height - 2 * margin) / spanY);
    const cx = (bounds.minX + bounds.maxX) / 2;
    const cy = (bounds.minY + bounds.maxY) / 2;
    return new ViewTransform(scale, width / 2 - scale * cx, height / 2 + scale * cy);
  }
}

export function sceneBounds(geometry: CaseGeometry, response: PredictResponse | null): Bounds {
  const bounds: Bounds = { minX: Infinity, minY: Infinity, maxX: -Infinity, maxY: -Infinity };
  const extend = (points: number[][]) => {
    for (const [x, y] of points) {
      bounds.minX = Math.min(bounds.minX, x);
      bounds.minY = Math.min(bounds.minY, y);
      bounds.maxX = Math.max(bounds.maxX, x);
      bounds.maxY = Math.max(bounds.maxY, y);
    }
  };
  extend(geometry.observed);
  if (geometry.future) {
    extend(geometry.future);
  }
  geometry.neighbors.forEach((nb) => extend(nb.points));
  if (response) {
    response.neighbors.forEach((nb) => extend(nb.points));
    response.predictions.forEach(extend);
  }
  return bounds;
}

export const STYLE = {
  observed: { color: "#111111", width: 2.5, dash: [] as number[] },
  future: { color: "#2e8b57", width: 1.5, dash: [6, 4] },
  prediction: { color: "#1d6cab", width: 1.5, dash: [] as number[] },
  neighborReal: { color: "#888888", width: 1.5, dash: [] as number[] },
  neighborManual: { color: "#d02324", width: 2.0, dash: [] as number[] },
};

function polyline(ctx: Draw2D, t: ViewTransform, points: number[][], style: { color: string; width: number; dash: number[] }, alpha = 1.0): void {
  if (points.length === 0) {
    return;
  }
  ctx.beginPath();
  ctx.strokeStyle = style.color;
  ctx.lineWidth = style.width;
  ctx.globalAlpha = alpha;
  ctx.setLineDash(style.dash);
  const [x0, y0] = t.worldToScreen(points[0]);
  ctx.moveTo(x0, y0);
  for (let i = 1; i < points.length; i++) {
    const [x, y] = t.worldToScreen(points[i]);
    ctx.lineTo(x, y);
  }
  ctx.stroke();
  ctx.setLineDash([]);
  ctx.globalAlpha = 1.0;
}

/**
 * Attention wheel: one filled sector per partition, opacity scaled by the
 * normalized score, centered at the target's last observed position.
 */
export function drawWheel(
  ctx: Draw2D,
  t: ViewTransform,
  center: readonly number[],
  boundaries: [number, number][],
  normalized: number[] | null,
  radiusPx = 70,
): void {
  const [cx, cy] = t.worldToScreen(center);
  const peak = normalized ? Math.max(...normalized, 1e-12) : 1;
  boundaries.forEach(([lo, hi], i) => {
    const score = normalized ? normalized[i] / peak : 0;
    ctx.beginPath();
    ctx.moveTo(cx, cy);
    // screen y grows downward, so counterclockwise world angles are drawn
    // with negated angles and the ccw flag
    ctx.arc(cx, cy, radiusPx, -lo, -hi, true);
    ctx.closePath();
    ctx.fillStyle = "#d02324";
    ctx.globalAlpha = 0.08 + 0.55 * score;
    ctx.fill();
    ctx.globalAlpha = 1.0;
    ctx.strokeStyle = "#aa4444";
    ctx.lineWidth = 0.5;
    ctx.stroke();
    const mid = (lo + hi) / 2;
    ctx.fillStyle = "#7a2a2a";
    ctx.font = "11px sans-serif";
    ctx.fillText(
      String(i + 1),
      cx + Math.cos(mid) * radiusPx * 1.1,
      cy - Math.sin(mid) * radiusPx * 1.1,
    );
  });
}

export interface SceneRender {
  geometry: CaseGeometry;
  response: PredictResponse | null;
  showWheel: boolean;
}

export function drawScene(ctx: Draw2D, width: number, height: number, scene: SceneRender, t: ViewTransform): void {
  ctx.clearRect(0, 0, width, height);
  const { geometry, response } = scene;
  if (response && scene.showWheel) {
    drawWheel(
      ctx,
      t,
      geometry.observed[geometry.observed.length - 1],
      response.partition_boundaries,
      response.attention ? response.attention.normalized : null,
    );
  }
  const neighbors = response ? response.neighbors : geometry.neighbors;
  for (const nb of neighbors) {
    polyline(ctx, t, nb.points, nb.tag === "manual" ? STYLE.neighborManual : STYLE.neighborReal, 0.9);
  }
  if (geometry.future) {
    polyline(ctx, t, geometry.future, STYLE.future);
  }
  if (response) {
    for (const pred of response.predictions) {
      polyline(ctx, t, pred, STYLE.prediction, 0.75);
    }
  }
  polyline(ctx, t, geometry.observed, STYLE.observed);
}
