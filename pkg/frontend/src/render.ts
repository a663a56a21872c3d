import type { PointDraft } from './draft.js';
import type { ViewState } from './controller.js';
import type { EnergyPoint } from './controller.js';

// Image coordinates are 1-based with pixel (r, c) centered at (r, c); the
// canvas is drawn at `scale` screen pixels per image pixel, so pixel centers
// land on half-offsets.

export function imageToCanvas(row: number, col: number, scale: number): { x: number; y: number } {
  return { x: (col - 0.5) * scale, y: (row - 0.5) * scale };
}

export function canvasToImage(x: number, y: number, scale: number): { row: number; col: number } {
  return { row: y / scale + 0.5, col: x / scale + 0.5 };
}

export interface SceneStyle {
  curve: string;
  controlFill: string;
  controlStroke: string;
  draftFill: string;
  boxStroke: string;
  boundaryPos: string;
  boundaryNeg: string;
}

export const DEFAULT_STYLE: SceneStyle = {
  curve: '#facc15',
  controlFill: '#2563eb',
  controlStroke: '#ffffff',
  draftFill: '#f97316',
  boxStroke: 'rgba(37, 99, 235, 0.8)',
  boundaryPos: 'rgba(34, 197, 94, 0.45)',
  boundaryNeg: 'rgba(239, 68, 68, 0.45)',
};

export function drawScene(
  ctx: CanvasRenderingContext2D,
  image: CanvasImageSource | null,
  view: ViewState,
  draft: PointDraft | null,
  scale: number,
  style: SceneStyle = DEFAULT_STYLE,
): void {
  const { canvas } = ctx;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  if (image) {
    ctx.imageSmoothingEnabled = false;
    ctx.drawImage(image, 0, 0, canvas.width, canvas.height);
  }

  const state = view.state;
  if (state) {
    if (view.showBoundary) {
      for (const [row, col, sign] of state.boundary) {
        ctx.fillStyle = sign > 0 ? style.boundaryPos : style.boundaryNeg;
        ctx.fillRect((col - 1) * scale, (row - 1) * scale, scale, scale);
      }
    }

    // closed curve polyline, straight from the server's sample
    const curve = state.curve;
    if (curve.length > 1) {
      ctx.strokeStyle = style.curve;
      ctx.lineWidth = 1.5;
      ctx.beginPath();
      const first = imageToCanvas(curve[0][0], curve[0][1], scale);
      ctx.moveTo(first.x, first.y);
      for (let i = 1; i < curve.length; i++) {
        const p = imageToCanvas(curve[i][0], curve[i][1], scale);
        ctx.lineTo(p.x, p.y);
      }
      ctx.closePath();
      ctx.stroke();
    }

    for (const [row, col] of state.polygon.points) {
      drawHandle(ctx, imageToCanvas(row, col, scale), style.controlFill, style.controlStroke);
    }
  }

  if (draft) {
    for (const [row, col] of draft.points) {
      drawHandle(ctx, imageToCanvas(row, col, scale), style.draftFill, style.controlStroke);
    }
    if (draft.box) {
      const [r0, r1, c0, c1] = draft.box;
      ctx.strokeStyle = style.boxStroke;
      ctx.setLineDash([6, 4]);
      ctx.strokeRect((c0 - 1) * scale, (r0 - 1) * scale, (c1 - c0 + 1) * scale, (r1 - r0 + 1) * scale);
      ctx.setLineDash([]);
    }
  }
}

function drawHandle(
  ctx: CanvasRenderingContext2D,
  at: { x: number; y: number },
  fill: string,
  stroke: string,
): void {
  ctx.beginPath();
  ctx.arc(at.x, at.y, 5, 0, Math.PI * 2);
  ctx.fillStyle = fill;
  ctx.strokeStyle = stroke;
  ctx.fill();
  ctx.stroke();
}

/** Index of the control point within `radiusPx` of a canvas position, or -1. */
export function hitTestControlPoint(
  points: readonly [number, number][],
  x: number,
  y: number,
  scale: number,
  radiusPx = 8,
): number {
  let best = -1;
  let bestD2 = radiusPx * radiusPx;
  for (let i = 0; i < points.length; i++) {
    const p = imageToCanvas(points[i][0], points[i][1], scale);
    const d2 = (p.x - x) ** 2 + (p.y - y) ** 2;
    if (d2 <= bestD2) {
      best = i;
      bestD2 = d2;
    }
  }
  return best;
}

/** Total-energy sparkline over the session so far. */
export function drawEnergySparkline(
  ctx: CanvasRenderingContext2D,
  series: readonly EnergyPoint[],
  color = '#2563eb',
): void {
  const { width, height } = ctx.canvas;
  ctx.clearRect(0, 0, width, height);
  if (series.length < 2) return;
  const values = series.map((p) => p.total);
  const lo = Math.min(...values);
  const hi = Math.max(...values);
  const span = hi - lo || 1;
  ctx.strokeStyle = color;
  ctx.lineWidth = 1;
  ctx.beginPath();
  series.forEach((p, i) => {
    const x = (i / (series.length - 1)) * (width - 2) + 1;
    const y = height - 1 - ((p.total - lo) / span) * (height - 2);
    if (i === 0) ctx.moveTo(x, y);
    else ctx.lineTo(x, y);
  });
  ctx.stroke();
}
