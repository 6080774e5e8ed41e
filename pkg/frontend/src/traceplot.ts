/**
 * Navigable time-trace plot: values over frames with click-to-seek.
 *
 * Rendering goes to a canvas; the hit-testing that maps a click to a frame
 * number is a pure function so it can be tested without a DOM. Whatever
 * order the points arrive in (sorted or filtered server-side), each point
 * keeps its own frame number, so clicking always seeks the right frame.
 */

import { TraceResult } from "./api.js";

export interface PlotLayout {
  width: number;
  height: number;
  marginLeft: number;
  marginRight: number;
  marginTop: number;
  marginBottom: number;
}

export const DEFAULT_LAYOUT: PlotLayout = {
  width: 640,
  height: 200,
  marginLeft: 48,
  marginRight: 12,
  marginTop: 10,
  marginBottom: 24,
};

export interface PlotPoint {
  x: number;
  y: number;
  frame: number;
  value: number;
}

export function layoutPoints(trace: TraceResult, layout: PlotLayout = DEFAULT_LAYOUT): PlotPoint[] {
  const n = trace.values.length;
  if (n === 0) return [];
  const innerW = layout.width - layout.marginLeft - layout.marginRight;
  const innerH = layout.height - layout.marginTop - layout.marginBottom;
  let vmin = Math.min(...trace.values);
  let vmax = Math.max(...trace.values);
  if (vmin === vmax) {
    vmin -= 0.5;
    vmax += 0.5;
  }
  return trace.values.map((value, i) => ({
    x: layout.marginLeft + (n === 1 ? innerW / 2 : (i / (n - 1)) * innerW),
    y: layout.marginTop + (1 - (value - vmin) / (vmax - vmin)) * innerH,
    frame: trace.frames[i],
    value,
  }));
}

/** Nearest point to a click, or null when the click is outside the axes. */
export function hitTest(
  points: PlotPoint[],
  px: number,
  py: number,
  layout: PlotLayout = DEFAULT_LAYOUT
): PlotPoint | null {
  if (points.length === 0) return null;
  if (
    px < layout.marginLeft - 4 ||
    px > layout.width - layout.marginRight + 4 ||
    py < 0 ||
    py > layout.height
  ) {
    return null;
  }
  let best: PlotPoint | null = null;
  let bestDist = Infinity;
  for (const p of points) {
    const d = Math.abs(p.x - px);
    if (d < bestDist) {
      bestDist = d;
      best = p;
    }
  }
  return best;
}

export class TracePlot {
  points: PlotPoint[] = [];
  trace: TraceResult | null = null;
  onSeek: ((frame: number) => void) | null = null;
  highlighted: number | null = null;

  constructor(
    private canvas: HTMLCanvasElement,
    private layout: PlotLayout = DEFAULT_LAYOUT
  ) {
    canvas.width = layout.width;
    canvas.height = layout.height;
    canvas.addEventListener("click", (ev) => {
      const rect = canvas.getBoundingClientRect();
      const hit = hitTest(
        this.points,
        ev.clientX - rect.left,
        ev.clientY - rect.top,
        this.layout
      );
      if (hit && this.onSeek) {
        this.highlighted = hit.frame;
        this.draw();
        this.onSeek(hit.frame);
      }
    });
  }

  setTrace(trace: TraceResult): void {
    this.trace = trace;
    this.points = layoutPoints(trace, this.layout);
    this.draw();
  }

  draw(): void {
    const ctx = this.canvas.getContext("2d");
    if (!ctx || !this.trace) return;
    const { width, height, marginLeft, marginBottom } = this.layout;
    ctx.fillStyle = "#10141a";
    ctx.fillRect(0, 0, width, height);
    ctx.strokeStyle = "#39414d";
    ctx.beginPath();
    ctx.moveTo(marginLeft, 0);
    ctx.lineTo(marginLeft, height - marginBottom);
    ctx.lineTo(width, height - marginBottom);
    ctx.stroke();

    if (this.points.length > 1) {
      ctx.strokeStyle = "#4cc2ff";
      ctx.beginPath();
      this.points.forEach((p, i) => (i === 0 ? ctx.moveTo(p.x, p.y) : ctx.lineTo(p.x, p.y)));
      ctx.stroke();
    }
    ctx.fillStyle = "#9fdcff";
    for (const p of this.points) {
      ctx.beginPath();
      ctx.arc(p.x, p.y, 2, 0, Math.PI * 2);
      ctx.fill();
    }
    if (this.highlighted !== null) {
      const p = this.points.find((q) => q.frame === this.highlighted);
      if (p) {
        ctx.strokeStyle = "#ffb347";
        ctx.beginPath();
        ctx.arc(p.x, p.y, 5, 0, Math.PI * 2);
        ctx.stroke();
      }
    }
    const vals = this.trace.values;
    if (vals.length) {
      ctx.fillStyle = "#8b949e";
      ctx.font = "11px sans-serif";
      ctx.fillText(Math.max(...vals).toFixed(2), 4, 12);
      ctx.fillText(Math.min(...vals).toFixed(2), 4, height - marginBottom);
      ctx.fillText(`${this.trace.kind} (${this.trace.unit})`, marginLeft + 6, 12);
    }
  }
}
