/**
 * Minimal 3D view: atoms as depth-shaded spheres (or a polyline) on a 2D
 * canvas under an orthographic projection. Navigation fidelity is the
 * contract here, not visual quality.
 */

import { ClientStructure } from "./pdb.js";
import { CameraState } from "./session.js";

const ELEMENT_COLORS: Record<string, string> = {
  C: "#b0b0b0",
  N: "#3050f8",
  O: "#ff0d0d",
  H: "#e8e8e8",
  S: "#ffff30",
  P: "#ff8000",
};
const DEFAULT_COLOR = "#cc80ff";

const ELEMENT_RADII: Record<string, number> = {
  H: 0.6,
  C: 1.0,
  N: 0.95,
  O: 0.9,
  S: 1.2,
  P: 1.15,
};

export interface ProjectedAtom {
  x: number;
  y: number;
  depth: number;
  index: number;
}

/** Rotate, scale and centre coordinates for a canvas of the given size. */
export function projectAtoms(
  coords: Float32Array,
  camera: CameraState,
  width: number,
  height: number
): ProjectedAtom[] {
  const n = Math.floor(coords.length / 3);
  if (n === 0) return [];
  let cx = 0;
  let cy = 0;
  let cz = 0;
  for (let i = 0; i < n; i++) {
    cx += coords[3 * i];
    cy += coords[3 * i + 1];
    cz += coords[3 * i + 2];
  }
  cx /= n;
  cy /= n;
  cz /= n;

  const sinX = Math.sin(camera.rotX);
  const cosX = Math.cos(camera.rotX);
  const sinY = Math.sin(camera.rotY);
  const cosY = Math.cos(camera.rotY);

  let maxR = 1e-6;
  const rotated = new Float64Array(3 * n);
  for (let i = 0; i < n; i++) {
    const x0 = coords[3 * i] - cx;
    const y0 = coords[3 * i + 1] - cy;
    const z0 = coords[3 * i + 2] - cz;
    // rotate about y then x
    const x1 = cosY * x0 + sinY * z0;
    const z1 = -sinY * x0 + cosY * z0;
    const y2 = cosX * y0 - sinX * z1;
    const z2 = sinX * y0 + cosX * z1;
    rotated[3 * i] = x1;
    rotated[3 * i + 1] = y2;
    rotated[3 * i + 2] = z2;
    maxR = Math.max(maxR, Math.abs(x1), Math.abs(y2));
  }
  const scale = (Math.min(width, height) * 0.45 * camera.zoom) / maxR;
  const out: ProjectedAtom[] = new Array(n);
  for (let i = 0; i < n; i++) {
    out[i] = {
      x: width / 2 + camera.panX + rotated[3 * i] * scale,
      y: height / 2 + camera.panY - rotated[3 * i + 1] * scale,
      depth: rotated[3 * i + 2],
      index: i,
    };
  }
  return out;
}

export class StructureRenderer {
  representation: "spheres" | "lines" = "spheres";
  highlightedAtoms: number[] = [];

  constructor(private canvas: HTMLCanvasElement) {}

  draw(coords: Float32Array, structure: ClientStructure | null, camera: CameraState): void {
    const ctx = this.canvas.getContext("2d");
    if (!ctx) return;
    const { width, height } = this.canvas;
    ctx.fillStyle = "#05070b";
    ctx.fillRect(0, 0, width, height);
    const projected = projectAtoms(coords, camera, width, height);
    if (projected.length === 0) return;

    if (this.representation === "lines") {
      ctx.strokeStyle = "#7fa8c9";
      ctx.beginPath();
      projected.forEach((p, i) => (i === 0 ? ctx.moveTo(p.x, p.y) : ctx.lineTo(p.x, p.y)));
      ctx.stroke();
      return;
    }

    const sorted = [...projected].sort((a, b) => a.depth - b.depth);
    let minD = sorted[0].depth;
    let maxD = sorted[sorted.length - 1].depth;
    if (maxD === minD) maxD = minD + 1;
    const highlight = new Set(this.highlightedAtoms);
    for (const p of sorted) {
      const atom = structure?.atoms[p.index];
      const element = atom?.element ?? "C";
      const shade = 0.55 + (0.45 * (p.depth - minD)) / (maxD - minD);
      const radius = (ELEMENT_RADII[element] ?? 1.0) * 3.2 * camera.zoom;
      ctx.globalAlpha = shade;
      ctx.fillStyle = ELEMENT_COLORS[element] ?? DEFAULT_COLOR;
      ctx.beginPath();
      ctx.arc(p.x, p.y, radius, 0, Math.PI * 2);
      ctx.fill();
      if (highlight.has(p.index)) {
        ctx.globalAlpha = 1;
        ctx.strokeStyle = "#ffb347";
        ctx.lineWidth = 2;
        ctx.stroke();
        ctx.lineWidth = 1;
      }
    }
    ctx.globalAlpha = 1;
  }
}
