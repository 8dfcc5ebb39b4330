/** World (meters, y up) to canvas (pixels, y down) transform with pan/zoom. */

export interface Bounds {
  xMin: number;
  yMin: number;
  xMax: number;
  yMax: number;
}

export class MapView {
  scale = 1; // pixels per meter
  offsetX = 0; // canvas x of world origin
  offsetY = 0;

  constructor(
    public widthPx: number,
    public heightPx: number,
  ) {}

  /** Fit bounds into the canvas with a margin fraction. */
  fit(b: Bounds, margin = 0.08): void {
    const w = Math.max(b.xMax - b.xMin, 1e-9);
    const h = Math.max(b.yMax - b.yMin, 1e-9);
    this.scale = Math.min(
      (this.widthPx * (1 - 2 * margin)) / w,
      (this.heightPx * (1 - 2 * margin)) / h,
    );
    const cx = (b.xMin + b.xMax) / 2;
    const cy = (b.yMin + b.yMax) / 2;
    this.offsetX = this.widthPx / 2 - cx * this.scale;
    this.offsetY = this.heightPx / 2 + cy * this.scale;
  }

  toCanvas(x: number, y: number): [number, number] {
    return [this.offsetX + x * this.scale, this.offsetY - y * this.scale];
  }

  toWorld(px: number, py: number): [number, number] {
    return [(px - this.offsetX) / this.scale, (this.offsetY - py) / this.scale];
  }

  panBy(dxPx: number, dyPx: number): void {
    this.offsetX += dxPx;
    this.offsetY += dyPx;
  }

  zoomAt(px: number, py: number, factor: number): void {
    const [wx, wy] = this.toWorld(px, py);
    this.scale *= factor;
    const [nx, ny] = this.toCanvas(wx, wy);
    this.offsetX += px - nx;
    this.offsetY += py - ny;
  }
}

/** Index of the coverage cell containing a world point, or null outside. */
export function cellAt(
  grid: { x_min: number; y_min: number; step: number; n_x: number; n_y: number },
  x: number,
  y: number,
): { ix: number; iy: number } | null {
  const ix = Math.floor((x - grid.x_min) / grid.step);
  const iy = Math.floor((y - grid.y_min) / grid.step);
  if (ix < 0 || iy < 0 || ix >= grid.n_x || iy >= grid.n_y) return null;
  return { ix, iy };
}

export function cellCenter(
  grid: { x_min: number; y_min: number; step: number },
  ix: number,
  iy: number,
): [number, number] {
  return [grid.x_min + (ix + 0.5) * grid.step, grid.y_min + (iy + 0.5) * grid.step];
}

/** Row-major flat index used by the grid JSON arrays (y outer, x inner). */
export function cellIndex(grid: { n_x: number }, ix: number, iy: number): number {
  return iy * grid.n_x + ix;
}
