import { deltaColor, rsrpColor } from "./colors";
import type { GridDiff } from "./diff";
import type { MapView } from "./view";
import type { CoverageGridResult, Footprint } from "./types";

/** Canvas drawing for the map layers; no physics, values come verbatim
 * from API payloads. */

export function drawBackground(ctx: CanvasRenderingContext2D, view: MapView): void {
  ctx.fillStyle = "#10141a";
  ctx.fillRect(0, 0, view.widthPx, view.heightPx);
}

export function drawFootprint(
  ctx: CanvasRenderingContext2D,
  view: MapView,
  footprint: Footprint,
): void {
  const [lo, hi] = [footprint.bounds.lo, footprint.bounds.hi];
  ctx.strokeStyle = "#3d4754";
  ctx.lineWidth = 1;
  const [bx0, by0] = view.toCanvas(lo[0], lo[1]);
  const [bx1, by1] = view.toCanvas(hi[0], hi[1]);
  ctx.strokeRect(Math.min(bx0, bx1), Math.min(by0, by1), Math.abs(bx1 - bx0), Math.abs(by1 - by0));

  ctx.fillStyle = "#2b3340";
  ctx.strokeStyle = "#5b6878";
  for (const poly of footprint.polygons) {
    ctx.beginPath();
    poly.forEach(([x, y], i) => {
      const [px, py] = view.toCanvas(x, y);
      if (i === 0) ctx.moveTo(px, py);
      else ctx.lineTo(px, py);
    });
    ctx.closePath();
    ctx.fill();
    ctx.stroke();
  }
}

export function drawHeatmap(
  ctx: CanvasRenderingContext2D,
  view: MapView,
  result: CoverageGridResult,
  gapThresholdDbm: number | null,
): void {
  const g = result.grid;
  const cell = g.step * view.scale;
  for (let iy = 0; iy < g.n_y; iy++) {
    for (let ix = 0; ix < g.n_x; ix++) {
      const idx = iy * g.n_x + ix;
      const rsrp = result.rsrp_dbm[idx];
      const [cx, cy] = view.toCanvas(g.x_min + ix * g.step, g.y_min + (iy + 1) * g.step);
      if (rsrp === null || result.masked[idx]) {
        ctx.fillStyle = "rgba(64, 64, 72, 0.55)";
        ctx.fillRect(cx, cy, cell, cell);
        continue;
      }
      ctx.globalAlpha = 0.78;
      ctx.fillStyle = rsrpColor(rsrp);
      ctx.fillRect(cx, cy, cell, cell);
      ctx.globalAlpha = 1.0;
      if (gapThresholdDbm !== null && rsrp < gapThresholdDbm) {
        ctx.strokeStyle = "rgba(255, 40, 40, 0.95)";
        ctx.lineWidth = Math.max(1, cell * 0.08);
        ctx.strokeRect(cx + 1, cy + 1, cell - 2, cell - 2);
      }
    }
  }
}

export function drawDiff(ctx: CanvasRenderingContext2D, view: MapView, diff: GridDiff): void {
  const g = diff.grid;
  const cell = g.step * view.scale;
  for (let iy = 0; iy < g.n_y; iy++) {
    for (let ix = 0; ix < g.n_x; ix++) {
      const d = diff.delta[iy * g.n_x + ix];
      const [cx, cy] = view.toCanvas(g.x_min + ix * g.step, g.y_min + (iy + 1) * g.step);
      if (d === null) {
        ctx.fillStyle = "rgba(64, 64, 72, 0.5)";
      } else {
        ctx.fillStyle = deltaColor(d);
      }
      ctx.fillRect(cx, cy, cell, cell);
    }
  }
}

export function drawTxMarker(
  ctx: CanvasRenderingContext2D,
  view: MapView,
  pos: [number, number],
  label = "Tx",
): void {
  const [px, py] = view.toCanvas(pos[0], pos[1]);
  ctx.beginPath();
  ctx.arc(px, py, 7, 0, 2 * Math.PI);
  ctx.fillStyle = "#ffcf33";
  ctx.fill();
  ctx.strokeStyle = "#202020";
  ctx.lineWidth = 2;
  ctx.stroke();
  ctx.fillStyle = "#ffe9a8";
  ctx.font = "12px sans-serif";
  ctx.fillText(label, px + 10, py - 8);
}

export function drawSelection(
  ctx: CanvasRenderingContext2D,
  view: MapView,
  grid: CoverageGridResult["grid"],
  ix: number,
  iy: number,
): void {
  const cell = grid.step * view.scale;
  const [cx, cy] = view.toCanvas(grid.x_min + ix * grid.step, grid.y_min + (iy + 1) * grid.step);
  ctx.strokeStyle = "#7fd6ff";
  ctx.lineWidth = 2;
  ctx.strokeRect(cx, cy, cell, cell);
}
