import type { CoverageGridResult } from "./types";

/** Per-cell RSRP difference between two finished jobs on the same grid. */

export interface GridDiff {
  grid: CoverageGridResult["grid"];
  delta: (number | null)[]; // b - a, null where either side is masked
  coverageDeltaPct: number; // covered % of b minus covered % of a
  maxAbsDelta: number;
}

export function sameGrid(a: CoverageGridResult["grid"], b: CoverageGridResult["grid"]): boolean {
  return (
    a.x_min === b.x_min &&
    a.y_min === b.y_min &&
    a.x_max === b.x_max &&
    a.y_max === b.y_max &&
    a.step === b.step &&
    a.height === b.height
  );
}

export function gridDiff(a: CoverageGridResult, b: CoverageGridResult): GridDiff {
  if (!sameGrid(a.grid, b.grid)) {
    throw new Error("grids differ; run both placements on the same grid to compare");
  }
  const n = a.grid.n_x * a.grid.n_y;
  const delta: (number | null)[] = new Array(n).fill(null);
  let maxAbs = 0;
  for (let i = 0; i < n; i++) {
    const va = a.rsrp_dbm[i];
    const vb = b.rsrp_dbm[i];
    if (va === null || vb === null || a.masked[i] || b.masked[i]) continue;
    const d = vb - va;
    delta[i] = d;
    if (Math.abs(d) > maxAbs) maxAbs = Math.abs(d);
  }
  const coveredA = a.masked.filter((m) => !m).length / n;
  const coveredB = b.masked.filter((m) => !m).length / n;
  return {
    grid: a.grid,
    delta,
    coverageDeltaPct: 100 * (coveredB - coveredA),
    maxAbsDelta: maxAbs,
  };
}
