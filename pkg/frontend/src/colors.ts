/** Fixed RSRP color scale so successive runs stay visually comparable. */

export const RSRP_MIN_DBM = -140;
export const RSRP_MAX_DBM = -40;
export const DEFAULT_GAP_THRESHOLD_DBM = -110;

/** Blue (cold, -140) through green to red (hot, -40); clamped outside. */
export function rsrpColor(rsrpDbm: number): string {
  const t = clamp01((rsrpDbm - RSRP_MIN_DBM) / (RSRP_MAX_DBM - RSRP_MIN_DBM));
  const hue = 240 * (1 - t); // 240 blue .. 0 red
  return `hsl(${hue.toFixed(0)}, 90%, 50%)`;
}

/** Symmetric diverging scale for RSRP deltas; +/- range dB maps to full
 * saturation, zero is near-white. */
export function deltaColor(deltaDb: number, rangeDb = 20): string {
  const t = Math.max(-1, Math.min(1, deltaDb / rangeDb));
  if (t >= 0) {
    const l = 95 - 45 * t;
    return `hsl(145, 70%, ${l.toFixed(0)}%)`;
  }
  const l = 95 + 45 * t;
  return `hsl(10, 75%, ${l.toFixed(0)}%)`;
}

function clamp01(x: number): number {
  return x < 0 ? 0 : x > 1 ? 1 : x;
}
