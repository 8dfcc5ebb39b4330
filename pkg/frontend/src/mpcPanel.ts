import type { LinkResult, Mpc } from "./types";

/** MPC table plus an azimuth power fan for one inspected point. All numbers
 * are rendered verbatim from the link response. */

export function mpcPowerMw(m: Mpc, txPowerDbm: number): number {
  return Math.pow(10, (txPowerDbm + m.power_db) / 10);
}

export function renderMpcPanel(host: HTMLElement, link: LinkResult): void {
  host.innerHTML = "";
  const heading = document.createElement("div");
  heading.className = "panel-heading";
  heading.textContent =
    `${link.n_paths} paths, computed in ${link.compute_ms.toFixed(1)} ms ` +
    `at (${link.rx.map((v) => v.toFixed(1)).join(", ")})`;
  host.appendChild(heading);

  if (link.n_paths === 0) {
    const note = document.createElement("div");
    note.className = "no-paths";
    note.textContent = "no paths reach this point";
    host.appendChild(note);
    return;
  }

  const table = document.createElement("table");
  table.className = "mpc-table";
  table.innerHTML =
    "<thead><tr><th>delay ns</th><th>power dB</th><th>AoD az/el</th>" +
    "<th>AoA az/el</th><th>doppler Hz</th><th>bounces</th></tr></thead>";
  const body = document.createElement("tbody");
  for (const m of link.mpcs) {
    const row = document.createElement("tr");
    row.innerHTML =
      `<td>${(m.delay_s * 1e9).toFixed(2)}</td>` +
      `<td>${m.power_db.toFixed(2)}</td>` +
      `<td>${m.aod_az_deg.toFixed(1)} / ${m.aod_el_deg.toFixed(1)}</td>` +
      `<td>${m.aoa_az_deg.toFixed(1)} / ${m.aoa_el_deg.toFixed(1)}</td>` +
      `<td>${m.doppler_hz.toFixed(1)}</td>` +
      `<td>${m.signature.map(([k]) => k).join("") || "LoS"}</td>`;
    body.appendChild(row);
  }
  table.appendChild(body);
  host.appendChild(table);
  host.appendChild(renderAzimuthFan(link));
}

/** Bars of per-path power over arrival azimuth on a small canvas. */
export function renderAzimuthFan(link: LinkResult): HTMLCanvasElement {
  const canvas = document.createElement("canvas");
  canvas.className = "fan-plot";
  canvas.width = 360;
  canvas.height = 120;
  const ctx = canvas.getContext("2d");
  if (!ctx) return canvas;
  ctx.fillStyle = "#171b22";
  ctx.fillRect(0, 0, canvas.width, canvas.height);
  const powers = link.mpcs.map((m) => Math.pow(10, m.power_db / 10));
  const peak = Math.max(...powers, 1e-30);
  ctx.fillStyle = "#9aa7b8";
  ctx.font = "10px sans-serif";
  ctx.fillText("-180", 2, 118);
  ctx.fillText("+180", 330, 118);
  ctx.fillText("arrival azimuth", 140, 10);
  for (let i = 0; i < link.mpcs.length; i++) {
    const az = ((link.mpcs[i].aoa_az_deg + 540) % 360) - 180; // wrap to [-180, 180)
    const x = ((az + 180) / 360) * canvas.width;
    const h = Math.max(3, (powers[i] / peak) * 95);
    ctx.fillStyle = "#58b7ff";
    ctx.fillRect(x - 2, 110 - h, 4, h);
  }
  return canvas;
}
