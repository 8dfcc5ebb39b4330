import { ApiClient } from "./api";
import { DEFAULT_GAP_THRESHOLD_DBM } from "./colors";
import { gridDiff, sameGrid, type GridDiff } from "./diff";
import {
  drawBackground,
  drawDiff,
  drawFootprint,
  drawHeatmap,
  drawSelection,
  drawTxMarker,
} from "./layers";
import { renderMpcPanel } from "./mpcPanel";
import { MapView, cellAt, cellCenter, cellIndex } from "./view";
import type { CoverageGridResult, Footprint, Job, SceneSummary } from "./types";
import { pollJob } from "./poll";

type Mode = "place" | "inspect";

interface SessionState {
  scenes: SceneSummary[];
  sceneId: string | null;
  footprint: Footprint | null;
  txPos: [number, number] | null;
  txHeight: number;
  txPowerDbm: number;
  freqGhz: number;
  profile: string;
  gridStep: number;
  rxHeight: number;
  gapThresholdDbm: number;
  jobs: Job[];
  activeResult: { jobId: string; result: CoverageGridResult } | null;
  diff: GridDiff | null;
  selectedCell: { ix: number; iy: number } | null;
  mode: Mode;
}

/** Single-page planning app. All displayed numbers come from API payloads;
 * the client only draws them. */
export class PlannerApp {
  state: SessionState = {
    scenes: [],
    sceneId: null,
    footprint: null,
    txPos: null,
    txHeight: 25,
    txPowerDbm: 30,
    freqGhz: 6,
    profile: "offline",
    gridStep: 4,
    rxHeight: 1.5,
    gapThresholdDbm: DEFAULT_GAP_THRESHOLD_DBM,
    jobs: [],
    activeResult: null,
    diff: null,
    selectedCell: null,
    mode: "place",
  };

  view: MapView;
  private ctx: CanvasRenderingContext2D;
  private dragging = false;
  private dragMoved = false;
  private lastPx = 0;
  private lastPy = 0;

  constructor(
    private root: HTMLElement,
    public api: ApiClient,
    private canvas: HTMLCanvasElement,
  ) {
    this.view = new MapView(canvas.width, canvas.height);
    const ctx = canvas.getContext("2d");
    if (!ctx) throw new Error("canvas 2d context unavailable");
    this.ctx = ctx;
    this.bindCanvas();
  }

  /** Rebuild scenes, job list and done results from the server (refresh-safe). */
  async bootstrap(): Promise<void> {
    const [{ scenes }, { jobs }] = await Promise.all([this.api.listScenes(), this.api.listJobs()]);
    this.state.scenes = scenes;
    this.state.jobs = jobs;
    this.renderSidebar();
    if (scenes.length === 1) await this.selectScene(scenes[0].scene_id);
    else this.render();
  }

  async selectScene(sceneId: string): Promise<void> {
    this.state.sceneId = sceneId;
    this.state.footprint = await this.api.footprint(sceneId);
    const lo = this.state.footprint.bounds.lo;
    const hi = this.state.footprint.bounds.hi;
    this.view.fit({ xMin: lo[0], yMin: lo[1], xMax: hi[0], yMax: hi[1] });
    this.state.activeResult = null;
    this.state.diff = null;
    this.state.selectedCell = null;
    this.renderSidebar();
    this.render();
  }

  placeTx(x: number, y: number): void {
    this.state.txPos = [x, y];
    this.state.diff = null;
    this.render();
    this.renderSidebar();
  }

  async runCoverage(): Promise<Job> {
    const s = this.state;
    if (!s.sceneId || !s.footprint) throw new Error("select a scene first");
    if (!s.txPos) throw new Error("place the transmitter first");
    const lo = s.footprint.bounds.lo;
    const hi = s.footprint.bounds.hi;
    const { job_id } = await this.api.submitCoverage({
      scene_id: s.sceneId,
      tx: { pos: [s.txPos[0], s.txPos[1], s.txHeight], power_dbm: s.txPowerDbm },
      freq_hz: s.freqGhz * 1e9,
      profile: s.profile,
      grid: {
        x_min: lo[0],
        y_min: lo[1],
        x_max: Math.max(hi[0], lo[0] + s.gridStep),
        y_max: Math.max(hi[1], lo[1] + s.gridStep),
        step: s.gridStep,
        height: s.rxHeight,
      },
    });
    this.setStatus(`job ${job_id} queued`);
    const job = await pollJob(this.api, job_id, (j) => {
      this.setStatus(`job ${j.id}: ${j.status} ${(j.progress * 100).toFixed(0)}%`);
      this.setProgress(j.progress);
    });
    const result = await this.api.jobResult(job.id);
    this.state.activeResult = { jobId: job.id, result };
    this.state.diff = null;
    this.state.jobs = (await this.api.listJobs()).jobs;
    this.setStatus(`job ${job.id} done; covered ${(100 * result.covered_fraction).toFixed(1)}%`);
    this.setProgress(1);
    this.renderSidebar();
    this.render();
    return job;
  }

  async inspect(ix: number, iy: number): Promise<void> {
    const s = this.state;
    if (!s.activeResult || !s.sceneId || !s.txPos) return;
    const g = s.activeResult.result.grid;
    s.selectedCell = { ix, iy };
    this.render();
    const panel = this.root.querySelector<HTMLElement>("#mpc-panel");
    if (!panel) return;
    const idx = cellIndex(g, ix, iy);
    if (s.activeResult.result.masked[idx]) {
      panel.innerHTML = '<div class="no-paths">no paths reach this cell</div>';
      return;
    }
    const [cx, cy] = cellCenter(g, ix, iy);
    try {
      const link = await this.api.link({
        scene_id: s.sceneId,
        tx: { pos: [s.txPos[0], s.txPos[1], s.txHeight], power_dbm: s.txPowerDbm },
        rx: { pos: [cx, cy, g.height] },
        freq_hz: s.freqGhz * 1e9,
        profile: "online",
      });
      if (link.n_paths === 0) {
        panel.innerHTML = '<div class="no-paths">no paths reach this cell</div>';
      } else {
        renderMpcPanel(panel, link);
      }
    } catch (err) {
      this.toast(String(err));
    }
  }

  async comparePlacements(jobA: string, jobB: string): Promise<void> {
    const [a, b] = await Promise.all([this.api.jobResult(jobA), this.api.jobResult(jobB)]);
    if (!sameGrid(a.grid, b.grid)) {
      this.toast("comparison disabled: jobs ran on different grids");
      return;
    }
    this.state.diff = gridDiff(a, b);
    this.setStatus(
      `coverage delta ${this.state.diff.coverageDeltaPct.toFixed(1)}%, ` +
        `max |RSRP delta| ${this.state.diff.maxAbsDelta.toFixed(1)} dB`,
    );
    this.render();
  }

  render(): void {
    const s = this.state;
    drawBackground(this.ctx, this.view);
    if (s.footprint) drawFootprint(this.ctx, this.view, s.footprint);
    if (s.diff) {
      drawDiff(this.ctx, this.view, s.diff);
    } else if (s.activeResult) {
      drawHeatmap(this.ctx, this.view, s.activeResult.result, s.gapThresholdDbm);
    }
    if (s.selectedCell && s.activeResult) {
      drawSelection(this.ctx, this.view, s.activeResult.result.grid, s.selectedCell.ix, s.selectedCell.iy);
    }
    if (s.txPos) drawTxMarker(this.ctx, this.view, s.txPos);
  }

  private bindCanvas(): void {
    this.canvas.addEventListener("mousedown", (e) => {
      this.dragging = true;
      this.dragMoved = false;
      this.lastPx = e.offsetX;
      this.lastPy = e.offsetY;
    });
    this.canvas.addEventListener("mousemove", (e) => {
      if (!this.dragging) return;
      const dx = e.offsetX - this.lastPx;
      const dy = e.offsetY - this.lastPy;
      if (Math.abs(dx) + Math.abs(dy) > 2) this.dragMoved = true;
      if (this.dragMoved) {
        this.view.panBy(dx, dy);
        this.lastPx = e.offsetX;
        this.lastPy = e.offsetY;
        this.render();
      }
    });
    this.canvas.addEventListener("mouseup", (e) => {
      const wasDrag = this.dragMoved;
      this.dragging = false;
      this.dragMoved = false;
      if (wasDrag) return;
      const [wx, wy] = this.view.toWorld(e.offsetX, e.offsetY);
      if (this.state.mode === "place") {
        this.placeTx(wx, wy);
      } else if (this.state.activeResult) {
        const hit = cellAt(this.state.activeResult.result.grid, wx, wy);
        if (hit) void this.inspect(hit.ix, hit.iy);
      }
    });
    this.canvas.addEventListener("wheel", (e) => {
      e.preventDefault();
      this.view.zoomAt(e.offsetX, e.offsetY, e.deltaY < 0 ? 1.15 : 1 / 1.15);
      this.render();
    });
  }

  private setStatus(text: string): void {
    const el = this.root.querySelector<HTMLElement>("#status");
    if (el) el.textContent = text;
  }

  private setProgress(frac: number): void {
    const el = this.root.querySelector<HTMLProgressElement>("#job-progress");
    if (el) el.value = frac;
  }

  toast(message: string): void {
    const el = this.root.querySelector<HTMLElement>("#toast");
    if (!el) return;
    el.textContent = message;
    el.classList.add("visible");
    setTimeout(() => el.classList.remove("visible"), 4000);
  }

  renderSidebar(): void {
    const s = this.state;
    const sceneList = this.root.querySelector<HTMLElement>("#scene-list");
    if (sceneList) {
      sceneList.innerHTML = "";
      if (s.scenes.length === 0) {
        sceneList.innerHTML =
          '<div class="empty-state">no scenes yet; upload one via POST /api/scenes</div>';
      }
      for (const scene of s.scenes) {
        const item = document.createElement("button");
        item.className = "scene-item" + (scene.scene_id === s.sceneId ? " selected" : "");
        item.textContent = `${scene.scene_id} (${scene.n_triangles} triangles)`;
        item.addEventListener("click", () => void this.selectScene(scene.scene_id));
        sceneList.appendChild(item);
      }
    }
    const jobList = this.root.querySelector<HTMLElement>("#job-list");
    if (jobList) {
      jobList.innerHTML = "";
      const done = s.jobs.filter((j) => j.status === "done");
      for (const sel of ["compare-a", "compare-b"]) {
        const dropdown = this.root.querySelector<HTMLSelectElement>(`#${sel}`);
        if (dropdown) {
          const prev = dropdown.value;
          dropdown.innerHTML = "";
          for (const j of done) {
            const opt = document.createElement("option");
            opt.value = j.id;
            opt.textContent = j.id;
            dropdown.appendChild(opt);
          }
          if (prev) dropdown.value = prev;
        }
      }
      for (const j of s.jobs.slice().reverse().slice(0, 12)) {
        const item = document.createElement("div");
        item.className = `job-item ${j.status}`;
        item.textContent = `${j.id} ${j.status} ${(j.progress * 100).toFixed(0)}%`;
        if (j.status === "done") {
          item.addEventListener("click", () => {
            void this.api.jobResult(j.id).then((result) => {
              this.state.activeResult = { jobId: j.id, result };
              this.state.diff = null;
              this.render();
            });
          });
        }
        jobList.appendChild(item);
      }
    }
  }
}
