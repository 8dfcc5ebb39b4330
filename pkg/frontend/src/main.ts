import { ApiClient } from "./api";
import { PlannerApp } from "./app";
import "./style.css";

function bindControls(app: PlannerApp): void {
  const num = (id: string, apply: (v: number) => void) => {
    const el = document.querySelector<HTMLInputElement>(`#${id}`);
    if (!el) return;
    el.addEventListener("change", () => apply(parseFloat(el.value)));
  };
  num("tx-height", (v) => (app.state.txHeight = v));
  num("tx-power", (v) => (app.state.txPowerDbm = v));
  num("freq-ghz", (v) => (app.state.freqGhz = v));
  num("grid-step", (v) => (app.state.gridStep = v));
  num("gap-threshold", (v) => {
    app.state.gapThresholdDbm = v;
    app.render();
  });
  const profile = document.querySelector<HTMLSelectElement>("#profile");
  profile?.addEventListener("change", () => (app.state.profile = profile.value));

  const modePlace = document.querySelector<HTMLInputElement>("#mode-place");
  const modeInspect = document.querySelector<HTMLInputElement>("#mode-inspect");
  modePlace?.addEventListener("change", () => (app.state.mode = "place"));
  modeInspect?.addEventListener("change", () => (app.state.mode = "inspect"));

  document.querySelector<HTMLButtonElement>("#run-coverage")?.addEventListener("click", () => {
    app.runCoverage().catch((err) => app.toast(String(err)));
  });
  document.querySelector<HTMLButtonElement>("#compare")?.addEventListener("click", () => {
    const a = document.querySelector<HTMLSelectElement>("#compare-a")?.value;
    const b = document.querySelector<HTMLSelectElement>("#compare-b")?.value;
    if (!a || !b) {
      app.toast("pick two finished jobs to compare");
      return;
    }
    app.comparePlacements(a, b).catch((err) => app.toast(String(err)));
  });
  document.querySelector<HTMLButtonElement>("#clear-diff")?.addEventListener("click", () => {
    app.state.diff = null;
    app.render();
  });
}

export function startApp(root: HTMLElement): PlannerApp {
  const canvas = root.querySelector<HTMLCanvasElement>("#map");
  if (!canvas) throw new Error("missing #map canvas");
  const app = new PlannerApp(root, new ApiClient(""), canvas);
  bindControls(app);
  void app.bootstrap().catch((err) => app.toast(String(err)));
  return app;
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  startApp(document.getElementById("app") as HTMLElement);
}
