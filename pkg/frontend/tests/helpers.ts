/** jsdom has no canvas rasterizer; record 2D draw calls instead. */

export interface DrawCall {
  op: string;
  args: unknown[];
  fillStyle?: string;
  strokeStyle?: string;
  globalAlpha?: number;
}

export class RecordingContext2D {
  calls: DrawCall[] = [];
  fillStyle = "";
  strokeStyle = "";
  lineWidth = 1;
  globalAlpha = 1;
  font = "";

  private record(op: string, ...args: unknown[]) {
    this.calls.push({
      op,
      args,
      fillStyle: this.fillStyle,
      strokeStyle: this.strokeStyle,
      globalAlpha: this.globalAlpha,
    });
  }

  fillRect(...a: unknown[]) { this.record("fillRect", ...a); }
  strokeRect(...a: unknown[]) { this.record("strokeRect", ...a); }
  beginPath(...a: unknown[]) { this.record("beginPath", ...a); }
  closePath(...a: unknown[]) { this.record("closePath", ...a); }
  moveTo(...a: unknown[]) { this.record("moveTo", ...a); }
  lineTo(...a: unknown[]) { this.record("lineTo", ...a); }
  arc(...a: unknown[]) { this.record("arc", ...a); }
  fill(...a: unknown[]) { this.record("fill", ...a); }
  stroke(...a: unknown[]) { this.record("stroke", ...a); }
  fillText(...a: unknown[]) { this.record("fillText", ...a); }

  countOf(op: string): number {
    return this.calls.filter((c) => c.op === op).length;
  }

  reset() {
    this.calls = [];
  }
}

const contexts = new WeakMap<HTMLCanvasElement, RecordingContext2D>();

/** Patch jsdom so every canvas hands out a recording context. */
export function installCanvasStub(): void {
  (HTMLCanvasElement.prototype as unknown as { getContext: unknown }).getContext =
    function (this: HTMLCanvasElement) {
      let ctx = contexts.get(this);
      if (!ctx) {
        ctx = new RecordingContext2D();
        contexts.set(this, ctx);
      }
      return ctx;
    };
}

export function contextOf(canvas: HTMLCanvasElement): RecordingContext2D {
  const ctx = canvas.getContext("2d") as unknown as RecordingContext2D;
  return ctx;
}

/** Dispatch a mouse event with offsetX/offsetY, which jsdom cannot set. */
export function mouse(el: HTMLElement, type: string, x: number, y: number): void {
  const ev = new MouseEvent(type, { bubbles: true });
  Object.defineProperty(ev, "offsetX", { value: x });
  Object.defineProperty(ev, "offsetY", { value: y });
  el.dispatchEvent(ev);
}

/** Minimal DOM skeleton matching index.html's control ids. */
export function mountAppDom(): HTMLElement {
  document.body.innerHTML = `
    <div id="app">
      <div id="scene-list"></div>
      <input id="tx-height" type="number" value="25" />
      <input id="tx-power" type="number" value="30" />
      <input id="freq-ghz" type="number" value="6" />
      <select id="profile"><option value="offline">offline</option></select>
      <input id="grid-step" type="number" value="4" />
      <input id="gap-threshold" type="number" value="-110" />
      <input type="radio" name="mode" id="mode-place" checked />
      <input type="radio" name="mode" id="mode-inspect" />
      <button id="run-coverage"></button>
      <progress id="job-progress" max="1" value="0"></progress>
      <div id="status"></div>
      <div id="job-list"></div>
      <select id="compare-a"></select>
      <select id="compare-b"></select>
      <button id="compare"></button>
      <button id="clear-diff"></button>
      <canvas id="map" width="960" height="720"></canvas>
      <div id="mpc-panel"></div>
      <div id="toast"></div>
    </div>`;
  return document.getElementById("app") as HTMLElement;
}
