import type {
  CoverageGridResult,
  CoverageRequest,
  Footprint,
  Job,
  LinkResult,
  SceneSummary,
} from "./types";

/** Thin typed client over the service HTTP API. */
export class ApiClient {
  constructor(private base: string = "") {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const res = await fetch(this.base + path, {
      method,
      headers: body === undefined ? undefined : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!res.ok) {
      let detail = `${res.status} ${res.statusText}`;
      try {
        const doc = await res.json();
        if (doc && doc.detail) detail = `${res.status}: ${doc.detail}`;
      } catch {
        /* non-JSON error body */
      }
      throw new Error(detail);
    }
    return (await res.json()) as T;
  }

  listScenes(): Promise<{ scenes: SceneSummary[] }> {
    return this.request("GET", "/api/scenes");
  }

  uploadScene(doc: unknown): Promise<{ scene_id: string }> {
    return this.request("POST", "/api/scenes", doc);
  }

  footprint(sceneId: string): Promise<Footprint> {
    return this.request("GET", `/api/scenes/${sceneId}/footprint`);
  }

  submitCoverage(req: CoverageRequest): Promise<{ job_id: string }> {
    return this.request("POST", "/api/jobs/coverage", req);
  }

  listJobs(): Promise<{ jobs: Job[] }> {
    return this.request("GET", "/api/jobs");
  }

  job(jobId: string): Promise<Job> {
    return this.request("GET", `/api/jobs/${jobId}`);
  }

  jobResult(jobId: string): Promise<CoverageGridResult> {
    return this.request("GET", `/api/jobs/${jobId}/result`);
  }

  link(body: {
    scene_id: string;
    tx: { pos: number[]; power_dbm?: number };
    rx: { pos: number[] };
    freq_hz: number;
    profile?: string | Record<string, unknown>;
    time_s?: number;
  }): Promise<LinkResult> {
    return this.request("POST", "/api/link", body);
  }
}
