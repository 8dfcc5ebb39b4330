/** Payload shapes of the planning service API. */

export interface SceneSummary {
  scene_id: string;
  n_triangles: number;
  n_dynamic_objects: number;
  bounds: { lo: number[]; hi: number[] };
}

export interface Footprint {
  scene_id: string;
  bounds: { lo: number[]; hi: number[] };
  polygons: number[][][];
}

export interface GridRequest {
  x_min: number;
  y_min: number;
  x_max: number;
  y_max: number;
  step: number;
  height: number;
}

export interface CoverageRequest {
  scene_id: string;
  tx: { pos: number[]; power_dbm: number };
  freq_hz: number;
  profile: string | Record<string, unknown>;
  grid: GridRequest;
}

export type JobStatus = "queued" | "running" | "done" | "failed";

export interface Job {
  id: string;
  kind: string;
  status: JobStatus;
  progress: number;
  created_at: number;
  request: CoverageRequest;
  error?: string;
}

export interface CoverageGridResult {
  schema_version: number;
  grid: GridRequest & { n_x: number; n_y: number };
  tx_power_dbm: number;
  freq_hz: number;
  pl_db: (number | null)[];
  rsrp_dbm: (number | null)[];
  ds_ns: (number | null)[];
  n_paths: number[];
  masked: boolean[];
  covered_fraction: number;
}

export interface Mpc {
  delay_s: number;
  power_db: number;
  phase_rad: number;
  aod_az_deg: number;
  aod_el_deg: number;
  aoa_az_deg: number;
  aoa_el_deg: number;
  doppler_hz: number;
  signature: [string, number][];
}

export interface LinkResult {
  schema_version: number;
  tx: number[];
  rx: number[];
  freq_hz: number;
  n_paths: number;
  mpcs: Mpc[];
  compute_ms: number;
  tx_power_dbm: number;
}
