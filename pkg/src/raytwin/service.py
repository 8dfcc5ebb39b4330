"""HTTP job service: scene registry, asynchronous coverage jobs and
synchronous online link queries, persisted as plain files.

Layout under the data dir: scenes/<id>.json, jobs/<id>.json (status
journal), results/<id>.json. Completed results are immutable; interrupted
jobs are marked failed on restart.
"""

from __future__ import annotations

import json
import threading
import time as _time
import uuid
from concurrent.futures import ThreadPoolExecutor
from contextlib import asynccontextmanager
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .antenna import parse_antenna_spec
from .coverage import GridSpec, coverage
from .materials import default_library
from .profiles import ProfileError, resolve as _resolve_profile
from .rt.engine import simulate_link
from .rt.path import TerminalSpec, realization_to_dict
from .scene import Scene, SceneError, load_scene, scene_from_dict

MAX_SCENE_BYTES = 100 * 1024 * 1024
GROUND_EPS_M = 0.05
JOB_STATES = ("queued", "running", "done", "failed")


def _now() -> float:
    return _time.time()


def resolve(profile):
    """Accept a preset name or a dict of custom engine overrides."""
    if isinstance(profile, dict):
        return _resolve_profile("custom", profile)
    return _resolve_profile(profile)


class JobStore:
    """Single-writer JSON journal, one file per job."""

    def __init__(self, root: Path):
        self.root = root
        self.root.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def write(self, job: dict) -> None:
        with self._lock:
            tmp = self.root / f".{job['id']}.tmp"
            tmp.write_text(json.dumps(job))
            tmp.replace(self.root / f"{job['id']}.json")

    def read(self, job_id: str) -> dict | None:
        p = self.root / f"{job_id}.json"
        if not p.exists():
            return None
        return json.loads(p.read_text())

    def all_jobs(self) -> list[dict]:
        out = []
        for p in sorted(self.root.glob("*.json")):
            try:
                out.append(json.loads(p.read_text()))
            except json.JSONDecodeError:
                continue
        return out


class ServiceState:
    def __init__(self, data_dir: str | Path, max_concurrent_jobs: int = 2,
                 link_capacity: int = 8):
        self.data_dir = Path(data_dir)
        self.scenes_dir = self.data_dir / "scenes"
        self.results_dir = self.data_dir / "results"
        self.scenes_dir.mkdir(parents=True, exist_ok=True)
        self.results_dir.mkdir(parents=True, exist_ok=True)
        self.jobs = JobStore(self.data_dir / "jobs")
        self.pool = ThreadPoolExecutor(max_workers=max_concurrent_jobs,
                                       thread_name_prefix="coverage-job")
        self.link_slots = threading.Semaphore(link_capacity)
        self.library = default_library()
        self._scene_cache: dict[str, Scene] = {}
        self._cancelled: set[str] = set()
        self._recover()

    def _recover(self) -> None:
        for job in self.jobs.all_jobs():
            if job["status"] in ("queued", "running"):
                job["status"] = "failed"
                job["error"] = "interrupted by restart"
                job["finished_at"] = _now()
                self.jobs.write(job)

    def scene_path(self, scene_id: str) -> Path:
        return self.scenes_dir / f"{scene_id}.json"

    def load_scene_cached(self, scene_id: str) -> Scene:
        if scene_id not in self._scene_cache:
            p = self.scene_path(scene_id)
            if not p.exists():
                raise KeyError(scene_id)
            self._scene_cache[scene_id] = load_scene(p, self.library)
        return self._scene_cache[scene_id]

    def shutdown(self) -> None:
        self.pool.shutdown(wait=False, cancel_futures=True)


def _footprint(scene: Scene) -> list[list[list[float]]]:
    """Convex-hull outline of each connected above-ground component,
    projected to the xy plane."""
    from scipy.spatial import ConvexHull

    tris = scene.triangles
    verts = scene.vertices
    if not len(tris):
        return []
    above = np.array([bool((verts[t][:, 2] > GROUND_EPS_M).any()) for t in tris])
    parent = list(range(len(tris)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    by_vertex: dict[int, int] = {}
    for t_idx, t in enumerate(tris):
        if not above[t_idx]:
            continue
        for v in t:
            v = int(v)
            if v in by_vertex:
                ra, rb = find(by_vertex[v]), find(t_idx)
                if ra != rb:
                    parent[max(ra, rb)] = min(ra, rb)
            else:
                by_vertex[v] = t_idx
    groups: dict[int, set[int]] = {}
    for t_idx, t in enumerate(tris):
        if not above[t_idx]:
            continue
        groups.setdefault(find(t_idx), set()).update(int(v) for v in t)
    polygons = []
    for group in groups.values():
        pts = verts[sorted(group)][:, :2]
        if len(pts) < 3:
            continue
        hull = ConvexHull(pts)
        polygons.append([[float(x), float(y)] for x, y in pts[hull.vertices]])
    polygons.sort()
    return polygons


def create_app(data_dir: str | Path, max_concurrent_jobs: int = 2,
               link_capacity: int = 8, ui_dir: str | Path | None = None) -> FastAPI:
    state = ServiceState(data_dir, max_concurrent_jobs, link_capacity)

    @asynccontextmanager
    async def lifespan(_app):
        yield
        state.shutdown()

    app = FastAPI(title="raytwin service", version="1", lifespan=lifespan)
    app.state.engine = state
    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
                       allow_headers=["*"])

    @app.exception_handler(SceneError)
    async def scene_error(_req, exc):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.post("/api/scenes", status_code=201)
    async def upload_scene(request: Request):
        body = await request.body()
        if len(body) > MAX_SCENE_BYTES:
            raise HTTPException(413, "scene too large")
        try:
            doc = json.loads(body)
        except json.JSONDecodeError as e:
            raise HTTPException(400, f"malformed JSON: {e}") from e
        scene_from_dict(doc, state.library)     # validate before persisting
        scene_id = uuid.uuid4().hex[:12]
        state.scene_path(scene_id).write_text(json.dumps(doc))
        return {"scene_id": scene_id}

    @app.get("/api/scenes")
    def list_scenes():
        out = []
        for p in sorted(state.scenes_dir.glob("*.json")):
            sid = p.stem
            try:
                scene = state.load_scene_cached(sid)
            except (SceneError, KeyError):
                continue
            out.append({
                "scene_id": sid,
                "n_triangles": scene.n_static_triangles,
                "n_dynamic_objects": len(scene.dynamic_objects),
                "bounds": {"lo": scene.bounds.lo.tolist(), "hi": scene.bounds.hi.tolist()},
            })
        return {"scenes": out}

    def _get_scene(scene_id: str) -> Scene:
        try:
            return state.load_scene_cached(scene_id)
        except KeyError:
            raise HTTPException(404, f"unknown scene {scene_id}") from None

    @app.get("/api/scenes/{scene_id}/footprint")
    def footprint(scene_id: str):
        scene = _get_scene(scene_id)
        return {
            "scene_id": scene_id,
            "bounds": {"lo": scene.bounds.lo.tolist(), "hi": scene.bounds.hi.tolist()},
            "polygons": _footprint(scene),
        }

    def _run_coverage_job(job_id: str) -> None:
        job = state.jobs.read(job_id)
        if job is None or job_id in state._cancelled:
            return
        job["status"] = "running"
        job["started_at"] = _now()
        state.jobs.write(job)
        req = job["request"]
        try:
            scene = state.load_scene_cached(req["scene_id"])
            grid_spec = GridSpec(**req["grid"])
            cfg = resolve(req.get("profile", "offline"))
            tx = TerminalSpec(np.asarray(req["tx"]["pos"], dtype=float),
                              parse_antenna_spec(req["tx"].get("antenna", "isotropic")))
            last_written = 0.0

            def progress(frac: float) -> None:
                nonlocal last_written
                job["progress"] = max(job["progress"], round(frac, 4))
                if frac - last_written >= 0.05 or frac >= 1.0:
                    last_written = frac
                    state.jobs.write(job)

            grid = coverage(scene, tx, grid_spec, req["freq_hz"], cfg,
                            tx_power_dbm=req["tx"].get("power_dbm", 0.0),
                            time=req.get("time_s", 0.0), progress_cb=progress)
            result_path = state.results_dir / f"{job_id}.json"
            result_path.write_text(grid.to_json())
            job["status"] = "done"
            job["progress"] = 1.0
            job["result"] = result_path.name
        except Exception as e:          # noqa: BLE001 - job faults become job status
            job["status"] = "failed"
            job["error"] = str(e)
        job["finished_at"] = _now()
        state.jobs.write(job)

    @app.post("/api/jobs/coverage", status_code=202)
    def submit_coverage(body: dict):
        for key in ("scene_id", "tx", "freq_hz", "grid"):
            if key not in body:
                raise HTTPException(400, f"missing field {key!r}")
        scene = _get_scene(body["scene_id"])
        try:
            grid = GridSpec(**body["grid"])
        except (TypeError, ValueError) as e:
            raise HTTPException(400, f"bad grid: {e}") from e
        lo, hi = scene.bounds.lo, scene.bounds.hi
        margin = 1000.0
        if (grid.x_min < lo[0] - margin or grid.x_max > hi[0] + margin
                or grid.y_min < lo[1] - margin or grid.y_max > hi[1] + margin):
            raise HTTPException(400, "grid far outside scene bounds")
        try:
            resolve(body.get("profile", "offline"))
        except ProfileError as e:
            raise HTTPException(400, str(e)) from e
        job = {
            "id": uuid.uuid4().hex[:12],
            "kind": "coverage",
            "status": "queued",
            "progress": 0.0,
            "created_at": _now(),
            "request": body,
        }
        state.jobs.write(job)
        state.pool.submit(_run_coverage_job, job["id"])
        return {"job_id": job["id"]}

    @app.get("/api/jobs")
    def list_jobs():
        jobs = state.jobs.all_jobs()
        jobs.sort(key=lambda j: j.get("created_at", 0.0))
        return {"jobs": jobs}

    @app.get("/api/jobs/{job_id}")
    def job_status(job_id: str):
        job = state.jobs.read(job_id)
        if job is None:
            raise HTTPException(404, f"unknown job {job_id}")
        return job

    @app.get("/api/jobs/{job_id}/result")
    def job_result(job_id: str):
        job = state.jobs.read(job_id)
        if job is None:
            raise HTTPException(404, f"unknown job {job_id}")
        if job["status"] != "done":
            raise HTTPException(409, f"job is {job['status']}, result not available")
        result_path = state.results_dir / f"{job_id}.json"
        if not result_path.exists():
            raise HTTPException(500, "result file missing")
        return json.loads(result_path.read_text())

    @app.delete("/api/jobs/{job_id}")
    def cancel_job(job_id: str):
        job = state.jobs.read(job_id)
        if job is None:
            raise HTTPException(404, f"unknown job {job_id}")
        state._cancelled.add(job_id)
        if job["status"] == "queued":
            job["status"] = "failed"
            job["error"] = "cancelled"
            job["finished_at"] = _now()
            state.jobs.write(job)
        return {"job_id": job_id, "status": job["status"]}

    @app.post("/api/link")
    def link(body: dict):
        for key in ("scene_id", "tx", "rx", "freq_hz"):
            if key not in body:
                raise HTTPException(400, f"missing field {key!r}")
        scene = _get_scene(body["scene_id"])
        try:
            cfg = resolve(body.get("profile", "online"))
        except ProfileError as e:
            raise HTTPException(400, str(e)) from e
        if not state.link_slots.acquire(blocking=False):
            raise HTTPException(503, "link capacity exhausted, retry later")
        try:
            tx = TerminalSpec(np.asarray(body["tx"]["pos"], dtype=float),
                              parse_antenna_spec(body["tx"].get("antenna", "isotropic")))
            rx = TerminalSpec(np.asarray(body["rx"]["pos"], dtype=float),
                              parse_antenna_spec(body["rx"].get("antenna", "isotropic")))
            r = simulate_link(scene, tx, rx, body["freq_hz"], cfg,
                              time=body.get("time_s", 0.0))
        finally:
            state.link_slots.release()
        doc = realization_to_dict(r)
        doc["compute_ms"] = r.compute_seconds * 1e3
        doc["tx_power_dbm"] = body["tx"].get("power_dbm", 0.0)
        return doc

    ui_path = Path(ui_dir) if ui_dir else Path(__file__).resolve().parents[2] / "frontend" / "dist"
    if ui_path.exists():
        app.mount("/ui", StaticFiles(directory=str(ui_path), html=True), name="ui")

    return app
