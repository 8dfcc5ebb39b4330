"""Measurement-driven material calibration by simulated annealing.

The objective is the RMSE between predicted and observed path loss over the
training points; proposals are per-parameter Gaussians reflected at the
bounds, accepted by the Metropolis rule. Everything is seeded and
deterministic.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .channel import path_loss
from .materials import Material, MaterialLibrary
from .profiles import resolve
from .rt.engine import LinkContext, simulate_on_context
from .rt.path import TerminalSpec
from .scene import Scene

REPORT_SCHEMA_VERSION = 1
CALIBRATABLE_FIELDS = ("eps_r", "sigma", "scatter_s")
_FIELD_DOMAIN = {"eps_r": (1.0, np.inf), "sigma": (0.0, np.inf), "scatter_s": (0.0, 1.0)}
MEASUREMENT_CSV_HEADER = ["x_m", "y_m", "z_m", "freq_hz", "observed_db", "kind",
                          "tx_power_dbm", "los_class"]


class CalibrationError(ValueError):
    """Bad parameter spec, bounds or measurement data."""


@dataclass(frozen=True)
class MeasurementPoint:
    position: np.ndarray
    f: float
    observed_pl_db: float           # already converted from RSRP when needed
    los_class: str | None = None    # LoS | OLoS | NLoS

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=np.float64))
        if not np.isfinite(self.observed_pl_db):
            raise CalibrationError("observed value must be finite")


@dataclass(frozen=True)
class ParameterSpec:
    material: str
    field: str
    lo: float
    hi: float

    def __post_init__(self):
        if self.field not in CALIBRATABLE_FIELDS:
            raise CalibrationError(f"cannot calibrate field {self.field!r}")
        # lo == hi pins the parameter (degenerate but legal search)
        if self.lo > self.hi:
            raise CalibrationError(f"{self.material}.{self.field}: need lo <= hi")
        dom_lo, dom_hi = _FIELD_DOMAIN[self.field]
        if self.lo < dom_lo or self.hi > dom_hi:
            raise CalibrationError(
                f"{self.material}.{self.field}: bounds outside physical domain")

    @property
    def key(self) -> str:
        return f"{self.material}.{self.field}"


@dataclass(frozen=True)
class SaSchedule:
    t0: float = 25.0                # initial temperature, dB^2 objective units
    cooling: float = 0.95
    steps: int = 60
    moves_per_step: int = 10
    step_scale: float = 0.1         # proposal sigma as a fraction of bound range
    seed: int = 0

    def __post_init__(self):
        if min(self.t0, self.steps, self.moves_per_step, self.step_scale) <= 0:
            raise CalibrationError("schedule values must be positive")
        if not 0.0 < self.cooling < 1.0:
            raise CalibrationError("cooling must be in (0, 1)")


@dataclass
class CalibrationProblem:
    scene: Scene
    tx: TerminalSpec
    params: list[ParameterSpec]
    train_points: list[MeasurementPoint]
    validation_points: list[MeasurementPoint] = field(default_factory=list)
    profile: object = "online"
    no_coverage_penalty_db: float = 30.0
    time: float = 0.0

    def __post_init__(self):
        if not self.params:
            raise CalibrationError("at least one parameter required")
        if not self.train_points:
            raise CalibrationError("at least one training point required")
        names = {m.name for m in self.scene.materials.materials}
        for p in self.params:
            if p.material not in names:
                raise CalibrationError(f"unknown material {p.material!r}")


@dataclass
class CalibrationResult:
    best_params: dict[str, float]
    start_params: dict[str, float]
    rmse_train_before: float
    rmse_train_after: float
    rmse_validation_before: float | None
    rmse_validation_after: float | None
    trace: list[float]              # objective of every proposal, in order
    accepted: int
    schedule: SaSchedule


def _apply_params(lib: MaterialLibrary, params: list[ParameterSpec],
                  values: np.ndarray) -> MaterialLibrary:
    out = lib
    for spec, v in zip(params, values):
        mid = out.id_of(spec.material)
        mat = out[mid]
        out = out.replace(mid, replace(mat, **{spec.field: float(v)}))
    return out


def _rmse_over(ctx: LinkContext, problem: CalibrationProblem, lib: MaterialLibrary,
               cfg, points: list[MeasurementPoint]) -> float:
    errs = np.empty(len(points))
    for i, pt in enumerate(points):
        r = simulate_on_context(ctx, problem.tx, TerminalSpec(pt.position), pt.f, cfg,
                                problem.time, library=lib)
        pl = path_loss(r)
        if pl is None:
            errs[i] = problem.no_coverage_penalty_db
        else:
            errs[i] = pl - pt.observed_pl_db
    return float(np.sqrt(np.mean(errs ** 2)))


def objective(values: np.ndarray, problem: CalibrationProblem,
              ctx: LinkContext | None = None) -> float:
    """Training RMSE (dB) for one parameter vector; order-invariant in the
    point list, deterministic."""
    for spec, v in zip(problem.params, values):
        if not spec.lo <= v <= spec.hi:
            raise CalibrationError(f"{spec.key}={v} outside bounds")
    if ctx is None:
        ctx = LinkContext.build(problem.scene, problem.time)
    cfg = resolve(problem.profile)
    lib = _apply_params(problem.scene.materials, problem.params, np.asarray(values))
    return _rmse_over(ctx, problem, lib, cfg, problem.train_points)


def _reflect(v: float, lo: float, hi: float) -> float:
    """Fold a proposal back into [lo, hi] by reflection at the bounds."""
    if hi == lo:
        return lo
    span = hi - lo
    period = 2.0 * span
    x = (v - lo) % period
    if x < 0:
        x += period
    return lo + (x if x <= span else period - x)


def simulated_annealing(problem: CalibrationProblem,
                        schedule: SaSchedule = SaSchedule()) -> CalibrationResult:
    """Metropolis annealing over the bounded parameters; returns the best
    parameters ever visited, with before/after RMSE on train and validation."""
    rng = np.random.default_rng(schedule.seed)
    ctx = LinkContext.build(problem.scene, problem.time)
    cfg = resolve(problem.profile)
    lo = np.array([p.lo for p in problem.params])
    hi = np.array([p.hi for p in problem.params])
    sigma = schedule.step_scale * (hi - lo)

    start = np.array([
        min(max(_current_value(problem.scene.materials, p), p.lo), p.hi)
        for p in problem.params])

    def evaluate(values: np.ndarray) -> float:
        lib = _apply_params(problem.scene.materials, problem.params, values)
        return _rmse_over(ctx, problem, lib, cfg, problem.train_points)

    def validation_rmse(values: np.ndarray) -> float | None:
        if not problem.validation_points:
            return None
        lib = _apply_params(problem.scene.materials, problem.params, values)
        return _rmse_over(ctx, problem, lib, cfg, problem.validation_points)

    current = start.copy()
    current_obj = evaluate(current)
    best = current.copy()
    best_obj = current_obj
    rmse_train_before = current_obj
    rmse_val_before = validation_rmse(start)

    trace: list[float] = []
    accepted = 0
    temperature = schedule.t0
    for _ in range(schedule.steps):
        for _ in range(schedule.moves_per_step):
            proposal = current + rng.normal(0.0, 1.0, size=len(current)) * sigma
            for i in range(len(proposal)):
                proposal[i] = _reflect(proposal[i], lo[i], hi[i])
            obj = evaluate(proposal)
            trace.append(obj)
            delta = obj - current_obj
            if delta <= 0 or rng.random() < np.exp(-delta / temperature):
                current = proposal
                current_obj = obj
                accepted += 1
                if obj < best_obj:
                    best = proposal.copy()
                    best_obj = obj
        temperature *= schedule.cooling

    return CalibrationResult(
        best_params={p.key: float(v) for p, v in zip(problem.params, best)},
        start_params={p.key: float(v) for p, v in zip(problem.params, start)},
        rmse_train_before=rmse_train_before,
        rmse_train_after=best_obj,
        rmse_validation_before=rmse_val_before,
        rmse_validation_after=validation_rmse(best),
        trace=trace,
        accepted=accepted,
        schedule=schedule)


def _current_value(lib: MaterialLibrary, spec: ParameterSpec) -> float:
    mat = lib[lib.id_of(spec.material)]
    v = getattr(mat, spec.field)
    if isinstance(v, tuple):
        raise CalibrationError(f"{spec.key}: cannot calibrate a tabulated field")
    return float(v)


def split_points(points: list[MeasurementPoint], validation_count: int,
                 seed: int) -> tuple[list[MeasurementPoint], list[MeasurementPoint]]:
    """Seeded shuffle then split into (train, validation); disjoint and
    exhaustive."""
    if not 0 < validation_count < len(points):
        raise CalibrationError(
            f"validation_count must be in (0, {len(points)}), got {validation_count}")
    perm = np.random.default_rng(seed).permutation(len(points))
    val_idx = set(perm[:validation_count].tolist())
    train = [p for i, p in enumerate(points) if i not in val_idx]
    val = [p for i, p in enumerate(points) if i in val_idx]
    return train, val


def report(result: CalibrationResult) -> dict:
    """Machine-readable calibration report; see render_report for the table."""
    return {
        "schema_version": REPORT_SCHEMA_VERSION,
        "rmse_db": {
            "train_before": result.rmse_train_before,
            "train_after": result.rmse_train_after,
            "validation_before": result.rmse_validation_before,
            "validation_after": result.rmse_validation_after,
        },
        "parameters": [
            {"name": k, "start": result.start_params[k], "calibrated": v}
            for k, v in result.best_params.items()
        ],
        "trace": {
            "n_evaluations": len(result.trace),
            "accepted": result.accepted,
            "best_objective": min(result.trace) if result.trace else result.rmse_train_after,
            "values": result.trace,
        },
        "schedule": {
            "t0": result.schedule.t0, "cooling": result.schedule.cooling,
            "steps": result.schedule.steps, "moves_per_step": result.schedule.moves_per_step,
            "step_scale": result.schedule.step_scale, "seed": result.schedule.seed,
        },
    }


def render_report(result: CalibrationResult) -> str:
    lines = ["calibration result", "-" * 54]
    lines.append(f"{'set':<12}{'rmse before':>14}{'rmse after':>14}")
    lines.append(f"{'train':<12}{result.rmse_train_before:>12.2f} dB"
                 f"{result.rmse_train_after:>11.2f} dB")
    if result.rmse_validation_before is not None:
        lines.append(f"{'validation':<12}{result.rmse_validation_before:>12.2f} dB"
                     f"{result.rmse_validation_after:>11.2f} dB")
    lines.append("-" * 54)
    for k, v in result.best_params.items():
        lines.append(f"{k:<24}{result.start_params[k]:>10.4f} -> {v:>10.4f}")
    lines.append(f"evaluations: {len(result.trace)}  accepted: {result.accepted}")
    return "\n".join(lines)


def load_measurements_csv(path: str | Path) -> list[MeasurementPoint]:
    """Measurement CSV per the repo schema; RSRP rows are converted to PL
    using their tx_power_dbm column."""
    points = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(MEASUREMENT_CSV_HEADER) - set(reader.fieldnames or [])
        if missing:
            raise CalibrationError(f"measurement CSV missing columns: {sorted(missing)}")
        for row in reader:
            kind = row["kind"].strip().lower()
            observed = float(row["observed_db"])
            if kind == "rsrp":
                observed = float(row["tx_power_dbm"]) - observed
            elif kind != "pl":
                raise CalibrationError(f"unknown measurement kind {kind!r}")
            los = row["los_class"].strip() or None
            points.append(MeasurementPoint(
                position=np.array([float(row["x_m"]), float(row["y_m"]), float(row["z_m"])]),
                f=float(row["freq_hz"]),
                observed_pl_db=observed,
                los_class=los))
    if not points:
        raise CalibrationError("measurement CSV has no rows")
    return points


def save_measurements_csv(points: list[MeasurementPoint], path: str | Path,
                          tx_power_dbm: float = 0.0) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(MEASUREMENT_CSV_HEADER)
        for p in points:
            w.writerow([p.position[0], p.position[1], p.position[2], p.f,
                        round(p.observed_pl_db, 6), "pl", tx_power_dbm, p.los_class or ""])
