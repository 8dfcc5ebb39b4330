"""Coverage grids: one link simulation per cell center, with masking for
cells inside geometry and per-cell fault isolation."""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .channel import path_loss, rms_delay_spread
from .profiles import resolve
from .rt.engine import LinkContext, simulate_on_context
from .rt.path import TerminalSpec
from .scene import Scene

COVERAGE_SCHEMA_VERSION = 1
CSV_HEADER = ["x_m", "y_m", "z_m", "pl_db", "rsrp_dbm", "ds_ns", "n_paths", "masked"]


@dataclass(frozen=True)
class GridSpec:
    """Rectangle tiled into square-ish cells; links run at cell centers."""

    x_min: float
    y_min: float
    x_max: float
    y_max: float
    step: float = 1.0
    height: float = 1.5

    def __post_init__(self):
        if self.step <= 0:
            raise ValueError("grid step must be positive")
        if self.x_max <= self.x_min or self.y_max <= self.y_min:
            raise ValueError("grid extent must be positive")

    @property
    def n_x(self) -> int:
        return max(1, round((self.x_max - self.x_min) / self.step))

    @property
    def n_y(self) -> int:
        return max(1, round((self.y_max - self.y_min) / self.step))

    def cell_center(self, ix: int, iy: int) -> np.ndarray:
        return np.array([self.x_min + (ix + 0.5) * self.step,
                         self.y_min + (iy + 0.5) * self.step,
                         self.height])


@dataclass
class CoverageGrid:
    spec: GridSpec
    pl_db: np.ndarray            # (n_x, n_y), NaN where masked
    rsrp_dbm: np.ndarray
    ds_ns: np.ndarray
    n_paths: np.ndarray          # int
    masked: np.ndarray           # bool
    tx_power_dbm: float
    freq_hz: float
    errors: dict[tuple[int, int], str] = field(default_factory=dict)

    def covered_fraction(self) -> float:
        return float(1.0 - self.masked.mean()) if self.masked.size else 0.0

    def to_rows(self) -> list[list]:
        rows = []
        for iy in range(self.spec.n_y):
            for ix in range(self.spec.n_x):
                c = self.spec.cell_center(ix, iy)
                if self.masked[ix, iy]:
                    rows.append([c[0], c[1], c[2], "", "", "", int(self.n_paths[ix, iy]), 1])
                else:
                    rows.append([c[0], c[1], c[2],
                                 round(float(self.pl_db[ix, iy]), 4),
                                 round(float(self.rsrp_dbm[ix, iy]), 4),
                                 round(float(self.ds_ns[ix, iy]), 4),
                                 int(self.n_paths[ix, iy]), 0])
        return rows

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        w.writerows(self.to_rows())
        return buf.getvalue()

    def to_json_dict(self) -> dict:
        def clean(a):
            return [None if not np.isfinite(v) else round(float(v), 4) for v in a.T.ravel()]
        return {
            "schema_version": COVERAGE_SCHEMA_VERSION,
            "grid": {"x_min": self.spec.x_min, "y_min": self.spec.y_min,
                     "x_max": self.spec.x_max, "y_max": self.spec.y_max,
                     "step": self.spec.step, "height": self.spec.height,
                     "n_x": self.spec.n_x, "n_y": self.spec.n_y},
            "tx_power_dbm": self.tx_power_dbm,
            "freq_hz": self.freq_hz,
            "pl_db": clean(self.pl_db),
            "rsrp_dbm": clean(self.rsrp_dbm),
            "ds_ns": clean(self.ds_ns),
            "n_paths": [int(v) for v in self.n_paths.T.ravel()],
            "masked": [bool(v) for v in self.masked.T.ravel()],
            "covered_fraction": self.covered_fraction(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())


def coverage(scene: Scene, tx_spec: TerminalSpec, grid: GridSpec, f: float,
             profile="offline", tx_power_dbm: float = 0.0, time: float = 0.0,
             threads: int = 1,
             progress_cb=None) -> CoverageGrid:
    """Evaluate every cell; parallel and sequential execution produce
    identical grids (cells are independent and merged by index)."""
    cfg = resolve(profile)
    ctx = LinkContext.build(scene, time)
    nx, ny = grid.n_x, grid.n_y
    pl = np.full((nx, ny), np.nan)
    rs = np.full((nx, ny), np.nan)
    ds = np.full((nx, ny), np.nan)
    npaths = np.zeros((nx, ny), dtype=np.int64)
    masked = np.zeros((nx, ny), dtype=bool)
    errors: dict[tuple[int, int], str] = {}

    def eval_cell(ix: int, iy: int):
        center = grid.cell_center(ix, iy)
        try:
            if ctx.bvh.crossings_up(center) % 2 == 1:
                masked[ix, iy] = True      # inside geometry
                return
            r = simulate_on_context(ctx, tx_spec, TerminalSpec(center), f, cfg, time)
            npaths[ix, iy] = r.n_paths
            p = path_loss(r)
            if p is None:
                masked[ix, iy] = True      # no coverage
                return
            pl[ix, iy] = p
            rs[ix, iy] = tx_power_dbm - p
            ds[ix, iy] = rms_delay_spread(r) * 1e9
        except Exception as e:          # noqa: BLE001 - cell faults must not kill the grid
            masked[ix, iy] = True
            errors[(ix, iy)] = str(e)

    cells = [(ix, iy) for iy in range(ny) for ix in range(nx)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            done = 0
            for _ in pool.map(lambda c: eval_cell(*c), cells):
                done += 1
                if progress_cb is not None:
                    progress_cb(done / len(cells))
    else:
        for done, (ix, iy) in enumerate(cells, 1):
            eval_cell(ix, iy)
            if progress_cb is not None:
                progress_cb(done / len(cells))

    return CoverageGrid(spec=grid, pl_db=pl, rsrp_dbm=rs, ds_ns=ds, n_paths=npaths,
                        masked=masked, tx_power_dbm=tx_power_dbm, freq_hz=f,
                        errors=errors)
