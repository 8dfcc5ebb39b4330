"""Shooting-and-bouncing-rays candidate search (geometry only).

The sweep records interaction signatures of ray branches passing within the
reception sphere; exact geometry is recovered afterwards by refinement, so
this stage only affects recall, never accuracy.
"""

from __future__ import annotations

import numpy as np

from .. import kernels
from ..bvh import BvhIndex
from ..materials import MaterialLibrary, slab_transmission
from ..scene import SceneSnapshot
from .config import EngineConfig
from .launch import angular_separation, launch_directions
from .path import REFLECTION, TRANSMISSION, Signature

TRANSMIT_PRUNE_DB = -60.0   # single-pass slab loss beyond which branches stop


def _transmit_viable(lib: MaterialLibrary, f: float) -> np.ndarray:
    """Per-material flag: can a ray usefully continue through this slab."""
    out = np.zeros(len(lib), dtype=np.bool_)
    floor = 10.0 ** (TRANSMIT_PRUNE_DB / 20.0)
    for i in range(len(lib)):
        t_perp, t_par = slab_transmission(lib[i], 1.0, f)
        out[i] = max(abs(t_perp), abs(t_par)) > floor
    return out


def trace_sbr(snap: SceneSnapshot, bvh: BvhIndex, tx: np.ndarray, rx: np.ndarray,
              cfg: EngineConfig, f: float,
              library: MaterialLibrary | None = None) -> set[Signature]:
    """Candidate R/T signatures from a Fibonacci sweep launched at tx."""
    if snap.n_triangles == 0:
        return {()}
    lib = library if library is not None else snap.scene.materials
    dirs = launch_directions(cfg.n_rays)
    gamma = angular_separation(cfg.n_rays)
    transmit_ok = _transmit_viable(lib, f)[snap.material_ids]
    if cfg.max_transmissions == 0:
        transmit_ok = np.zeros_like(transmit_ok)

    n_cand, n_codes = 4096, 16384
    while True:
        out_codes = np.empty(n_codes, dtype=np.int64)
        out_lens = np.empty(n_cand, dtype=np.int64)
        total, codes_needed = kernels.sbr_sweep(
            dirs, np.asarray(tx, dtype=np.float64), np.asarray(rx, dtype=np.float64),
            bvh.node_lo, bvh.node_hi, bvh.node_left, bvh.node_right,
            bvh.node_start, bvh.node_count, bvh.prim,
            snap.v0, snap.v1, snap.v2, snap.normals, transmit_ok,
            cfg.max_order, cfg.max_reflections, cfg.max_transmissions,
            gamma, cfg.rx_sphere_scale, out_codes, out_lens)
        if total <= n_cand and codes_needed <= n_codes:
            break
        n_cand = max(n_cand * 2, total + 1)
        n_codes = max(n_codes * 2, codes_needed + 1)

    signatures: set[Signature] = set()
    pos = 0
    for i in range(total):
        ln = int(out_lens[i])
        sig = []
        for c in out_codes[pos:pos + ln]:
            kind = TRANSMISSION if c & 1 else REFLECTION
            sig.append((kind, int(c) // 2))
        signatures.add(tuple(sig))
        pos += ln
    return signatures
