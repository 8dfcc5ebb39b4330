"""Link simulation pipeline: candidate search, exact refinement, diffraction,
scattering, polarimetric field evaluation and filtering."""

from __future__ import annotations

import time as _time
from dataclasses import dataclass, replace

import numpy as np

from ..bvh import BvhIndex, build_bvh_for
from ..geometry import SPEED_OF_LIGHT
from ..scene import DiffractionEdge, Scene, SceneSnapshot, extract_diffraction_edges, snapshot
from .config import EngineConfig
from .field import apply_antennas, compute_field
from .image_method import (IM_FACET_GUARD, Facet, build_facets, enumerate_images,
                           refine_specular)
from .path import ChannelRealization, PropagationPath, Signature, TerminalSpec
from .sbr import trace_sbr
from .scattering import scattering_amplitudes
from .utd import diffraction_paths


@dataclass
class LinkContext:
    """Immutable per-(scene, time) state shared across links in a sweep."""

    snap: SceneSnapshot
    bvh: BvhIndex
    edges: list[DiffractionEdge]
    facets: list[Facet]

    @classmethod
    def build(cls, scene: Scene, time: float = 0.0,
              dihedral_threshold_deg: float = 10.0) -> "LinkContext":
        snap = snapshot(scene, time)
        return cls(snap=snap, bvh=build_bvh_for(snap),
                   edges=extract_diffraction_edges(scene, dihedral_threshold_deg, time),
                   facets=build_facets(snap))


def _im_supplement_order(cfg: EngineConfig, n_facets: int) -> int:
    """Adaptive image-method order: the tree is exponential in facet count,
    so dense scenes rely on the ray sweep alone."""
    if not cfg.im_supplement or n_facets > IM_FACET_GUARD:
        return 0
    if n_facets <= 12:
        return min(cfg.max_reflections, 3)
    if n_facets <= 40:
        return min(cfg.max_reflections, 2)
    return 0


def _resolve_config(profile, overrides: dict | None = None) -> EngineConfig:
    from ..profiles import resolve
    return resolve(profile, overrides or {})


def simulate_link(scene: Scene, tx_spec: TerminalSpec, rx_spec: TerminalSpec, f: float,
                  profile="online", time: float = 0.0,
                  context: LinkContext | None = None) -> ChannelRealization:
    """Full deterministic pipeline for one Tx-Rx link at one instant."""
    cfg = _resolve_config(profile)
    if context is None:
        context = LinkContext.build(scene, time)
    return simulate_on_context(context, tx_spec, rx_spec, f, cfg, time)


def simulate_on_context(ctx: LinkContext, tx_spec: TerminalSpec, rx_spec: TerminalSpec,
                        f: float, cfg: EngineConfig, time: float = 0.0,
                        library=None) -> ChannelRealization:
    t0 = _time.perf_counter()
    tx = tx_spec.position
    rx = rx_spec.position
    snap, bvh = ctx.snap, ctx.bvh
    lib = library if library is not None else snap.scene.materials

    candidates: set[Signature] = {()}
    if cfg.max_order > 0 and snap.n_triangles:
        # launch from both endpoints (keeps recall symmetric under swap);
        # the kernels release the GIL, so big sweeps run concurrently and
        # the set union keeps the result order-independent
        if cfg.n_rays >= 1 << 16:
            from concurrent.futures import ThreadPoolExecutor
            with ThreadPoolExecutor(max_workers=2) as pool:
                fwd = pool.submit(trace_sbr, snap, bvh, tx, rx, cfg, f, lib)
                rev = pool.submit(trace_sbr, snap, bvh, rx, tx, cfg, f, lib)
                fwd_sigs, rev_sigs = fwd.result(), rev.result()
        else:
            fwd_sigs = trace_sbr(snap, bvh, tx, rx, cfg, f, lib)
            rev_sigs = trace_sbr(snap, bvh, rx, tx, cfg, f, lib)
        for sig in fwd_sigs:
            candidates.add(sig)
        for sig in rev_sigs:
            candidates.add(tuple(reversed(sig)))
        im_order = _im_supplement_order(cfg, len(ctx.facets))
        if im_order > 0:
            for p in enumerate_images(snap, bvh, tx, rx, im_order,
                                      include_los=False, facets=ctx.facets):
                candidates.add(p.signature)

    paths: dict[Signature, PropagationPath] = {}
    for sig in sorted(candidates, key=lambda s: (len(s), s)):
        refined = refine_specular(sig, snap, bvh, tx, rx, facets=ctx.facets)
        if refined is not None:
            paths.setdefault(refined.signature, refined)

    if cfg.max_diffractions > 0 and ctx.edges:
        for p in diffraction_paths(snap, bvh, ctx.edges, tx, rx, cfg):
            paths.setdefault(p.signature, p)

    kept: list[PropagationPath] = []
    for sig in sorted(paths, key=lambda s: (len(s), s)):
        path = paths[sig]
        jones, spreading = compute_field(path, snap, lib, f, cfg, ctx.edges)
        if spreading == 0.0:
            continue
        amp = apply_antennas(path, jones, spreading, tx_spec, rx_spec, f)
        path.jones = jones
        path.spreading = spreading
        path.amplitude = amp
        kept.append(path)
    if cfg.max_scatterings > 0:
        kept.extend(scattering_amplitudes(snap, bvh, tx_spec, rx_spec, f, cfg, lib))

    powers = [abs(p.amplitude) ** 2 for p in kept]
    if powers:
        p_max = max(powers)
        if p_max > 0.0:
            floor = p_max * 10.0 ** (cfg.rel_power_floor_db / 10.0)
            kept = [p for p, pw in zip(kept, powers) if pw >= floor]
    kept.sort(key=lambda p: (p.delay, p.signature))

    return ChannelRealization(tx=tx_spec, rx=rx_spec, f=f, paths=kept, time=time,
                              compute_seconds=_time.perf_counter() - t0)


def doppler_annotate(r_now: ChannelRealization, r_next: ChannelRealization,
                     dt: float) -> ChannelRealization:
    """Per-path Doppler from path-length change across adjacent snapshots.

    doppler = -(f / c) * (dL / dt) for signature-matched paths; unmatched
    paths keep doppler 0.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    later = {p.signature: p for p in r_next.paths}
    out_paths = []
    for p in r_now.paths:
        match = later.get(p.signature)
        if match is None:
            out_paths.append(replace(p, doppler=0.0))
        else:
            shift = -(r_now.f / SPEED_OF_LIGHT) * (match.path_length - p.path_length) / dt
            out_paths.append(replace(p, doppler=float(shift)))
    return ChannelRealization(tx=r_now.tx, rx=r_now.rx, f=r_now.f, paths=out_paths,
                              time=r_now.time, compute_seconds=r_now.compute_seconds)
