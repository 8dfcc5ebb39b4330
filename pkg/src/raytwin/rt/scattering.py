"""Single-bounce diffuse scattering from tiled illuminated surfaces.

Tile counts grow with surface area, so the engine path uses the vectorized
evaluator (scattering_amplitudes); the object-returning scattering_paths
wrapper stays for small scenes and the tests.
"""

from __future__ import annotations

import numpy as np

from .. import kernels
from ..antenna import gains_batch
from ..bvh import BvhIndex
from ..geometry import (SPEED_OF_LIGHT, az_el_from_direction, normalize,
                        spherical_basis_batch)
from ..materials import _lobe_normalization
from ..scene import SceneSnapshot
from .config import EngineConfig
from .path import SCATTERING, Interaction, PropagationPath, TerminalSpec

TILE_STRIDE = 1 << 20     # scattering surface_id = triangle_id * stride + tile index


def scatter_triangle_of(surface_id: int) -> int:
    return surface_id // TILE_STRIDE


def _tile_triangle(v0: np.ndarray, v1: np.ndarray, v2: np.ndarray,
                   tile_m: float) -> list[tuple[np.ndarray, float]]:
    """(centroid, area) per barycentric sub-tile; k^2 pieces with sub-tile
    area at most tile_m^2 (k = 1 keeps the triangle whole). Upward-pointing
    sub-triangles enumerate first, then the downward fillers, matching the
    vectorized path in _all_tiles so tile indices agree."""
    centers, areas = _triangle_tile_arrays(v0, v1, v2, tile_m)
    return [(c, float(a)) for c, a in zip(centers, areas)]


def _triangle_tile_arrays(v0, v1, v2, tile_m: float):
    e1, e2 = v1 - v0, v2 - v0
    area = 0.5 * float(np.linalg.norm(np.cross(e1, e2)))
    k = max(1, int(np.ceil(np.sqrt(area) / tile_m)))
    ii, jj = np.meshgrid(np.arange(k), np.arange(k), indexing="ij")
    up = (ii + jj < k)
    a_up = v0 + np.multiply.outer(ii[up] / k, e1) + np.multiply.outer(jj[up] / k, e2)
    c_up = a_up + (e1 + e2) / (3.0 * k)
    down = (ii + jj < k - 1)
    a_dn = (v0 + np.multiply.outer((ii[down] + 1) / k, e1)
            + np.multiply.outer((jj[down] + 1) / k, e2))
    c_dn = a_dn - (e1 + e2) / (3.0 * k)
    centers = np.concatenate([c_up, c_dn])
    return centers, np.full(len(centers), area / (k * k))


def scattering_paths(snap: SceneSnapshot, bvh: BvhIndex, tx: np.ndarray, rx: np.ndarray,
                     cfg: EngineConfig, library=None) -> list[PropagationPath]:
    """One path per visible tile of each surface with scatter_s > 0; both
    legs must be unobstructed and on the same (illuminated) side."""
    if cfg.max_scatterings < 1:
        return []
    lib = library if library is not None else snap.scene.materials
    out = []
    for tri in range(snap.n_triangles):
        mat = lib[int(snap.material_ids[tri])]
        if mat.scatter_s <= 0.0:
            continue
        n = snap.normals[tri]
        for tile_idx, (center, area) in enumerate(
                _tile_triangle(snap.v0[tri], snap.v1[tri], snap.v2[tri],
                               cfg.scatter_tile_m)):
            to_tx = tx - center
            to_rx = rx - center
            side_tx = np.dot(to_tx, n)
            side_rx = np.dot(to_rx, n)
            if side_tx * side_rx <= 0.0 or abs(side_tx) < 1e-9:
                continue                      # tx and rx must face the same side
            if bvh.occluded(tx, center) or bvh.occluded(center, rx):
                continue
            d_out = normalize(center - tx)
            d_in = normalize(rx - center)
            length = float(np.linalg.norm(center - tx) + np.linalg.norm(rx - center))
            out.append(PropagationPath(
                interactions=[Interaction(SCATTERING, center,
                                          tri * TILE_STRIDE + tile_idx,
                                          int(snap.material_ids[tri]))],
                path_length=length,
                aod=az_el_from_direction(d_out),
                aoa=az_el_from_direction(-d_in),
                tx_point=tx, rx_point=rx))
    return out


def tile_area_of(snap: SceneSnapshot, path: PropagationPath, tile_m: float) -> float:
    """Area of the tile a scattering interaction belongs to (recomputed from
    the owning triangle's subdivision rule)."""
    tri = scatter_triangle_of(path.interactions[0].surface_id)
    v0, v1, v2 = snap.v0[tri], snap.v1[tri], snap.v2[tri]
    area = 0.5 * float(np.linalg.norm(np.cross(v1 - v0, v2 - v0)))
    k = max(1, int(np.ceil(np.sqrt(area) / tile_m)))
    return area / (k * k)


def _all_tiles(snap: SceneSnapshot, lib, tile_m: float):
    """Stacked (centers, areas, tri_ids, tile_ids) over every scattering
    surface; tile_ids are the composed signature ids."""
    centers, areas, tri_ids, tile_ids = [], [], [], []
    for tri in range(snap.n_triangles):
        if lib[int(snap.material_ids[tri])].scatter_s <= 0.0:
            continue
        c, a = _triangle_tile_arrays(snap.v0[tri], snap.v1[tri], snap.v2[tri], tile_m)
        centers.append(c)
        areas.append(a)
        tri_ids.append(np.full(len(c), tri, dtype=np.int64))
        tile_ids.append(tri * TILE_STRIDE + np.arange(len(c), dtype=np.int64))
    if not centers:
        return (np.zeros((0, 3)), np.zeros(0), np.zeros(0, dtype=np.int64),
                np.zeros(0, dtype=np.int64))
    return (np.concatenate(centers), np.concatenate(areas),
            np.concatenate(tri_ids), np.concatenate(tile_ids))


def scattering_amplitudes(snap: SceneSnapshot, bvh: BvhIndex, tx_spec: TerminalSpec,
                          rx_spec: TerminalSpec, f: float, cfg: EngineConfig,
                          library=None) -> list[PropagationPath]:
    """Vectorized single-bounce scattering with antennas applied; returns
    fully evaluated paths (amplitude set), unsorted and unfiltered."""
    if cfg.max_scatterings < 1 or snap.n_triangles == 0:
        return []
    lib = library if library is not None else snap.scene.materials
    tx = tx_spec.position
    rx = rx_spec.position
    centers, areas, tri_ids, tile_ids = _all_tiles(snap, lib, cfg.scatter_tile_m)
    if not len(centers):
        return []
    normals = snap.normals[tri_ids]
    to_tx = tx - centers
    to_rx = rx - centers
    side_tx = np.einsum("ij,ij->i", to_tx, normals)
    side_rx = np.einsum("ij,ij->i", to_rx, normals)
    keep = (side_tx * side_rx > 0.0) & (np.abs(side_tx) > 1e-9)
    if not keep.any():
        return []
    centers, areas, tri_ids, tile_ids = (centers[keep], areas[keep], tri_ids[keep],
                                         tile_ids[keep])
    normals = normals[keep]

    n = len(centers)
    blocked = np.empty(n, dtype=np.bool_)
    args = (bvh.node_lo, bvh.node_hi, bvh.node_left, bvh.node_right,
            bvh.node_start, bvh.node_count, bvh.prim, snap.v0, snap.v1, snap.v2)
    kernels.segments_blocked(np.broadcast_to(tx, (n, 3)).copy(), centers, *args,
                             out=blocked)
    visible = ~blocked
    if visible.any():
        blocked2 = np.empty(int(visible.sum()), dtype=np.bool_)
        kernels.segments_blocked(centers[visible],
                                 np.broadcast_to(rx, (int(visible.sum()), 3)).copy(),
                                 *args, out=blocked2)
        vis_idx = np.nonzero(visible)[0][~blocked2]
    else:
        vis_idx = np.zeros(0, dtype=np.int64)
    if not len(vis_idx):
        return []
    centers, areas, tri_ids, tile_ids = (centers[vis_idx], areas[vis_idx],
                                         tri_ids[vis_idx], tile_ids[vis_idx])
    normals = normals[vis_idx]

    r1v = centers - tx
    r1 = np.linalg.norm(r1v, axis=1)
    d_in = r1v / r1[:, None]
    r2v = rx - centers
    r2 = np.linalg.norm(r2v, axis=1)
    d_out = r2v / r2[:, None]
    # orient normals against the incident ray
    flip = np.einsum("ij,ij->i", normals, d_in) > 0
    normals = np.where(flip[:, None], -normals, normals)
    cos_i = np.clip(-np.einsum("ij,ij->i", d_in, normals), 0.0, 1.0)

    spec = d_in - 2.0 * np.einsum("ij,ij->i", d_in, normals)[:, None] * normals
    cos_psi = np.clip(np.einsum("ij,ij->i", spec, d_out), -1.0, 1.0)
    s_vals = np.array([lib[int(m)].scatter_s for m in snap.material_ids])[tri_ids]
    alphas = np.array([lib[int(m)].lobe_alpha for m in snap.material_ids])[tri_ids]
    norm_k = np.array([_lobe_normalization(int(a)) for a in alphas])
    lobe = ((1.0 + cos_psi) / 2.0) ** (alphas / 2.0)
    amp_scalar = s_vals * norm_k * lobe * np.sqrt(areas * cos_i)

    # polarization transport: departure basis projected onto arrival basis
    th_d, ph_d = spherical_basis_batch(d_in)
    th_a, ph_a = spherical_basis_batch(d_out)
    g_t_theta, g_t_phi = gains_batch(tx_spec.pattern, d_in, f)
    g_r_theta, g_r_phi = gains_batch(rx_spec.pattern, -d_out, f)
    rx_theta, rx_phi = g_r_theta, -g_r_phi          # phi flips between d and -d
    coupling = (rx_theta * (np.einsum("ij,ij->i", th_a, th_d) * g_t_theta
                            + np.einsum("ij,ij->i", th_a, ph_d) * g_t_phi)
                + rx_phi * (np.einsum("ij,ij->i", ph_a, th_d) * g_t_theta
                            + np.einsum("ij,ij->i", ph_a, ph_d) * g_t_phi))

    lam = SPEED_OF_LIGHT / f
    lengths = r1 + r2
    delays = lengths / SPEED_OF_LIGHT
    phases = np.exp(-2j * np.pi * f * delays)
    amps = (lam / (4.0 * np.pi)) / (r1 * r2) * amp_scalar * phases * coupling

    paths = []
    for i in range(len(centers)):
        if amps[i] == 0:
            continue
        paths.append(PropagationPath(
            interactions=[Interaction(SCATTERING, centers[i], int(tile_ids[i]),
                                      int(snap.material_ids[tri_ids[i]]))],
            path_length=float(lengths[i]),
            aod=az_el_from_direction(d_in[i]),
            aoa=az_el_from_direction(-d_out[i]),
            tx_point=tx, rx_point=rx,
            spreading=float(1.0 / (r1[i] * r2[i])),
            amplitude=complex(amps[i])))
    return paths
