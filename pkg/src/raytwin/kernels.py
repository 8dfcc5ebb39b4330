"""Numba inner loops: ray-triangle tests, BVH traversal and the SBR sweep.

Everything here is deterministic: fixed iteration order, no threading inside
a kernel, no RNG. Triangles are two-sided for intersection purposes.
"""

from __future__ import annotations

import numpy as np
from numba import njit

_EPS_DET = 1e-12
HIT_EPS = 1e-6          # meters; ignore hits closer than this to a segment end
_STACK = 64


@njit(cache=True, nogil=True, inline="always")
def _tri_t(ox, oy, oz, dx, dy, dz,
           ax, ay, az, bx, by, bz, cx, cy, cz):
    """Moller-Trumbore distance along the ray, or -1 on miss (two-sided)."""
    e1x = bx - ax; e1y = by - ay; e1z = bz - az
    e2x = cx - ax; e2y = cy - ay; e2z = cz - az
    px = dy * e2z - dz * e2y
    py = dz * e2x - dx * e2z
    pz = dx * e2y - dy * e2x
    det = e1x * px + e1y * py + e1z * pz
    if -_EPS_DET < det < _EPS_DET:
        return -1.0
    inv = 1.0 / det
    tx = ox - ax; ty = oy - ay; tz = oz - az
    u = (tx * px + ty * py + tz * pz) * inv
    if u < 0.0 or u > 1.0:
        return -1.0
    qx = ty * e1z - tz * e1y
    qy = tz * e1x - tx * e1z
    qz = tx * e1y - ty * e1x
    v = (dx * qx + dy * qy + dz * qz) * inv
    if v < 0.0 or u + v > 1.0:
        return -1.0
    return (e2x * qx + e2y * qy + e2z * qz) * inv


@njit(cache=True, nogil=True, inline="always")
def _box_hit(ox, oy, oz, idx, idy, idz, lox, loy, loz, hix, hiy, hiz, t_max):
    """Slab test; True when the box overlaps the ray segment (0, t_max)."""
    t0 = (lox - ox) * idx
    t1 = (hix - ox) * idx
    tn = min(t0, t1)
    tf = max(t0, t1)
    t0 = (loy - oy) * idy
    t1 = (hiy - oy) * idy
    tn = max(tn, min(t0, t1))
    tf = min(tf, max(t0, t1))
    t0 = (loz - oz) * idz
    t1 = (hiz - oz) * idz
    tn = max(tn, min(t0, t1))
    tf = min(tf, max(t0, t1))
    return tf >= tn and tf >= 0.0 and tn <= t_max


@njit(cache=True, nogil=True)
def bvh_nearest(ox, oy, oz, dx, dy, dz, t_min, t_max,
                node_lo, node_hi, node_left, node_right, node_start, node_count,
                prim, v0, v1, v2):
    """Nearest triangle id and distance in (t_min, t_max], or (-1, inf)."""
    idx = 1.0 / dx if dx != 0.0 else np.inf
    idy = 1.0 / dy if dy != 0.0 else np.inf
    idz = 1.0 / dz if dz != 0.0 else np.inf
    best_t = np.inf
    best_id = -1
    stack = np.empty(_STACK, dtype=np.int64)
    stack[0] = 0
    sp = 1
    while sp > 0:
        sp -= 1
        n = stack[sp]
        prune = best_t if best_t < t_max else t_max
        if not _box_hit(ox, oy, oz, idx, idy, idz,
                        node_lo[n, 0], node_lo[n, 1], node_lo[n, 2],
                        node_hi[n, 0], node_hi[n, 1], node_hi[n, 2], prune):
            continue
        if node_left[n] < 0:
            start = node_start[n]
            for k in range(start, start + node_count[n]):
                i = prim[k]
                t = _tri_t(ox, oy, oz, dx, dy, dz,
                           v0[i, 0], v0[i, 1], v0[i, 2],
                           v1[i, 0], v1[i, 1], v1[i, 2],
                           v2[i, 0], v2[i, 1], v2[i, 2])
                if t > t_min and t <= t_max and t < best_t:
                    best_t = t
                    best_id = i
        else:
            stack[sp] = node_left[n]
            stack[sp + 1] = node_right[n]
            sp += 2
    if best_id < 0:
        return -1, np.inf
    return best_id, best_t


@njit(cache=True, nogil=True)
def bvh_any(ox, oy, oz, dx, dy, dz, t_min, t_max,
            node_lo, node_hi, node_left, node_right, node_start, node_count,
            prim, v0, v1, v2):
    """True when any triangle is hit strictly inside (t_min, t_max)."""
    idx = 1.0 / dx if dx != 0.0 else np.inf
    idy = 1.0 / dy if dy != 0.0 else np.inf
    idz = 1.0 / dz if dz != 0.0 else np.inf
    stack = np.empty(_STACK, dtype=np.int64)
    stack[0] = 0
    sp = 1
    while sp > 0:
        sp -= 1
        n = stack[sp]
        if not _box_hit(ox, oy, oz, idx, idy, idz,
                        node_lo[n, 0], node_lo[n, 1], node_lo[n, 2],
                        node_hi[n, 0], node_hi[n, 1], node_hi[n, 2], t_max):
            continue
        if node_left[n] < 0:
            start = node_start[n]
            for k in range(start, start + node_count[n]):
                i = prim[k]
                t = _tri_t(ox, oy, oz, dx, dy, dz,
                           v0[i, 0], v0[i, 1], v0[i, 2],
                           v1[i, 0], v1[i, 1], v1[i, 2],
                           v2[i, 0], v2[i, 1], v2[i, 2])
                if t > t_min and t < t_max:
                    return True
        else:
            stack[sp] = node_left[n]
            stack[sp + 1] = node_right[n]
            sp += 2
    return False


@njit(cache=True, nogil=True)
def bvh_count_crossings(ox, oy, oz, dx, dy, dz, t_min,
                        node_lo, node_hi, node_left, node_right, node_start, node_count,
                        prim, v0, v1, v2):
    """Number of surface crossings along the open ray (t > t_min)."""
    idx = 1.0 / dx if dx != 0.0 else np.inf
    idy = 1.0 / dy if dy != 0.0 else np.inf
    idz = 1.0 / dz if dz != 0.0 else np.inf
    stack = np.empty(_STACK, dtype=np.int64)
    stack[0] = 0
    sp = 1
    count = 0
    while sp > 0:
        sp -= 1
        n = stack[sp]
        if not _box_hit(ox, oy, oz, idx, idy, idz,
                        node_lo[n, 0], node_lo[n, 1], node_lo[n, 2],
                        node_hi[n, 0], node_hi[n, 1], node_hi[n, 2], np.inf):
            continue
        if node_left[n] < 0:
            start = node_start[n]
            for k in range(start, start + node_count[n]):
                i = prim[k]
                t = _tri_t(ox, oy, oz, dx, dy, dz,
                           v0[i, 0], v0[i, 1], v0[i, 2],
                           v1[i, 0], v1[i, 1], v1[i, 2],
                           v2[i, 0], v2[i, 1], v2[i, 2])
                if t > t_min:
                    count += 1
        else:
            stack[sp] = node_left[n]
            stack[sp + 1] = node_right[n]
            sp += 2
    return count


@njit(cache=True, nogil=True)
def sbr_sweep(dirs, tx, rx,
              node_lo, node_hi, node_left, node_right, node_start, node_count,
              prim, v0, v1, v2, normals, transmit_ok,
              max_order, max_refl, max_trans, capture_gamma, rx_sphere_scale,
              out_codes, out_lens):
    """Shoot every direction from tx, branching into specular reflection and
    straight transmission continuations; record interaction signatures of
    segments passing within the reception sphere of rx.

    Signature codes are surface_id * 2 + (0 reflection / 1 transmission).
    Returns (candidates_found, codes_needed); when either exceeds its buffer
    the tail is dropped and the caller retries with the returned sizes.
    """
    max_sig = max_order
    stack_o = np.empty((max_order + 2, 3))
    stack_d = np.empty((max_order + 2, 3))
    stack_acc = np.empty(max_order + 2)
    stack_refl = np.empty(max_order + 2, dtype=np.int64)
    stack_trans = np.empty(max_order + 2, dtype=np.int64)
    stack_nsig = np.empty(max_order + 2, dtype=np.int64)
    stack_sig = np.empty((max_order + 2, max_sig), dtype=np.int64)

    n_total = 0
    c_total = 0
    n_out = 0
    code_pos = 0
    overflow = False
    for r in range(dirs.shape[0]):
        sp = 0
        stack_o[0, 0] = tx[0]; stack_o[0, 1] = tx[1]; stack_o[0, 2] = tx[2]
        stack_d[0, 0] = dirs[r, 0]; stack_d[0, 1] = dirs[r, 1]; stack_d[0, 2] = dirs[r, 2]
        stack_acc[0] = 0.0
        stack_refl[0] = 0
        stack_trans[0] = 0
        stack_nsig[0] = 0
        sp = 1
        while sp > 0:
            sp -= 1
            ox = stack_o[sp, 0]; oy = stack_o[sp, 1]; oz = stack_o[sp, 2]
            dx = stack_d[sp, 0]; dy = stack_d[sp, 1]; dz = stack_d[sp, 2]
            acc = stack_acc[sp]
            nrefl = stack_refl[sp]
            ntrans = stack_trans[sp]
            nsig = stack_nsig[sp]
            sig_row = sp

            tri_id, t_hit = bvh_nearest(ox, oy, oz, dx, dy, dz, HIT_EPS, np.inf,
                                        node_lo, node_hi, node_left, node_right,
                                        node_start, node_count, prim, v0, v1, v2)
            seg_end = t_hit if tri_id >= 0 else np.inf

            # reception-sphere capture on this segment
            tc = (rx[0] - ox) * dx + (rx[1] - oy) * dy + (rx[2] - oz) * dz
            if tc > 0.0 and tc <= seg_end:
                px = ox + tc * dx - rx[0]
                py = oy + tc * dy - rx[1]
                pz = oz + tc * dz - rx[2]
                perp = np.sqrt(px * px + py * py + pz * pz)
                radius = rx_sphere_scale * (acc + tc) * capture_gamma
                if perp <= radius:
                    if (not overflow and n_out < out_lens.size
                            and code_pos + nsig <= out_codes.size):
                        out_lens[n_out] = nsig
                        for s in range(nsig):
                            out_codes[code_pos + s] = stack_sig[sig_row, s]
                        code_pos += nsig
                        n_out += 1
                    else:
                        overflow = True
                    n_total += 1
                    c_total += nsig

            if tri_id < 0 or nsig >= max_sig:
                continue
            hx = ox + t_hit * dx
            hy = oy + t_hit * dy
            hz = oz + t_hit * dz
            # transmission continuation (straight through)
            if ntrans < max_trans and transmit_ok[tri_id]:
                stack_o[sp, 0] = hx; stack_o[sp, 1] = hy; stack_o[sp, 2] = hz
                stack_d[sp, 0] = dx; stack_d[sp, 1] = dy; stack_d[sp, 2] = dz
                stack_acc[sp] = acc + t_hit
                stack_refl[sp] = nrefl
                stack_trans[sp] = ntrans + 1
                for s in range(nsig):
                    stack_sig[sp, s] = stack_sig[sig_row, s]
                stack_sig[sp, nsig] = tri_id * 2 + 1
                stack_nsig[sp] = nsig + 1
                sp += 1
            # specular reflection continuation
            if nrefl < max_refl:
                nx = normals[tri_id, 0]; ny = normals[tri_id, 1]; nz = normals[tri_id, 2]
                dn = dx * nx + dy * ny + dz * nz
                rdx = dx - 2.0 * dn * nx
                rdy = dy - 2.0 * dn * ny
                rdz = dz - 2.0 * dn * nz
                for s in range(nsig):
                    stack_sig[sp, s] = stack_sig[sig_row, s]
                stack_o[sp, 0] = hx; stack_o[sp, 1] = hy; stack_o[sp, 2] = hz
                stack_d[sp, 0] = rdx; stack_d[sp, 1] = rdy; stack_d[sp, 2] = rdz
                stack_acc[sp] = acc + t_hit
                stack_refl[sp] = nrefl + 1
                stack_trans[sp] = ntrans
                stack_sig[sp, nsig] = tri_id * 2
                stack_nsig[sp] = nsig + 1
                sp += 1
    return n_total, c_total


@njit(cache=True, nogil=True)
def segments_blocked(starts, ends,
                     node_lo, node_hi, node_left, node_right, node_start, node_count,
                     prim, v0, v1, v2, out):
    """Occlusion test for N segments (ends shrunk by HIT_EPS), results in out."""
    for i in range(starts.shape[0]):
        dx = ends[i, 0] - starts[i, 0]
        dy = ends[i, 1] - starts[i, 1]
        dz = ends[i, 2] - starts[i, 2]
        length = np.sqrt(dx * dx + dy * dy + dz * dz)
        if length <= 2.0 * HIT_EPS:
            out[i] = False
            continue
        inv = 1.0 / length
        out[i] = bvh_any(starts[i, 0], starts[i, 1], starts[i, 2],
                         dx * inv, dy * inv, dz * inv, HIT_EPS, length - HIT_EPS,
                         node_lo, node_hi, node_left, node_right, node_start,
                         node_count, prim, v0, v1, v2)


@njit(cache=True, nogil=True)
def brute_nearest(ox, oy, oz, dx, dy, dz, t_min, t_max, v0, v1, v2):
    """All-triangles scan; used by tests as the BVH oracle."""
    best_t = t_max
    best_id = -1
    for i in range(v0.shape[0]):
        t = _tri_t(ox, oy, oz, dx, dy, dz,
                   v0[i, 0], v0[i, 1], v0[i, 2],
                   v1[i, 0], v1[i, 1], v1[i, 2],
                   v2[i, 0], v2[i, 1], v2[i, 2])
        if t > t_min and t <= best_t:
            best_t = t
            best_id = i
    if best_id < 0:
        return -1, np.inf
    return best_id, best_t
