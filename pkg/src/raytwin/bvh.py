"""Bounding-volume hierarchy over a scene snapshot.

Median-split builder on the longest centroid axis; traversal lives in
kernels.py. Indexes are immutable once built and safe to share.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .geometry import Aabb
from .scene import Scene, SceneSnapshot, snapshot

LEAF_SIZE = 4


@dataclass(frozen=True)
class RayHit:
    triangle_id: int
    distance: float
    point: np.ndarray
    normal: np.ndarray    # unit, flipped to face the incoming ray


class BvhIndex:
    """Flat-array BVH over all triangles of one snapshot."""

    def __init__(self, snap: SceneSnapshot):
        self.snapshot = snap
        v0, v1, v2 = snap.v0, snap.v1, snap.v2
        m = len(v0)
        if m == 0:
            self.node_lo = np.zeros((1, 3))
            self.node_hi = np.zeros((1, 3))
            self.node_left = np.full(1, -1, dtype=np.int64)
            self.node_right = np.zeros(1, dtype=np.int64)
            self.node_start = np.zeros(1, dtype=np.int64)
            self.node_count = np.zeros(1, dtype=np.int64)
            self.prim = np.zeros(0, dtype=np.int64)
            return
        tri_lo = np.minimum(np.minimum(v0, v1), v2)
        tri_hi = np.maximum(np.maximum(v0, v1), v2)
        centroids = (v0 + v1 + v2) / 3.0

        order = np.arange(m, dtype=np.int64)
        lo_list, hi_list = [], []
        left_list, right_list, start_list, count_list = [], [], [], []

        def new_node():
            lo_list.append(None)
            hi_list.append(None)
            left_list.append(-1)
            right_list.append(-1)
            start_list.append(0)
            count_list.append(0)
            return len(lo_list) - 1

        root = new_node()
        stack = [(root, 0, m)]
        while stack:
            node, start, end = stack.pop()
            ids = order[start:end]
            lo_list[node] = tri_lo[ids].min(axis=0)
            hi_list[node] = tri_hi[ids].max(axis=0)
            if end - start <= LEAF_SIZE:
                start_list[node] = start
                count_list[node] = end - start
                continue
            c = centroids[ids]
            axis = int(np.argmax(c.max(axis=0) - c.min(axis=0)))
            mid = (start + end) // 2
            local = np.argsort(c[:, axis], kind="stable")
            order[start:end] = ids[local]
            left = new_node()
            right = new_node()
            left_list[node] = left
            right_list[node] = right
            stack.append((left, start, mid))
            stack.append((right, mid, end))

        self.node_lo = np.ascontiguousarray(np.stack(lo_list))
        self.node_hi = np.ascontiguousarray(np.stack(hi_list))
        self.node_left = np.asarray(left_list, dtype=np.int64)
        self.node_right = np.asarray(right_list, dtype=np.int64)
        self.node_start = np.asarray(start_list, dtype=np.int64)
        self.node_count = np.asarray(count_list, dtype=np.int64)
        self.prim = order

    @property
    def root_bounds(self) -> Aabb:
        return Aabb(self.node_lo[0].copy(), self.node_hi[0].copy())

    def _args(self):
        s = self.snapshot
        return (self.node_lo, self.node_hi, self.node_left, self.node_right,
                self.node_start, self.node_count, self.prim, s.v0, s.v1, s.v2)

    def intersect(self, origin: np.ndarray, direction: np.ndarray,
                  t_min: float = 0.0, t_max: float = np.inf) -> RayHit | None:
        """Nearest hit with distance in (t_min, t_max], or None."""
        if not len(self.prim):
            return None
        if not 0.0 <= t_min < t_max:
            raise ValueError("require 0 <= t_min < t_max")
        tri, t = kernels.bvh_nearest(
            origin[0], origin[1], origin[2],
            direction[0], direction[1], direction[2], t_min, t_max, *self._args())
        if tri < 0:
            return None
        point = origin + t * direction
        n = self.snapshot.normals[tri]
        if np.dot(n, direction) > 0:
            n = -n
        return RayHit(triangle_id=int(tri), distance=float(t), point=point, normal=n.copy())

    def occluded(self, p: np.ndarray, q: np.ndarray, eps: float = kernels.HIT_EPS) -> bool:
        """True when the open segment p -> q (ends shrunk by eps) hits anything."""
        if not len(self.prim):
            return False
        d = q - p
        length = float(np.linalg.norm(d))
        if length <= 2 * eps:
            return False
        d = d / length
        return bool(kernels.bvh_any(
            p[0], p[1], p[2], d[0], d[1], d[2], eps, length - eps, *self._args()))

    def crossings_up(self, p: np.ndarray) -> int:
        """Surface crossings along the +z ray from p (parity = containment)."""
        if not len(self.prim):
            return 0
        return int(kernels.bvh_count_crossings(
            p[0], p[1], p[2], 0.0, 0.0, 1.0, kernels.HIT_EPS, *self._args()))


def build_bvh(scene: Scene, time: float = 0.0) -> BvhIndex:
    """Index over static triangles plus dynamic objects posed at `time`."""
    return BvhIndex(snapshot(scene, time))


def build_bvh_for(snap: SceneSnapshot) -> BvhIndex:
    return BvhIndex(snap)
