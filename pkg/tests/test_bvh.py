import numpy as np
import pytest

from fixtures import build_library, campus_scene, ground_plane_scene
from raytwin.bvh import build_bvh
from raytwin.kernels import brute_nearest
from raytwin.scene import scene_from_dict, snapshot


def random_mesh_scene(n_triangles: int, seed: int = 3):
    """Triangle soup in a 100 m cube."""
    rng = np.random.default_rng(seed)
    centers = rng.uniform(-50, 50, size=(n_triangles, 3))
    offsets = rng.normal(0, 1.5, size=(n_triangles, 2, 3))
    vertices = []
    triangles = []
    for i in range(n_triangles):
        vertices.append(centers[i])
        vertices.append(centers[i] + offsets[i, 0])
        vertices.append(centers[i] + offsets[i, 1])
        triangles.append([3 * i, 3 * i + 1, 3 * i + 2, 0])
    return scene_from_dict(
        {"units": "m", "vertices": [v.tolist() for v in vertices], "triangles": triangles},
        build_library())


class TestIntersect:
    def test_straight_down_onto_ground(self, ground_scene):
        idx = build_bvh(ground_scene, 0.0)
        hit = idx.intersect(np.array([0.0, 0.0, 10.0]), np.array([0.0, 0.0, -1.0]))
        assert hit is not None
        assert hit.distance == pytest.approx(10.0, abs=1e-12)
        assert np.allclose(hit.point, [0, 0, 0], atol=1e-9)
        assert np.dot(hit.normal, [0, 0, -1]) < 0

    def test_parallel_ray_misses(self, ground_scene):
        idx = build_bvh(ground_scene, 0.0)
        assert idx.intersect(np.array([0.0, 0.0, 5.0]), np.array([1.0, 0.0, 0.0])) is None

    def test_t_min_excludes_near_hit(self, ground_scene):
        idx = build_bvh(ground_scene, 0.0)
        assert idx.intersect(np.array([0.0, 0.0, 10.0]), np.array([0.0, 0.0, -1.0]),
                             t_min=10.5) is None

    def test_root_box_equals_scene_bounds(self, ground_scene):
        idx = build_bvh(ground_scene, 0.0)
        assert np.allclose(idx.root_bounds.lo, ground_scene.bounds.lo)
        assert np.allclose(idx.root_bounds.hi, ground_scene.bounds.hi)

    def test_bad_t_range_rejected(self, ground_scene):
        idx = build_bvh(ground_scene, 0.0)
        with pytest.raises(ValueError):
            idx.intersect(np.zeros(3), np.array([0.0, 0.0, -1.0]), t_min=2.0, t_max=1.0)


class TestBruteForceEquivalence:
    """BVH traversal must agree exactly with the all-triangles scan."""

    def _compare(self, scene, n_rays, seed):
        snap = snapshot(scene, 0.0)
        idx = build_bvh(scene, 0.0)
        rng = np.random.default_rng(seed)
        origins = rng.uniform(-60, 60, size=(n_rays, 3))
        dirs = rng.normal(size=(n_rays, 3))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        mismatches = 0
        for o, d in zip(origins, dirs):
            bi, bt = brute_nearest(o[0], o[1], o[2], d[0], d[1], d[2],
                                   1e-6, np.inf, snap.v0, snap.v1, snap.v2)
            hit = idx.intersect(o, d, t_min=1e-6)
            if hit is None:
                mismatches += bi != -1
            else:
                mismatches += (bi != hit.triangle_id) or (bt != hit.distance)
        assert mismatches == 0

    def test_10k_triangles_100k_rays(self):
        self._compare(random_mesh_scene(10_000), 100_000, seed=5)

    def test_campus_scene(self, campus):
        self._compare(campus.scene, 10_000, seed=6)

    def test_empty_dynamic_set_static_only(self, campus):
        idx = build_bvh(campus.scene, 12.5)
        assert len(idx.prim) == campus.scene.n_static_triangles


class TestHitNormals:
    def test_normals_face_incoming_ray(self, campus, rng):
        idx = build_bvh(campus.scene, 0.0)
        for _ in range(500):
            o = rng.uniform(-60, 60, size=3)
            d = rng.normal(size=3)
            d /= np.linalg.norm(d)
            hit = idx.intersect(o, d, t_min=1e-6)
            if hit is not None:
                assert np.dot(hit.normal, d) < 0


class TestOcclusion:
    def test_clear_segment(self, ground_scene):
        idx = build_bvh(ground_scene, 0.0)
        assert not idx.occluded(np.array([0.0, 0.0, 1.0]), np.array([10.0, 0.0, 1.0]))

    def test_blocked_segment(self, ground_scene):
        idx = build_bvh(ground_scene, 0.0)
        assert idx.occluded(np.array([0.0, 0.0, 1.0]), np.array([0.0, 0.0, -1.0]))

    def test_endpoint_on_surface_not_occluding(self, ground_scene):
        idx = build_bvh(ground_scene, 0.0)
        # segment ending exactly on the plane: the epsilon shrink ignores it
        assert not idx.occluded(np.array([0.0, 0.0, 5.0]), np.array([0.0, 0.0, 0.0]))
