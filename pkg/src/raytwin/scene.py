"""Environment twin: scene loading, dynamic-object posing and edge extraction.

Scene files are strict JSON (unknown keys rejected):

    {
      "units": "m",
      "vertices": [[x, y, z], ...],
      "triangles": [[i0, i1, i2, material_id], ...],
      "dynamic_objects": [
        {"vertices": [...], "triangles": [...],
         "keyframes": [{"t": s, "pos": [x, y, z], "yaw_deg": d}, ...]}
      ]
    }

Triangle winding must put face normals on the air side (toward the space
rays travel in); wedge angles at shared edges are derived from it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .geometry import Aabb, rotation_about_z
from .materials import MaterialLibrary, default_library

MIN_TRIANGLE_AREA = 1e-9

_SCENE_KEYS = {"units", "vertices", "triangles", "dynamic_objects", "schema_version"}
_DYNOBJ_KEYS = {"vertices", "triangles", "keyframes"}
_KEYFRAME_KEYS = {"t", "pos", "yaw_deg"}


class SceneError(ValueError):
    """Malformed or inconsistent scene file."""


@dataclass
class DynamicObject:
    """Rigid keyframed mesh; pose is yaw about z then translation."""

    vertices: np.ndarray          # (n, 3) local frame
    triangles: np.ndarray         # (m, 3) vertex indices
    material_ids: np.ndarray      # (m,)
    key_times: np.ndarray         # strictly increasing, seconds
    key_positions: np.ndarray     # (k, 3)
    key_yaws: np.ndarray          # (k,) degrees

    def pose_at(self, time: float) -> tuple[np.ndarray, float]:
        """Clamped linear position, shortest-arc yaw interpolation."""
        t = self.key_times
        if time <= t[0]:
            return self.key_positions[0].copy(), float(self.key_yaws[0])
        if time >= t[-1]:
            return self.key_positions[-1].copy(), float(self.key_yaws[-1])
        i = int(np.searchsorted(t, time, side="right") - 1)
        w = (time - t[i]) / (t[i + 1] - t[i])
        pos = (1.0 - w) * self.key_positions[i] + w * self.key_positions[i + 1]
        dyaw = (self.key_yaws[i + 1] - self.key_yaws[i] + 180.0) % 360.0 - 180.0
        return pos, float(self.key_yaws[i] + w * dyaw)

    def posed_vertices(self, time: float) -> np.ndarray:
        pos, yaw = self.pose_at(time)
        return self.vertices @ rotation_about_z(yaw).T + pos


@dataclass
class Scene:
    """Validated immutable scene; share freely across workers."""

    vertices: np.ndarray              # (n, 3)
    triangles: np.ndarray             # (m, 3) indices
    material_ids: np.ndarray          # (m,)
    dynamic_objects: list[DynamicObject]
    materials: MaterialLibrary
    bounds: Aabb
    dropped_degenerate: int = 0
    source_path: str | None = None

    @property
    def n_static_triangles(self) -> int:
        return len(self.triangles)


@dataclass
class SceneSnapshot:
    """All triangles (static + dynamic posed at one time), flattened arrays."""

    v0: np.ndarray                # (m, 3)
    v1: np.ndarray
    v2: np.ndarray
    material_ids: np.ndarray      # (m,) int64
    normals: np.ndarray           # (m, 3) unit, from winding
    scene: Scene
    time: float
    _facets: np.ndarray | None = field(default=None, repr=False)

    @property
    def n_triangles(self) -> int:
        return len(self.v0)

    def facet_ids(self) -> np.ndarray:
        """Group ids of maximal coplanar adjacent same-material patches."""
        if self._facets is None:
            self._facets = _group_facets(self)
        return self._facets


@dataclass(frozen=True)
class DiffractionEdge:
    """Wedge edge shared by two non-coplanar faces."""

    p0: np.ndarray
    p1: np.ndarray
    normal0: np.ndarray           # air-side normals of the two faces
    normal1: np.ndarray
    face_dir0: np.ndarray         # unit, from edge into face 0, perp. to edge
    face_dir1: np.ndarray
    interior_angle: float         # radians, material wedge angle in (0, 2*pi)
    material_id: int
    edge_id: int


def _as_float_array(rows, name: str, width: int) -> np.ndarray:
    try:
        arr = np.asarray(rows, dtype=np.float64)
    except (TypeError, ValueError) as e:
        raise SceneError(f"{name} must be a list of {width}-vectors") from e
    if arr.size == 0:
        return np.zeros((0, width))
    if arr.ndim != 2 or arr.shape[1] != width:
        raise SceneError(f"{name} must be a list of {width}-vectors")
    if not np.all(np.isfinite(arr)):
        raise SceneError(f"{name} contains non-finite values")
    return arr


def _validate_mesh(vertices: np.ndarray, tri_rows, n_materials: int | None,
                   where: str) -> tuple[np.ndarray, np.ndarray, int]:
    """Returns (triangles, material_ids, dropped_count) with degenerates removed."""
    tris, mats = [], []
    dropped = 0
    for row in tri_rows:
        if len(row) != 4:
            raise SceneError(f"{where}: triangle rows must be [i0, i1, i2, material_id]")
        i0, i1, i2, mid = (int(x) for x in row)
        for i in (i0, i1, i2):
            if not 0 <= i < len(vertices):
                raise SceneError(f"{where}: vertex index {i} out of range")
        if mid < 0 or (n_materials is not None and mid >= n_materials):
            raise SceneError(f"{where}: unknown material id {mid}")
        a, b, c = vertices[i0], vertices[i1], vertices[i2]
        if 0.5 * np.linalg.norm(np.cross(b - a, c - a)) < MIN_TRIANGLE_AREA:
            dropped += 1
            continue
        tris.append((i0, i1, i2))
        mats.append(mid)
    return (np.asarray(tris, dtype=np.int64).reshape(-1, 3),
            np.asarray(mats, dtype=np.int64), dropped)


def load_scene(path: str | Path, library: MaterialLibrary | None = None) -> Scene:
    """Load and validate a scene file; degenerate triangles are dropped
    and counted in scene.dropped_degenerate."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise SceneError(f"malformed scene file {path}: {e}") from e
    if not isinstance(doc, dict):
        raise SceneError("scene file must be a JSON object")
    unknown = set(doc) - _SCENE_KEYS
    if unknown:
        raise SceneError(f"unknown scene keys: {sorted(unknown)}")
    if doc.get("units", "m") != "m":
        raise SceneError("only units='m' is supported")
    if library is None:
        library = default_library()

    vertices = _as_float_array(doc.get("vertices", []), "vertices", 3)
    triangles, material_ids, dropped = _validate_mesh(
        vertices, doc.get("triangles", []), len(library), "scene")

    dynamic_objects = []
    for k, obj in enumerate(doc.get("dynamic_objects", [])):
        unknown = set(obj) - _DYNOBJ_KEYS
        if unknown:
            raise SceneError(f"dynamic object {k}: unknown keys {sorted(unknown)}")
        overts = _as_float_array(obj.get("vertices", []), f"dynamic object {k} vertices", 3)
        otris, omats, odropped = _validate_mesh(
            overts, obj.get("triangles", []), len(library), f"dynamic object {k}")
        dropped += odropped
        frames = obj.get("keyframes", [])
        if not frames:
            raise SceneError(f"dynamic object {k}: at least one keyframe required")
        times, positions, yaws = [], [], []
        for fr in frames:
            unknown = set(fr) - _KEYFRAME_KEYS
            if unknown:
                raise SceneError(f"dynamic object {k}: unknown keyframe keys {sorted(unknown)}")
            times.append(float(fr["t"]))
            positions.append([float(x) for x in fr["pos"]])
            yaws.append(float(fr.get("yaw_deg", 0.0)))
        times = np.asarray(times)
        if np.any(np.diff(times) <= 0):
            raise SceneError(f"dynamic object {k}: keyframe times must be strictly increasing")
        dynamic_objects.append(DynamicObject(
            vertices=overts, triangles=otris, material_ids=omats,
            key_times=times, key_positions=np.asarray(positions, dtype=np.float64),
            key_yaws=np.asarray(yaws, dtype=np.float64)))

    bounds = _scene_bounds(vertices, triangles, dynamic_objects)
    return Scene(vertices=vertices, triangles=triangles, material_ids=material_ids,
                 dynamic_objects=dynamic_objects, materials=library, bounds=bounds,
                 dropped_degenerate=dropped, source_path=str(path))


def scene_from_dict(doc: dict, library: MaterialLibrary | None = None) -> Scene:
    """Validate an in-memory scene document (same schema as load_scene)."""
    import tempfile
    with tempfile.NamedTemporaryFile("w", suffix=".json", delete=False) as fh:
        json.dump(doc, fh)
        tmp = fh.name
    try:
        scene = load_scene(tmp, library)
    finally:
        Path(tmp).unlink(missing_ok=True)
    scene.source_path = None
    return scene


def _scene_bounds(vertices: np.ndarray, triangles: np.ndarray,
                  dynamic_objects: list[DynamicObject]) -> Aabb:
    """AABB covering static geometry and every dynamic pose over time.

    Dynamic contribution is bounded conservatively: per keyframe, the
    object's local xy circumradius about its pivot plus its z range; linear
    motion between keyframes stays inside the union of consecutive boxes.
    """
    boxes = []
    if len(triangles):
        used = vertices[np.unique(triangles)]
        boxes.append(Aabb.of_points(used))
    elif len(vertices):
        boxes.append(Aabb.of_points(vertices))
    for obj in dynamic_objects:
        if not len(obj.vertices):
            continue
        r_xy = float(np.max(np.hypot(obj.vertices[:, 0], obj.vertices[:, 1]))) if len(obj.vertices) else 0.0
        z_lo = float(obj.vertices[:, 2].min())
        z_hi = float(obj.vertices[:, 2].max())
        for pos in obj.key_positions:
            boxes.append(Aabb(
                np.array([pos[0] - r_xy, pos[1] - r_xy, pos[2] + z_lo]),
                np.array([pos[0] + r_xy, pos[1] + r_xy, pos[2] + z_hi])))
    if not boxes:
        zero = np.zeros(3)
        return Aabb(zero, zero)
    out = boxes[0]
    for b in boxes[1:]:
        out = out.union(b)
    return out


def snapshot(scene: Scene, time: float = 0.0) -> SceneSnapshot:
    """Posed static view of the scene at one instant (pure in (scene, time))."""
    v0s = [scene.vertices[scene.triangles[:, 0]]] if len(scene.triangles) else []
    v1s = [scene.vertices[scene.triangles[:, 1]]] if len(scene.triangles) else []
    v2s = [scene.vertices[scene.triangles[:, 2]]] if len(scene.triangles) else []
    mats = [scene.material_ids] if len(scene.triangles) else []
    for obj in scene.dynamic_objects:
        pv = obj.posed_vertices(time)
        if not len(obj.triangles):
            continue
        v0s.append(pv[obj.triangles[:, 0]])
        v1s.append(pv[obj.triangles[:, 1]])
        v2s.append(pv[obj.triangles[:, 2]])
        mats.append(obj.material_ids)
    if v0s:
        v0 = np.ascontiguousarray(np.concatenate(v0s))
        v1 = np.ascontiguousarray(np.concatenate(v1s))
        v2 = np.ascontiguousarray(np.concatenate(v2s))
        material_ids = np.concatenate(mats).astype(np.int64)
    else:
        v0 = v1 = v2 = np.zeros((0, 3))
        material_ids = np.zeros(0, dtype=np.int64)
    n = np.cross(v1 - v0, v2 - v0)
    lengths = np.linalg.norm(n, axis=1, keepdims=True)
    normals = np.divide(n, lengths, out=np.zeros_like(n), where=lengths > 0)
    return SceneSnapshot(v0=v0, v1=v1, v2=v2, material_ids=material_ids,
                         normals=normals, scene=scene, time=time)


def _group_facets(snap: SceneSnapshot) -> np.ndarray:
    """Union adjacent coplanar same-material triangles into facet groups."""
    m = snap.n_triangles
    parent = np.arange(m)

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    edges: dict[tuple, int] = {}
    verts = np.stack([snap.v0, snap.v1, snap.v2], axis=1)
    keys = np.round(verts, 7)
    for t in range(m):
        for a, b in ((0, 1), (1, 2), (2, 0)):
            ka = tuple(keys[t, a])
            kb = tuple(keys[t, b])
            ek = (ka, kb) if ka <= kb else (kb, ka)
            other = edges.get(ek)
            if other is None:
                edges[ek] = t
                continue
            if snap.material_ids[t] != snap.material_ids[other]:
                continue
            if abs(np.dot(snap.normals[t], snap.normals[other])) > 1.0 - 1e-9:
                d = np.dot(snap.normals[t], snap.v0[other] - snap.v0[t])
                if abs(d) < 1e-7:
                    ra, rb = find(t), find(other)
                    if ra != rb:
                        parent[max(ra, rb)] = min(ra, rb)
    roots = np.array([find(i) for i in range(m)])
    _, dense = np.unique(roots, return_inverse=True)
    return dense.astype(np.int64)


def extract_diffraction_edges(scene: Scene, dihedral_threshold_deg: float = 10.0,
                              time: float = 0.0) -> list[DiffractionEdge]:
    """Shared edges whose face planes deviate from flat by more than the
    threshold. Interior wedge angle is measured through the material side,
    inferred from the winding-order normals.
    """
    snap = snapshot(scene, time)
    threshold = np.radians(dihedral_threshold_deg)
    verts = np.stack([snap.v0, snap.v1, snap.v2], axis=1)
    keys = np.round(verts, 7)
    shared: dict[tuple, list[tuple[int, int, int]]] = {}
    for t in range(snap.n_triangles):
        for a, b in ((0, 1), (1, 2), (2, 0)):
            ka, kb = tuple(keys[t, a]), tuple(keys[t, b])
            ek = (ka, kb) if ka <= kb else (kb, ka)
            shared.setdefault(ek, []).append((t, a, b))

    edges: list[DiffractionEdge] = []
    for ek, facelist in shared.items():
        if len(facelist) != 2:
            continue
        (t0, a0, b0), (t1, a1, b1) = facelist
        p0 = verts[t0, a0]
        p1 = verts[t0, b0]
        axis = p1 - p0
        axis_len = np.linalg.norm(axis)
        if axis_len < 1e-12:
            continue
        axis = axis / axis_len
        n0, n1 = snap.normals[t0], snap.normals[t1]

        def into_face(t, a, b):
            opposite = 3 - a - b
            d = verts[t, opposite] - 0.5 * (verts[t, a] + verts[t, b])
            d = d - np.dot(d, axis) * axis
            ln = np.linalg.norm(d)
            return d / ln if ln > 0 else d

        d0 = into_face(t0, a0, b0)
        d1 = into_face(t1, a1, b1)
        phi = float(np.arccos(np.clip(np.dot(d0, d1), -1.0, 1.0)))
        if abs(np.pi - phi) <= threshold:
            continue
        # convex material edge when face 1 lies behind face 0's plane
        side = float(np.dot(n0, d1))
        interior = phi if side < 0 else 2.0 * np.pi - phi
        edges.append(DiffractionEdge(
            p0=p0.copy(), p1=p1.copy(), normal0=n0.copy(), normal1=n1.copy(),
            face_dir0=d0, face_dir1=d1, interior_angle=interior,
            material_id=int(snap.material_ids[t0]), edge_id=len(edges)))
    return edges
