"""Synthetic scene generators with declared ground truth for the tests.

Everything here is deterministic given its arguments; generators return the
scene document plus whatever truth the tests compare against (counts, edge
sets, kinematics).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from raytwin.materials import Material, MaterialLibrary
from raytwin.scene import Scene, scene_from_dict

GROUND_ID = 5          # index in the default library
CONCRETE_ID = 0
METAL_ID = 4


def build_library(concrete_eps: float = 5.31, concrete_sigma: float = 0.139,
                 ground_scatter: float = 0.0) -> MaterialLibrary:
    """Default-shaped library with controllable concrete parameters and
    scattering disabled unless asked for."""
    return MaterialLibrary([
        Material("concrete", eps_r=concrete_eps, sigma=concrete_sigma,
                 thickness=0.3, scatter_s=0.0),
        Material("brick", eps_r=3.75, sigma=0.038, thickness=0.2),
        Material("glass", eps_r=6.27, sigma=0.023, thickness=0.01),
        Material("wood", eps_r=1.99, sigma=0.012, thickness=0.05),
        Material("metal", eps_r=1.0, sigma=1.0e7, thickness=0.01),
        Material("ground", eps_r=15.0, sigma=0.035, thickness=1.0,
                 scatter_s=ground_scatter, lobe_alpha=2),
    ])


def pec_like_library() -> MaterialLibrary:
    """Lossless near-PEC ground (huge eps_r) for the two-ray oracle."""
    lib = build_library()
    return lib.replace(GROUND_ID, Material("ground", eps_r=1e8, sigma=0.0, thickness=1.0))


def ground_plane_doc(half: float = 500.0, material_id: int = GROUND_ID) -> dict:
    return {
        "units": "m",
        "vertices": [[-half, -half, 0.0], [half, -half, 0.0],
                     [half, half, 0.0], [-half, half, 0.0]],
        "triangles": [[0, 1, 2, material_id], [0, 2, 3, material_id]],
    }


def ground_plane_scene(half: float = 500.0, library: MaterialLibrary | None = None) -> Scene:
    return scene_from_dict(ground_plane_doc(half), library or build_library())


def empty_scene(library: MaterialLibrary | None = None) -> Scene:
    return scene_from_dict({"units": "m", "vertices": [], "triangles": []},
                           library or build_library())


def box_mesh(center, size, material_id: int, with_bottom: bool = True,
             inward: bool = False) -> tuple[list, list]:
    """(vertices, triangle rows) for an axis-aligned box. Outward normals by
    default; inward=True flips winding (rooms: air inside)."""
    cx, cy, cz = center
    sx, sy, sz = (s / 2.0 for s in size)
    v = [[cx - sx, cy - sy, cz - sz], [cx + sx, cy - sy, cz - sz],
         [cx + sx, cy + sy, cz - sz], [cx - sx, cy + sy, cz - sz],
         [cx - sx, cy - sy, cz + sz], [cx + sx, cy - sy, cz + sz],
         [cx + sx, cy + sy, cz + sz], [cx - sx, cy + sy, cz + sz]]
    # outward-wound quads: bottom, top, -y, +x, +y, -x
    quads = [(3, 2, 1, 0), (4, 5, 6, 7), (0, 1, 5, 4),
             (1, 2, 6, 5), (2, 3, 7, 6), (3, 0, 4, 7)]
    if not with_bottom:
        quads = quads[1:]
    tris = []
    for a, b, c, d in quads:
        if inward:
            tris.append([a, c, b, material_id])
            tris.append([a, d, c, material_id])
        else:
            tris.append([a, b, c, material_id])
            tris.append([a, c, d, material_id])
    return v, tris


def cube_scene(size: float = 2.0, material_id: int = CONCRETE_ID,
               library: MaterialLibrary | None = None) -> Scene:
    v, t = box_mesh((0.0, 0.0, size / 2.0), (size, size, size), material_id)
    return scene_from_dict({"units": "m", "vertices": v, "triangles": t},
                           library or build_library())


@dataclass
class RoomFixture:
    scene: Scene
    width: float
    depth: float
    height: float
    tx: np.ndarray
    rx: np.ndarray


def rectangular_room(width: float = 6.0, depth: float = 5.0, height: float = 3.0,
                     material_id: int = CONCRETE_ID, rng: np.random.Generator | None = None,
                     library: MaterialLibrary | None = None) -> RoomFixture:
    """Closed box room, walls facing inward; tx/rx placed inside with margin."""
    v, t = box_mesh((0.0, 0.0, height / 2.0), (width, depth, height),
                    material_id, inward=True)
    scene = scene_from_dict({"units": "m", "vertices": v, "triangles": t},
                            library or build_library())
    if rng is None:
        tx = np.array([-width / 4.0, -depth / 4.0, 1.5])
        rx = np.array([width / 4.0, depth / 4.0, 1.5])
    else:
        margin = 0.5
        lo = np.array([-width / 2 + margin, -depth / 2 + margin, margin])
        hi = np.array([width / 2 - margin, depth / 2 - margin, height - margin])
        tx = lo + rng.random(3) * (hi - lo)
        rx = lo + rng.random(3) * (hi - lo)
        while np.linalg.norm(rx - tx) < 1.0:
            rx = lo + rng.random(3) * (hi - lo)
    return RoomFixture(scene=scene, width=width, depth=depth, height=height, tx=tx, rx=rx)


def random_room(seed: int, library: MaterialLibrary | None = None) -> RoomFixture:
    rng = np.random.default_rng(seed)
    return rectangular_room(
        width=float(rng.uniform(4.0, 10.0)),
        depth=float(rng.uniform(4.0, 8.0)),
        height=float(rng.uniform(2.5, 4.0)),
        rng=rng, library=library)


@dataclass
class CampusFixture:
    scene: Scene
    doc: dict
    n_buildings: int
    n_triangles: int
    edge_endpoints: set          # frozenset pairs of rounded endpoints
    building_centers: list


def campus_scene(n_buildings: int = 10, seed: int = 7, half: float = 60.0,
                 library: MaterialLibrary | None = None) -> CampusFixture:
    """Ground plane plus open-bottom box buildings on a jittered grid.

    Declared truth: triangle count, the wedge-edge endpoint set (8 edges per
    building: 4 roof + 4 vertical) and building centers.
    """
    rng = np.random.default_rng(seed)
    vertices = [[-half, -half, 0.0], [half, -half, 0.0],
                [half, half, 0.0], [-half, half, 0.0]]
    triangles = [[0, 1, 2, GROUND_ID], [0, 2, 3, GROUND_ID]]
    edge_endpoints = set()
    centers = []
    side = int(np.ceil(np.sqrt(n_buildings)))
    pitch = 2.0 * half * 0.8 / side
    placed = 0
    for gy in range(side):
        for gx in range(side):
            if placed >= n_buildings:
                break
            cx = -half * 0.8 + (gx + 0.5) * pitch + rng.uniform(-2.0, 2.0)
            cy = -half * 0.8 + (gy + 0.5) * pitch + rng.uniform(-2.0, 2.0)
            w = rng.uniform(6.0, 12.0)
            d = rng.uniform(6.0, 12.0)
            h = rng.uniform(6.0, 20.0)
            base = len(vertices)
            v, t = box_mesh((cx, cy, h / 2.0), (w, d, h), CONCRETE_ID, with_bottom=False)
            vertices.extend(v)
            triangles.extend([[a + base, b + base, c + base, m] for a, b, c, m in t])
            centers.append((cx, cy, w, d, h))
            placed += 1
            x0, x1 = cx - w / 2, cx + w / 2
            y0, y1 = cy - d / 2, cy + d / 2
            roof = [((x0, y0, h), (x1, y0, h)), ((x1, y0, h), (x1, y1, h)),
                    ((x1, y1, h), (x0, y1, h)), ((x0, y1, h), (x0, y0, h))]
            vertical = [((x, y, 0.0), (x, y, h)) for x, y in
                        ((x0, y0), (x1, y0), (x1, y1), (x0, y1))]
            for a, b in roof + vertical:
                edge_endpoints.add(frozenset((tuple(np.round(a, 6)), tuple(np.round(b, 6)))))
    doc = {"units": "m", "vertices": vertices, "triangles": triangles}
    scene = scene_from_dict(doc, library or build_library())
    return CampusFixture(scene=scene, doc=doc, n_buildings=n_buildings,
                         n_triangles=len(triangles),
                         edge_endpoints=edge_endpoints, building_centers=centers)


@dataclass
class V2VFixture:
    scene: Scene
    f: float = 6.0e9

    ANTENNA_HEIGHT = 1.8      # mast above the 1.5 m vehicle roof

    @staticmethod
    def tx_position(t: float) -> np.ndarray:
        """Antenna of the 10 m/s (36 km/h) vehicle, at the intersection at t=6."""
        t = min(max(t, 0.0), 12.0)
        return np.array([-60.0 + 10.0 * t, 0.0, V2VFixture.ANTENNA_HEIGHT])

    @staticmethod
    def rx_position(t: float) -> np.ndarray:
        """Antenna of the 18 km/h (5 m/s) vehicle: approaches, slows over
        4..5 s to a stop at y=-12.5 while the other vehicle clears, resumes
        at t=9. Piecewise linear, so the keyframe table reproduces it
        exactly."""
        t = min(max(t, 0.0), 12.0)
        if t <= 4.0:
            y = -35.0 + 5.0 * t
        elif t <= 5.0:
            y = -15.0 + 2.5 * (t - 4.0)
        elif t <= 9.0:
            y = -12.5
        else:
            y = -12.5 + 5.0 * (t - 9.0)
        return np.array([0.0, y, V2VFixture.ANTENNA_HEIGHT])

    BREAKPOINTS = (0.0, 4.0, 5.0, 9.0, 12.0)


def v2v_scene(library: MaterialLibrary | None = None) -> V2VFixture:
    """Open three-way-intersection-style scene: ground, two corner buildings
    and two keyframed vehicle boxes following the scripted trajectories."""
    lib = library or build_library()
    vertices = [[-120.0, -120.0, 0.0], [120.0, -120.0, 0.0],
                [120.0, 120.0, 0.0], [-120.0, 120.0, 0.0]]
    triangles = [[0, 1, 2, GROUND_ID], [0, 2, 3, GROUND_ID]]
    for cx, cy in ((-25.0, -25.0), (25.0, -25.0)):
        base = len(vertices)
        v, t = box_mesh((cx, cy, 5.0), (14.0, 14.0, 10.0), CONCRETE_ID, with_bottom=False)
        vertices.extend(v)
        triangles.extend([[a + base, b + base, c + base, m] for a, b, c, m in t])

    def vehicle(keyframes):
        v, t = box_mesh((0.0, 0.0, 0.75), (4.0, 1.8, 1.5), METAL_ID)
        return {"vertices": v, "triangles": t, "keyframes": keyframes}

    def ground_anchor(p):
        return [p[0], p[1], 0.0]

    tx_frames = [{"t": float(t), "pos": ground_anchor(V2VFixture.tx_position(t)),
                  "yaw_deg": 0.0} for t in (0.0, 12.0)]
    rx_frames = [{"t": float(t), "pos": ground_anchor(V2VFixture.rx_position(t)),
                  "yaw_deg": 90.0} for t in V2VFixture.BREAKPOINTS]
    doc = {"units": "m", "vertices": vertices, "triangles": triangles,
           "dynamic_objects": [vehicle(tx_frames), vehicle(rx_frames)]}
    return V2VFixture(scene=scene_from_dict(doc, lib))


@dataclass
class CalibrationFixture:
    scene: Scene
    tx: np.ndarray
    rx_points: list
    f: float


def calibration_scene(library: MaterialLibrary) -> CalibrationFixture:
    """Wall-reflection-dominated geometry: a metal screen blocks the direct
    and ground paths, so received power rides on the concrete wall's
    reflection coefficient."""
    vertices = [[-80.0, -80.0, 0.0], [80.0, -80.0, 0.0],
                [80.0, 80.0, 0.0], [-80.0, 80.0, 0.0]]
    triangles = [[0, 1, 2, GROUND_ID], [0, 2, 3, GROUND_ID]]
    # concrete wall: x = 20 plane, facing -x
    base = len(vertices)
    v, t = box_mesh((20.25, 0.0, 10.0), (0.5, 60.0, 20.0), CONCRETE_ID, with_bottom=False)
    vertices.extend(v)
    triangles.extend([[a + base, b + base, c + base, m] for a, b, c, m in t])
    # metal screen at y = -20 blocks the direct and ground-bounce routes
    base = len(vertices)
    v, t = box_mesh((-19.0, -20.0, 9.0), (42.0, 0.5, 18.0), METAL_ID, with_bottom=False)
    vertices.extend(v)
    triangles.extend([[a + base, b + base, c + base, m] for a, b, c, m in t])
    scene = scene_from_dict({"units": "m", "vertices": vertices, "triangles": triangles},
                            library)
    tx = np.array([-25.0, -10.0, 5.0])
    rng = np.random.default_rng(11)
    rx_points = [np.array([float(rng.uniform(-15.0, 0.0)),
                           float(rng.uniform(-32.0, -25.0)), 1.5])
                 for _ in range(20)]
    return CalibrationFixture(scene=scene, tx=tx, rx_points=rx_points, f=6.0e9)
