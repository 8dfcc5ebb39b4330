"""Deterministic ray-tracing radio channel simulator.

Three layers: an environment twin (scene, materials, antennas), a ray-tracing
engine (SBR + image method, UTD diffraction, diffuse scattering) and a
channel twin (metrics, coverage, calibration), plus a CLI and an HTTP job
service for interactive planning.
"""

__version__ = "0.1.0"

from .geometry import SPEED_OF_LIGHT
from .materials import Material, MaterialLibrary, default_library, load_material_library
from .scene import Scene, load_scene, snapshot, extract_diffraction_edges
from .bvh import BvhIndex, build_bvh

__all__ = [
    "SPEED_OF_LIGHT",
    "Material", "MaterialLibrary", "default_library", "load_material_library",
    "Scene", "load_scene", "snapshot", "extract_diffraction_edges",
    "BvhIndex", "build_bvh",
    "__version__",
]
