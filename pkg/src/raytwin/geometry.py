"""Small vector-geometry toolkit shared by the scene and the tracer.

Conventions used everywhere in this package: right-handed frame, meters,
z up; azimuth is measured counter-clockwise from +x in degrees, elevation
from the horizontal plane.
"""

from __future__ import annotations

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0


def vec(x: float, y: float, z: float) -> np.ndarray:
    return np.array([x, y, z], dtype=np.float64)


def norm(v: np.ndarray) -> float:
    return float(np.sqrt(np.dot(v, v)))


def normalize(v: np.ndarray) -> np.ndarray:
    n = norm(v)
    if n == 0.0:
        raise ValueError("cannot normalize zero vector")
    return v / n


def triangle_normal(v0: np.ndarray, v1: np.ndarray, v2: np.ndarray) -> np.ndarray:
    """Unit normal by right-hand rule over the winding order."""
    return normalize(np.cross(v1 - v0, v2 - v0))


def triangle_area(v0: np.ndarray, v1: np.ndarray, v2: np.ndarray) -> float:
    return 0.5 * norm(np.cross(v1 - v0, v2 - v0))


def mirror_point(p: np.ndarray, plane_point: np.ndarray, plane_normal: np.ndarray) -> np.ndarray:
    """Reflect a point across the plane (plane_normal must be unit length)."""
    d = np.dot(p - plane_point, plane_normal)
    return p - 2.0 * d * plane_normal


def reflect_direction(d: np.ndarray, n: np.ndarray) -> np.ndarray:
    return d - 2.0 * np.dot(d, n) * n


def ray_plane_intersection(origin: np.ndarray, direction: np.ndarray,
                           plane_point: np.ndarray, plane_normal: np.ndarray) -> float | None:
    """Signed ray parameter t of the plane hit, or None when parallel."""
    denom = np.dot(direction, plane_normal)
    if abs(denom) < 1e-12:
        return None
    return float(np.dot(plane_point - origin, plane_normal) / denom)


def point_in_triangle(p: np.ndarray, v0: np.ndarray, v1: np.ndarray, v2: np.ndarray,
                      tol: float = 1e-9) -> bool:
    """Barycentric containment test for a point assumed to lie in the triangle plane."""
    e0 = v1 - v0
    e1 = v2 - v0
    w = p - v0
    d00 = np.dot(e0, e0)
    d01 = np.dot(e0, e1)
    d11 = np.dot(e1, e1)
    dw0 = np.dot(w, e0)
    dw1 = np.dot(w, e1)
    denom = d00 * d11 - d01 * d01
    if denom <= 0.0:
        return False
    u = (d11 * dw0 - d01 * dw1) / denom
    v = (d00 * dw1 - d01 * dw0) / denom
    return u >= -tol and v >= -tol and (u + v) <= 1.0 + tol


def rotation_about_z(yaw_deg: float) -> np.ndarray:
    a = np.radians(yaw_deg)
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def az_el_from_direction(d: np.ndarray) -> tuple[float, float]:
    """(azimuth, elevation) in degrees for a unit direction vector."""
    az = np.degrees(np.arctan2(d[1], d[0]))
    el = np.degrees(np.arcsin(np.clip(d[2], -1.0, 1.0)))
    return float(az), float(el)


def direction_from_az_el(az_deg: float, el_deg: float) -> np.ndarray:
    az = np.radians(az_deg)
    el = np.radians(el_deg)
    ce = np.cos(el)
    return np.array([ce * np.cos(az), ce * np.sin(az), np.sin(el)])


def spherical_basis(d: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Global-frame (theta_hat, phi_hat) unit vectors at propagation direction d.

    theta_hat points toward decreasing elevation (down along the meridian),
    phi_hat counter-clockwise in azimuth; both orthogonal to d. At the poles
    the azimuth is taken as 0.
    """
    x, y, z = d
    rho = np.hypot(x, y)
    if rho < 1e-12:
        # pole: pick azimuth 0 so the basis is still well defined
        theta_hat = np.array([1.0, 0.0, 0.0]) * np.sign(z)
        phi_hat = np.array([0.0, 1.0, 0.0])
        return theta_hat, phi_hat
    cos_az, sin_az = x / rho, y / rho
    # d = (cos el cos az, cos el sin az, sin el); theta_hat = d(d)/d(-el)
    sin_el = z
    cos_el = rho
    theta_hat = np.array([sin_el * cos_az, sin_el * sin_az, -cos_el])
    phi_hat = np.array([-sin_az, cos_az, 0.0])
    return theta_hat, phi_hat


def spherical_basis_batch(dirs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized spherical_basis for an (n, 3) array of unit directions."""
    x, y, z = dirs[:, 0], dirs[:, 1], dirs[:, 2]
    rho = np.hypot(x, y)
    safe = rho > 1e-12
    inv = np.where(safe, 1.0 / np.where(safe, rho, 1.0), 0.0)
    cos_az = np.where(safe, x * inv, 1.0)
    sin_az = np.where(safe, y * inv, 0.0)
    sin_el = z
    cos_el = rho
    theta = np.stack([sin_el * cos_az, sin_el * sin_az, -cos_el], axis=1)
    phi = np.stack([-sin_az, cos_az, np.zeros_like(z)], axis=1)
    pole = ~safe
    if pole.any():
        theta[pole] = np.stack([np.sign(z[pole]), np.zeros(pole.sum()),
                                np.zeros(pole.sum())], axis=1)
        phi[pole] = np.array([0.0, 1.0, 0.0])
    return theta, phi


class Aabb:
    """Axis-aligned bounding box."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo: np.ndarray, hi: np.ndarray):
        self.lo = np.asarray(lo, dtype=np.float64)
        self.hi = np.asarray(hi, dtype=np.float64)

    @classmethod
    def of_points(cls, pts: np.ndarray) -> "Aabb":
        pts = np.asarray(pts, dtype=np.float64).reshape(-1, 3)
        return cls(pts.min(axis=0), pts.max(axis=0))

    def union(self, other: "Aabb") -> "Aabb":
        return Aabb(np.minimum(self.lo, other.lo), np.maximum(self.hi, other.hi))

    def contains(self, p: np.ndarray, tol: float = 1e-9) -> bool:
        return bool(np.all(p >= self.lo - tol) and np.all(p <= self.hi + tol))

    def diagonal(self) -> float:
        return norm(self.hi - self.lo)

    def __repr__(self) -> str:
        return f"Aabb(lo={self.lo.tolist()}, hi={self.hi.tolist()})"
