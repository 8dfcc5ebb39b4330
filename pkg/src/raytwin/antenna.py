"""Antenna patterns: per-direction complex gains on the (theta, phi) basis.

Three kinds: isotropic (g_theta = 1, g_phi = 0 everywhere), an analytic
vertical half-wave dipole (the default omni used for validation setups),
and gridded patterns on a regular full-sphere az/el lattice with bilinear
interpolation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .geometry import az_el_from_direction, rotation_about_z

DIPOLE_PEAK_GAIN = 1.640922376  # half-wave dipole directivity (linear)


class AntennaError(ValueError):
    """Invalid pattern definition or file."""


@dataclass(frozen=True)
class AntennaPattern:
    kind: str = "isotropic"                      # isotropic | vertical_dipole | grid
    az_deg: np.ndarray | None = None             # grid azimuth nodes, ascending, wraps at 360
    el_deg: np.ndarray | None = None             # grid elevation nodes, -90..90 inclusive
    g_theta: np.ndarray | None = None            # complex (n_az, n_el)
    g_phi: np.ndarray | None = None
    yaw_deg: float = 0.0                         # boresight orientation
    pitch_deg: float = 0.0

    def __post_init__(self):
        if self.kind not in ("isotropic", "vertical_dipole", "grid"):
            raise AntennaError(f"unknown pattern kind {self.kind!r}")
        if self.kind == "grid":
            if self.az_deg is None or self.el_deg is None or self.g_theta is None:
                raise AntennaError("grid pattern requires az_deg, el_deg, gains")
            if self.el_deg[0] > -90.0 + 1e-9 or self.el_deg[-1] < 90.0 - 1e-9:
                raise AntennaError("grid pattern must cover elevation -90..90 (poles)")
            daz = np.diff(self.az_deg)
            dele = np.diff(self.el_deg)
            if np.any(daz <= 0) or np.any(dele <= 0):
                raise AntennaError("grid nodes must be strictly increasing")
            if not (np.allclose(daz, daz[0]) and np.allclose(dele, dele[0])):
                raise AntennaError("grid lattice must be regular")


ISOTROPIC = AntennaPattern(kind="isotropic")
VERTICAL_DIPOLE = AntennaPattern(kind="vertical_dipole")


def horizontal_isotropic() -> AntennaPattern:
    """Constant phi-polarized pattern (g_theta = 0, g_phi = 1); handy for
    forcing perpendicular polarization onto ground bounces."""
    az = np.arange(0.0, 360.0, 30.0)
    el = np.linspace(-90.0, 90.0, 13)
    shape = (len(az), len(el))
    return AntennaPattern(kind="grid", az_deg=az, el_deg=el,
                          g_theta=np.zeros(shape, dtype=complex),
                          g_phi=np.ones(shape, dtype=complex))


def gain_at(a: AntennaPattern, direction: np.ndarray, f: float = 0.0) -> tuple[complex, complex]:
    """(g_theta, g_phi) for a unit propagation direction in the global frame.

    Orientation is applied by rotating the direction into the antenna's
    local frame (yaw about z, then pitch about the local y axis).
    """
    d = np.asarray(direction, dtype=np.float64)
    if abs(np.dot(d, d) - 1.0) > 1e-6:
        raise AntennaError("direction must be unit length")
    if a.yaw_deg or a.pitch_deg:
        d = rotation_about_z(-a.yaw_deg) @ d
        p = np.radians(a.pitch_deg)
        c, s = np.cos(p), np.sin(p)
        d = np.array([c * d[0] + s * d[2], d[1], -s * d[0] + c * d[2]])

    if a.kind == "isotropic":
        return 1.0 + 0.0j, 0.0j
    if a.kind == "vertical_dipole":
        cos_t = np.clip(d[2], -1.0, 1.0)      # polar angle from the dipole axis (z)
        sin_t = np.sqrt(max(0.0, 1.0 - cos_t * cos_t))
        if sin_t < 1e-6:
            return 0.0j, 0.0j
        e = np.cos(0.5 * np.pi * cos_t) / sin_t
        return complex(np.sqrt(DIPOLE_PEAK_GAIN) * e), 0.0j

    az, el = az_el_from_direction(d)
    az = az % 360.0
    az_nodes = a.az_deg
    el_nodes = a.el_deg
    step_az = az_nodes[1] - az_nodes[0]
    step_el = el_nodes[1] - el_nodes[0]
    ia = int(np.floor((az - az_nodes[0]) / step_az))
    wa = (az - az_nodes[0]) / step_az - ia
    ia0 = ia % len(az_nodes)
    ia1 = (ia + 1) % len(az_nodes)        # azimuth wraps
    ie = int(np.floor((el - el_nodes[0]) / step_el))
    ie = min(max(ie, 0), len(el_nodes) - 2)
    we = (el - el_nodes[ie]) / step_el
    we = min(max(we, 0.0), 1.0)

    def bilerp(g):
        return ((1 - wa) * (1 - we) * g[ia0, ie] + wa * (1 - we) * g[ia1, ie]
                + (1 - wa) * we * g[ia0, ie + 1] + wa * we * g[ia1, ie + 1])

    return complex(bilerp(a.g_theta)), complex(bilerp(a.g_phi))


def gains_batch(a: AntennaPattern, dirs: np.ndarray, f: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized gain_at over an (n, 3) array of unit directions."""
    d = np.asarray(dirs, dtype=np.float64)
    if a.yaw_deg or a.pitch_deg:
        d = d @ rotation_about_z(-a.yaw_deg).T
        p = np.radians(a.pitch_deg)
        c, s = np.cos(p), np.sin(p)
        d = np.stack([c * d[:, 0] + s * d[:, 2], d[:, 1],
                      -s * d[:, 0] + c * d[:, 2]], axis=1)
    n = len(d)
    if a.kind == "isotropic":
        return np.ones(n, dtype=complex), np.zeros(n, dtype=complex)
    if a.kind == "vertical_dipole":
        cos_t = np.clip(d[:, 2], -1.0, 1.0)
        sin_t = np.sqrt(np.maximum(0.0, 1.0 - cos_t * cos_t))
        e = np.zeros(n)
        ok = sin_t >= 1e-6
        e[ok] = np.cos(0.5 * np.pi * cos_t[ok]) / sin_t[ok]
        return np.sqrt(DIPOLE_PEAK_GAIN) * e.astype(complex), np.zeros(n, dtype=complex)

    az = np.degrees(np.arctan2(d[:, 1], d[:, 0])) % 360.0
    el = np.degrees(np.arcsin(np.clip(d[:, 2], -1.0, 1.0)))
    step_az = a.az_deg[1] - a.az_deg[0]
    step_el = a.el_deg[1] - a.el_deg[0]
    fa = (az - a.az_deg[0]) / step_az
    ia = np.floor(fa).astype(np.int64)
    wa = fa - ia
    ia0 = ia % len(a.az_deg)
    ia1 = (ia + 1) % len(a.az_deg)
    fe = (el - a.el_deg[0]) / step_el
    ie = np.clip(np.floor(fe).astype(np.int64), 0, len(a.el_deg) - 2)
    we = np.clip(fe - ie, 0.0, 1.0)

    def bilerp(g):
        return ((1 - wa) * (1 - we) * g[ia0, ie] + wa * (1 - we) * g[ia1, ie]
                + (1 - wa) * we * g[ia0, ie + 1] + wa * we * g[ia1, ie + 1])

    return bilerp(a.g_theta), bilerp(a.g_phi)


def load_pattern(path: str | Path) -> AntennaPattern:
    """Load a gridded pattern file; see save_pattern for the schema."""
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise AntennaError(f"malformed pattern file: {e}") from e
    kind = doc.get("kind", "grid")
    if kind in ("isotropic", "vertical_dipole"):
        return AntennaPattern(kind=kind, yaw_deg=float(doc.get("yaw_deg", 0.0)),
                              pitch_deg=float(doc.get("pitch_deg", 0.0)))
    try:
        az = np.asarray(doc["az_deg"], dtype=np.float64)
        el = np.asarray(doc["el_deg"], dtype=np.float64)
        samples = np.asarray(doc["gains"], dtype=np.float64)
    except KeyError as e:
        raise AntennaError(f"pattern file missing key {e}") from e
    if samples.shape != (len(az), len(el), 4):
        raise AntennaError("gains must have shape (n_az, n_el, 4)")
    g_theta = samples[:, :, 0] + 1j * samples[:, :, 1]
    g_phi = samples[:, :, 2] + 1j * samples[:, :, 3]
    return AntennaPattern(kind="grid", az_deg=az, el_deg=el, g_theta=g_theta,
                          g_phi=g_phi, yaw_deg=float(doc.get("yaw_deg", 0.0)),
                          pitch_deg=float(doc.get("pitch_deg", 0.0)))


def save_pattern(a: AntennaPattern, path: str | Path) -> None:
    if a.kind != "grid":
        Path(path).write_text(json.dumps(
            {"schema_version": 1, "kind": a.kind, "yaw_deg": a.yaw_deg, "pitch_deg": a.pitch_deg}))
        return
    samples = np.stack([a.g_theta.real, a.g_theta.imag, a.g_phi.real, a.g_phi.imag], axis=-1)
    Path(path).write_text(json.dumps({
        "schema_version": 1,
        "kind": "grid",
        "az_deg": a.az_deg.tolist(),
        "el_deg": a.el_deg.tolist(),
        "gains": samples.tolist(),
        "yaw_deg": a.yaw_deg,
        "pitch_deg": a.pitch_deg,
    }))


def parse_antenna_spec(spec: str) -> AntennaPattern:
    """CLI helper: 'isotropic', 'vertical_dipole', 'horizontal_isotropic'
    or a path to a pattern file."""
    if spec == "isotropic":
        return ISOTROPIC
    if spec == "vertical_dipole":
        return VERTICAL_DIPOLE
    if spec == "horizontal_isotropic":
        return horizontal_isotropic()
    return load_pattern(spec)
