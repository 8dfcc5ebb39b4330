"""Per-path polarimetric field evaluation.

A path's transfer is split into: a real spreading factor (1/m), the carrier
phase exp(-j 2 pi f delay), a dimensionless 2x2 Jones matrix between the
departure and arrival spherical bases (antennas excluded), and the Friis
factor lambda / 4 pi applied when antennas are attached.

Amplitude convention: with isotropic antennas, |amplitude|^2 of a LoS path
equals the Friis free-space power gain (lambda / 4 pi d)^2.
"""

from __future__ import annotations

import numpy as np

from ..antenna import AntennaPattern, gain_at
from ..geometry import SPEED_OF_LIGHT, normalize, spherical_basis
from ..materials import (MaterialLibrary, fresnel_coefficients, scattering_amplitude,
                         slab_transmission)
from ..scene import DiffractionEdge, SceneSnapshot
from .config import EngineConfig
from .path import (DIFFRACTION, REFLECTION, SCATTERING, TRANSMISSION,
                   PropagationPath, TerminalSpec)
from .scattering import scatter_triangle_of, tile_area_of
from .utd import evaluate_diffraction


def _basis_rotation(e1_new: np.ndarray, e2_new: np.ndarray,
                    e1: np.ndarray, e2: np.ndarray) -> np.ndarray:
    return np.array([[np.dot(e1_new, e1), np.dot(e1_new, e2)],
                     [np.dot(e2_new, e1), np.dot(e2_new, e2)]], dtype=complex)


def compute_field(path: PropagationPath, snap: SceneSnapshot, lib: MaterialLibrary,
                  f: float, cfg: EngineConfig,
                  edges: list[DiffractionEdge] | None = None) -> tuple[np.ndarray, float]:
    """(jones, spreading) for a geometrically valid path.

    jones maps (theta, phi) components at the departure direction to
    (theta, phi) components at the arrival propagation direction.
    """
    nodes = [np.asarray(n, dtype=np.float64) for n in
             [path.tx_point] + [i.point for i in path.interactions] + [path.rx_point]]
    d = normalize(nodes[1] - nodes[0])
    e1, e2 = spherical_basis(d)
    m = np.eye(2, dtype=complex)
    spreading = 1.0 / path.path_length
    scatter_done = False

    for idx, inter in enumerate(path.interactions):
        p_next = nodes[idx + 2]
        if inter.kind in (REFLECTION, TRANSMISSION):
            n = snap.normals[inter.surface_id].copy()
            if np.dot(n, d) > 0:
                n = -n
            cos_i = float(np.clip(-np.dot(d, n), 0.0, 1.0))
            perp = np.cross(d, n)
            pl = np.linalg.norm(perp)
            perp = e1 if pl < 1e-9 else perp / pl
            par_in = np.cross(perp, d)
            rot = _basis_rotation(perp, par_in, e1, e2)
            mat = lib[inter.material_id]
            if inter.kind == REFLECTION:
                c_perp, c_par = fresnel_coefficients(mat, cos_i, f)
                d = normalize(p_next - inter.point)
            else:
                c_perp, c_par = slab_transmission(mat, cos_i, f)
            m = np.diag([c_perp, c_par]) @ rot @ m
            e1, e2 = perp, np.cross(perp, d)
        elif inter.kind == DIFFRACTION:
            if edges is None:
                raise ValueError("diffraction path needs the edge list")
            edge = edges[inter.surface_id]
            info = evaluate_diffraction(edge, inter.point, nodes[0], nodes[-1], lib, f)
            if info is None:
                return np.zeros((2, 2), dtype=complex), 0.0
            rot = _basis_rotation(info["beta_hat_in"], info["phi_hat_in"], e1, e2)
            m = np.diag([info["d_soft"], info["d_hard"]]) @ rot @ m
            d = info["s_out_dir"]
            e1, e2 = info["beta_hat_out"], info["phi_hat_out"]
            sp, s = info["sp"], info["s"]
            spreading = 1.0 / np.sqrt(sp * s * (sp + s))
        elif inter.kind == SCATTERING:
            tri = scatter_triangle_of(inter.surface_id)
            n = snap.normals[tri].copy()
            if np.dot(n, d) > 0:
                n = -n
            cos_i = float(np.clip(-np.dot(d, n), 0.0, 1.0))
            mat = lib[inter.material_id]
            d_out = normalize(p_next - inter.point)
            area = tile_area_of(snap, path, cfg.scatter_tile_m)
            amp = scattering_amplitude(mat, d, d_out, n) * np.sqrt(area * cos_i)
            b1, b2 = spherical_basis(d_out)
            m = amp * _basis_rotation(b1, b2, e1, e2) @ m
            d = d_out
            e1, e2 = b1, b2
            scatter_done = True
        else:
            raise ValueError(f"unknown interaction kind {inter.kind!r}")

    if scatter_done:
        r1 = float(np.linalg.norm(path.interactions[0].point - nodes[0]))
        r2 = float(np.linalg.norm(nodes[-1] - path.interactions[0].point))
        spreading = 1.0 / (r1 * r2)

    theta_a, phi_a = spherical_basis(d)
    jones = _basis_rotation(theta_a, phi_a, e1, e2) @ m
    return jones, float(spreading)


def apply_antennas(path: PropagationPath, jones: np.ndarray, spreading: float,
                   tx: TerminalSpec, rx: TerminalSpec, f: float) -> complex:
    """Complex path amplitude for unit transmit power."""
    nodes = [path.tx_point] + [i.point for i in path.interactions] + [path.rx_point]
    d_dep = normalize(np.asarray(nodes[1]) - np.asarray(nodes[0]))
    d_arr = normalize(np.asarray(nodes[-1]) - np.asarray(nodes[-2]))
    g_t = gain_at(tx.pattern, d_dep, f)
    g_r_theta, g_r_phi = gain_at(rx.pattern, -d_arr, f)
    # theta_hat is shared between d and -d, phi_hat flips sign
    rx_vec = np.array([g_r_theta, -g_r_phi], dtype=complex)
    tx_vec = np.array([g_t[0], g_t[1]], dtype=complex)
    lam = SPEED_OF_LIGHT / f
    phase = np.exp(-2j * np.pi * f * path.delay)
    return complex((lam / (4.0 * np.pi)) * spreading * phase * (rx_vec @ jones @ tx_vec))
