import numpy as np
import pytest

from raytwin.antenna import (ISOTROPIC, VERTICAL_DIPOLE, AntennaError, AntennaPattern,
                             gain_at, horizontal_isotropic, load_pattern, save_pattern)
from raytwin.geometry import direction_from_az_el


def full_sphere_grid(step_deg=1.0):
    az = np.arange(0.0, 360.0, step_deg)
    el = np.arange(-90.0, 90.0 + step_deg / 2, step_deg)
    shape = (len(az), len(el))
    g_theta = np.cos(np.radians(el))[None, :] * np.exp(1j * np.radians(az))[:, None]
    g_theta = np.broadcast_to(g_theta, shape).copy()
    g_phi = 0.3 * np.ones(shape, dtype=complex)
    return AntennaPattern(kind="grid", az_deg=az, el_deg=el,
                          g_theta=g_theta, g_phi=g_phi)


class TestGainAt:
    def test_isotropic_everywhere(self, rng):
        for _ in range(50):
            d = rng.normal(size=3)
            d /= np.linalg.norm(d)
            assert gain_at(ISOTROPIC, d) == (1.0 + 0j, 0j)

    def test_dipole_broadside_gain(self):
        g_theta, g_phi = gain_at(VERTICAL_DIPOLE, np.array([1.0, 0.0, 0.0]))
        gain_dbi = 10 * np.log10(abs(g_theta) ** 2)
        assert gain_dbi == pytest.approx(2.15, abs=0.05)
        assert g_phi == 0j

    def test_dipole_zenith_null(self):
        g_theta, _ = gain_at(VERTICAL_DIPOLE, np.array([0.0, 0.0, 1.0]))
        assert abs(g_theta) < 1e-3

    def test_grid_bilinear_matches_nodes(self):
        pat = full_sphere_grid(step_deg=5.0)
        d = direction_from_az_el(45.0, 30.0)
        got = gain_at(pat, d)
        assert got[0] == pytest.approx(np.cos(np.radians(30.0)) * np.exp(1j * np.radians(45.0)))
        assert got[1] == pytest.approx(0.3)

    def test_azimuth_wrap_continuity(self):
        pat = full_sphere_grid(step_deg=5.0)
        left = gain_at(pat, direction_from_az_el(359.999, 10.0))
        right = gain_at(pat, direction_from_az_el(0.001, 10.0))
        assert abs(left[0] - right[0]) < 1e-2
        assert abs(left[1] - right[1]) < 1e-9

    def test_unit_direction_required(self):
        with pytest.raises(AntennaError):
            gain_at(ISOTROPIC, np.array([1.0, 1.0, 0.0]))

    def test_horizontal_isotropic_is_phi_polarized(self, rng):
        pat = horizontal_isotropic()
        for _ in range(20):
            d = rng.normal(size=3)
            d /= np.linalg.norm(d)
            g_theta, g_phi = gain_at(pat, d)
            assert g_theta == pytest.approx(0.0, abs=1e-12)
            assert g_phi == pytest.approx(1.0, abs=1e-12)


class TestPatternFiles:
    def test_one_degree_grid_node_count(self, tmp_path):
        pat = full_sphere_grid(step_deg=1.0)
        assert pat.g_theta.shape == (360, 181)
        p = tmp_path / "pat.json"
        save_pattern(pat, p)
        loaded = load_pattern(p)
        assert loaded.g_theta.shape == (360, 181)

    def test_grid_missing_poles_rejected(self):
        az = np.arange(0.0, 360.0, 10.0)
        el = np.arange(-80.0, 80.1, 10.0)       # no poles
        shape = (len(az), len(el))
        with pytest.raises(AntennaError, match="poles"):
            AntennaPattern(kind="grid", az_deg=az, el_deg=el,
                           g_theta=np.ones(shape, complex), g_phi=np.zeros(shape, complex))

    def test_roundtrip_identical_samples(self, tmp_path, rng):
        pat = full_sphere_grid(step_deg=15.0)
        p = tmp_path / "pat.json"
        save_pattern(pat, p)
        loaded = load_pattern(p)
        assert np.array_equal(loaded.g_theta, pat.g_theta)
        assert np.array_equal(loaded.g_phi, pat.g_phi)
        for _ in range(20):
            d = rng.normal(size=3)
            d /= np.linalg.norm(d)
            assert gain_at(loaded, d) == gain_at(pat, d)

    def test_irregular_lattice_rejected(self):
        az = np.array([0.0, 10.0, 30.0])
        el = np.array([-90.0, 0.0, 90.0])
        with pytest.raises(AntennaError, match="regular"):
            AntennaPattern(kind="grid", az_deg=az, el_deg=el,
                           g_theta=np.ones((3, 3), complex), g_phi=np.zeros((3, 3), complex))
