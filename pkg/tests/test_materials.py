import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from raytwin.materials import (Material, MaterialError, MaterialLibrary,
                               complex_permittivity, default_library,
                               fresnel_coefficients, load_material_library,
                               scattering_amplitude, slab_transmission,
                               VACUUM_PERMITTIVITY)

C0 = 299_792_458.0


def transfer_matrix_t(eps: complex, d: float, f: float, cos_i: float, pol: str) -> complex:
    """Independent slab transmission oracle via 2x2 interface/propagation
    matrices (air | slab | air)."""
    k0 = 2 * np.pi * f / C0
    sin2 = 1.0 - cos_i * cos_i
    kz1 = k0 * cos_i
    kz2 = k0 * np.sqrt(eps - sin2 + 0j)
    if pol == "perp":
        q1, q2 = kz1, kz2
    else:
        q1, q2 = kz1 / 1.0, kz2 / eps
    def interface(qa, qb):
        r = (qa - qb) / (qa + qb)
        t = 1 + r
        return np.array([[1, r], [r, 1]], dtype=complex) / t
    prop = np.diag([np.exp(1j * kz2 * d), np.exp(-1j * kz2 * d)])
    m = interface(q1, q2) @ prop @ interface(q2, q1)
    return 1.0 / m[0, 0]


class TestComplexPermittivity:
    def test_lossless(self):
        m = Material("x", eps_r=4.0, sigma=0.0)
        assert complex_permittivity(m, 1e9) == 4.0 - 0j

    def test_vacuum(self):
        m = Material("v", eps_r=1.0, sigma=0.0)
        assert complex_permittivity(m, 2.4e9) == 1.0 - 0j

    def test_hand_computed_imaginary_part(self):
        # -sigma / (2 pi f eps0) evaluated by hand for 0.139 S/m at 6 GHz
        m = Material("c", eps_r=5.31, sigma=0.139)
        eps = complex_permittivity(m, 6e9)
        by_hand = -0.139 / (2.0 * np.pi * 6e9 * 8.854e-12)
        assert eps.real == pytest.approx(5.31)
        assert eps.imag == pytest.approx(by_hand, abs=1e-3)
        assert eps.imag == pytest.approx(-0.4165, abs=1e-3)

    def test_table_interpolation_log_linear(self):
        m = Material("t", eps_r=((1e9, 4.0), (4e9, 6.0)))
        assert m.eps_r_at(1e9) == 4.0
        assert m.eps_r_at(4e9) == 6.0
        assert m.eps_r_at(2e9) == pytest.approx(5.0)       # log midpoint of 1 and 4 GHz
        assert m.eps_r_at(1e8) == 4.0                      # clamped
        assert m.eps_r_at(1e12) == 6.0

    def test_table_must_increase(self):
        with pytest.raises(MaterialError):
            Material("bad", eps_r=((2e9, 4.0), (1e9, 5.0)))


class TestFresnel:
    def test_normal_incidence_signs(self):
        m = Material("x", eps_r=4.0, sigma=0.0)
        r_perp, r_par = fresnel_coefficients(m, 1.0, 1e9)
        assert r_perp == pytest.approx(-1.0 / 3.0, abs=1e-12)
        assert r_par == pytest.approx(+1.0 / 3.0, abs=1e-12)

    def test_brewster_null(self):
        m = Material("x", eps_r=4.0, sigma=0.0)
        cos_b = np.cos(np.arctan(2.0))
        _, r_par = fresnel_coefficients(m, cos_b, 1e9)
        assert abs(r_par) < 1e-6

    def test_grazing_limit(self):
        m = Material("x", eps_r=4.0, sigma=0.0)
        r_perp, r_par = fresnel_coefficients(m, 1e-9, 1e9)
        assert abs(r_perp) == pytest.approx(1.0, abs=1e-3)
        assert abs(r_par) == pytest.approx(1.0, abs=1e-3)

    def test_lossless_energy_split(self):
        m = Material("x", eps_r=3.2, sigma=0.0)
        for cos_i in np.linspace(0.05, 1.0, 40):
            eps = complex_permittivity(m, 1e9)
            q = np.sqrt(eps - (1 - cos_i**2))
            r_perp, r_par = fresnel_coefficients(m, cos_i, 1e9)
            t_perp = 2 * cos_i / (cos_i + q)
            t_par = 2 * np.sqrt(eps) * cos_i / (eps * cos_i + q)
            assert abs(r_perp) ** 2 + (q.real / cos_i) * abs(t_perp) ** 2 == pytest.approx(1.0, abs=1e-9)
            assert abs(r_par) ** 2 + (q.real / cos_i) * abs(t_par) ** 2 == pytest.approx(1.0, abs=1e-9)

    @settings(max_examples=200, deadline=None)
    @given(eps=st.floats(1.0, 80.0), sigma=st.floats(0.0, 1e4),
           cos_i=st.floats(0.0, 1.0), f=st.floats(4e8, 1e11))
    def test_passivity(self, eps, sigma, cos_i, f):
        m = Material("x", eps_r=eps, sigma=sigma)
        r_perp, r_par = fresnel_coefficients(m, cos_i, f)
        assert abs(r_perp) <= 1.0 + 1e-12
        assert abs(r_par) <= 1.0 + 1e-12

    def test_continuity_in_cos_incidence(self):
        m = Material("x", eps_r=7.0, sigma=0.05)
        grid = np.linspace(0.0, 1.0, 2001)
        vals = np.array([fresnel_coefficients(m, c, 6e9) for c in grid])
        steps = np.abs(np.diff(vals, axis=0)).max()
        assert steps < 5e-3


class TestSlab:
    def test_vacuum_slab_pure_phase(self):
        m = Material("v", eps_r=1.0, sigma=0.0, thickness=0.25)
        for cos_i in (1.0, 0.7, 0.3):
            t_perp, t_par = slab_transmission(m, cos_i, 1e9)
            k0 = 2 * np.pi * 1e9 / C0
            want = np.exp(-1j * k0 * 0.25 * cos_i)
            assert t_perp == pytest.approx(want, abs=1e-12)
            assert t_par == pytest.approx(want, abs=1e-12)
            assert abs(t_perp) == pytest.approx(1.0, abs=1e-12)

    def test_half_wave_window(self):
        f = 6e9
        lam_slab = C0 / f / 2.0        # in-slab wavelength for eps_r = 4
        m = Material("g", eps_r=4.0, sigma=0.0, thickness=lam_slab / 2.0)
        t_perp, t_par = slab_transmission(m, 1.0, f)
        assert abs(t_perp) == pytest.approx(1.0, abs=1e-9)
        assert abs(t_par) == pytest.approx(1.0, abs=1e-9)

    def test_lossy_slab_against_transfer_matrix(self):
        m = Material("l", eps_r=6.5, sigma=1.0, thickness=0.10)
        f = 6e9
        eps = complex_permittivity(m, f)
        for cos_i in (1.0, 0.8, 0.5, 0.2):
            t_perp, t_par = slab_transmission(m, cos_i, f)
            want_perp = transfer_matrix_t(eps, 0.10, f, cos_i, "perp")
            want_par = transfer_matrix_t(eps, 0.10, f, cos_i, "par")
            assert abs(t_perp) == pytest.approx(abs(want_perp), rel=1e-6)
            assert abs(t_par) == pytest.approx(abs(want_par), rel=1e-6)


class TestScattering:
    NORMAL = np.array([0.0, 0.0, 1.0])

    def test_zero_scatter_s(self):
        m = Material("x", eps_r=4.0, scatter_s=0.0)
        d_in = np.array([0.0, 0.0, -1.0])
        for d_out in ([0, 0, 1], [0.6, 0, 0.8], [0, -0.6, 0.8]):
            assert scattering_amplitude(m, d_in, np.array(d_out, float), self.NORMAL) == 0.0

    def test_peak_at_specular(self):
        m = Material("x", eps_r=4.0, scatter_s=0.5, lobe_alpha=4)
        d_in = np.array([np.sin(0.5), 0.0, -np.cos(0.5)])
        spec = d_in - 2 * np.dot(d_in, self.NORMAL) * self.NORMAL
        a_spec = scattering_amplitude(m, d_in, spec, self.NORMAL)
        rng = np.random.default_rng(0)
        for _ in range(200):
            d = rng.normal(size=3)
            d[2] = abs(d[2])
            d /= np.linalg.norm(d)
            assert scattering_amplitude(m, d_in, d, self.NORMAL) <= a_spec + 1e-12

    def test_hemisphere_energy_quadrature(self):
        # independent 2-D quadrature of amplitude^2 over the hemisphere
        from scipy.integrate import dblquad
        m = Material("x", eps_r=4.0, scatter_s=0.7, lobe_alpha=4)
        d_in = np.array([0.0, 0.0, -1.0])      # specular at zenith

        def integrand(phi, theta):
            d = np.array([np.sin(theta) * np.cos(phi),
                          np.sin(theta) * np.sin(phi), np.cos(theta)])
            return scattering_amplitude(m, d_in, d, self.NORMAL) ** 2 * np.sin(theta)

        total, _ = dblquad(integrand, 0.0, np.pi / 2.0, 0.0, 2.0 * np.pi,
                           epsabs=1e-6, epsrel=1e-6)
        assert total == pytest.approx(m.scatter_s ** 2, abs=1e-3)

    def test_rotation_invariance(self, rng):
        from scipy.spatial.transform import Rotation
        m = Material("x", eps_r=4.0, scatter_s=0.4, lobe_alpha=8)
        d_in = np.array([0.5, 0.2, -np.sqrt(1 - 0.29)])
        d_out = np.array([0.1, -0.3, np.sqrt(1 - 0.1)])
        base = scattering_amplitude(m, d_in, d_out, self.NORMAL)
        for _ in range(20):
            rot = Rotation.random(random_state=rng).as_matrix()
            got = scattering_amplitude(m, rot @ d_in, rot @ d_out, rot @ self.NORMAL)
            assert got == pytest.approx(base, abs=1e-12)


class TestLibrary:
    def test_default_library_has_six_materials(self):
        lib = default_library()
        assert len(lib) == 6
        assert {m.name for m in lib.materials} == {
            "concrete", "brick", "glass", "wood", "metal", "ground"}

    def test_load_roundtrip(self, tmp_path):
        p = tmp_path / "mats.json"
        p.write_text(json.dumps({"materials": [
            {"name": "a", "eps_r": 4.0, "sigma": 0.01, "thickness_m": 0.2,
             "scatter_s": 0.3, "lobe_alpha": 4},
            {"name": "b", "eps_r_table": [[1e9, 3.0], [1e10, 5.0]], "sigma": 0.0,
             "thickness_m": 0.1, "scatter_s": 0.0, "lobe_alpha": 2},
        ]}))
        lib = load_material_library(p)
        assert len(lib) == 2
        assert lib.id_of("b") == 1
        assert lib[1].eps_r_at(1e9) == 3.0

    def test_duplicate_names_rejected(self):
        with pytest.raises(MaterialError):
            MaterialLibrary([Material("a"), Material("a")])

    def test_invariants_enforced(self):
        with pytest.raises(MaterialError):
            Material("bad", eps_r=0.5)
        with pytest.raises(MaterialError):
            Material("bad", sigma=-1.0)
        with pytest.raises(MaterialError):
            Material("bad", scatter_s=1.5)
