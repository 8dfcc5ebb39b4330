"""Material library with frequency-dependent electromagnetic parameters.

Interaction amplitude models live here: half-space Fresnel reflection,
single-slab transmission (internal multiples summed in closed form) and a
directive-lobe diffuse scattering amplitude.

Sign conventions: time dependence exp(+j w t), waves exp(-j k r), so lossy
media have complex permittivity eps' - j eps'' and the principal square
root (Re >= 0, Im <= 0) gives decaying propagation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
from scipy.integrate import quad

VACUUM_PERMITTIVITY = 8.8541878128e-12


class MaterialError(ValueError):
    """Invalid material definition or library file."""


@dataclass(frozen=True)
class Material:
    """Electromagnetic description of one surface type.

    eps_r and sigma may be scalars or per-frequency tables
    [(f_hz, value), ...] with strictly increasing frequencies; tables are
    interpolated log-linearly in frequency and clamped outside their range.
    """

    name: str
    eps_r: float | tuple[tuple[float, float], ...] = 1.0
    sigma: float | tuple[tuple[float, float], ...] = 0.0
    thickness: float = 0.1
    scatter_s: float = 0.0
    lobe_alpha: int = 4

    def __post_init__(self):
        for label, val, lo in (("eps_r", self.eps_r, 1.0), ("sigma", self.sigma, 0.0)):
            if isinstance(val, tuple):
                freqs = [f for f, _ in val]
                if any(b <= a for a, b in zip(freqs, freqs[1:])):
                    raise MaterialError(f"{self.name}: {label} table frequencies must be strictly increasing")
                if any(v < lo for _, v in val):
                    raise MaterialError(f"{self.name}: {label} values must be >= {lo}")
            elif val < lo:
                raise MaterialError(f"{self.name}: {label} must be >= {lo}")
        if self.thickness <= 0:
            raise MaterialError(f"{self.name}: thickness must be > 0")
        if not 0.0 <= self.scatter_s <= 1.0:
            raise MaterialError(f"{self.name}: scatter_s must be in [0, 1]")
        if self.lobe_alpha < 1 or int(self.lobe_alpha) != self.lobe_alpha:
            raise MaterialError(f"{self.name}: lobe_alpha must be a positive integer")

    def eps_r_at(self, f: float) -> float:
        return _eval_table(self.eps_r, f)

    def sigma_at(self, f: float) -> float:
        return _eval_table(self.sigma, f)


def _eval_table(value, f: float) -> float:
    if not isinstance(value, tuple):
        return float(value)
    freqs = np.array([p[0] for p in value])
    vals = np.array([p[1] for p in value])
    if f <= freqs[0]:
        return float(vals[0])
    if f >= freqs[-1]:
        return float(vals[-1])
    return float(np.interp(np.log(f), np.log(freqs), vals))


@dataclass
class MaterialLibrary:
    """Dense id -> Material map with unique names."""

    materials: list[Material] = field(default_factory=list)

    def __post_init__(self):
        names = [m.name for m in self.materials]
        if len(set(names)) != len(names):
            raise MaterialError("material names must be unique")

    def __len__(self) -> int:
        return len(self.materials)

    def __getitem__(self, material_id: int) -> Material:
        return self.materials[material_id]

    def id_of(self, name: str) -> int:
        for i, m in enumerate(self.materials):
            if m.name == name:
                return i
        raise KeyError(name)

    def replace(self, material_id: int, material: Material) -> "MaterialLibrary":
        mats = list(self.materials)
        mats[material_id] = material
        return MaterialLibrary(mats)


def load_material_library(path: str | Path) -> MaterialLibrary:
    """Load a material library JSON file (see the repo schema in README)."""
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise MaterialError(f"malformed material library file: {e}") from e
    if not isinstance(doc, dict) or "materials" not in doc:
        raise MaterialError("material library file must contain a 'materials' list")
    mats = []
    for entry in doc["materials"]:
        eps = entry.get("eps_r", entry.get("eps_r_table"))
        sig = entry.get("sigma", entry.get("sigma_table", 0.0))
        if isinstance(eps, list):
            eps = tuple((float(f), float(v)) for f, v in eps)
        if isinstance(sig, list):
            sig = tuple((float(f), float(v)) for f, v in sig)
        mats.append(Material(
            name=entry["name"],
            eps_r=eps,
            sigma=sig,
            thickness=float(entry.get("thickness_m", 0.1)),
            scatter_s=float(entry.get("scatter_s", 0.0)),
            lobe_alpha=int(entry.get("lobe_alpha", 4)),
        ))
    return MaterialLibrary(mats)


def default_library() -> MaterialLibrary:
    """Library shipped with the package (repo data, the calibration targets)."""
    with resources.files("raytwin.data").joinpath("materials.json").open() as fh:
        doc = json.load(fh)
    mats = [Material(
        name=e["name"], eps_r=e["eps_r"], sigma=e["sigma"],
        thickness=e["thickness_m"], scatter_s=e["scatter_s"], lobe_alpha=e["lobe_alpha"],
    ) for e in doc["materials"]]
    return MaterialLibrary(mats)


def complex_permittivity(m: Material, f: float) -> complex:
    """Relative permittivity eps_r(f) - j sigma(f) / (2 pi f eps0)."""
    if f <= 0:
        raise ValueError("frequency must be positive")
    return m.eps_r_at(f) - 1j * m.sigma_at(f) / (2.0 * np.pi * f * VACUUM_PERMITTIVITY)


def _slab_root(eps: complex, cos_i: float) -> complex:
    """sqrt(eps - sin^2(theta_i)), principal branch (Re>=0, Im<=0)."""
    sin2 = 1.0 - cos_i * cos_i
    return np.sqrt(eps - sin2 + 0j)


def fresnel_coefficients(m: Material, cos_incidence: float, f: float) -> tuple[complex, complex]:
    """Half-space Fresnel reflection coefficients (r_perp, r_par).

    cos_incidence is the cosine of the angle from the surface normal.
    Sign convention: at normal incidence on lossless eps_r=4, r_perp = -1/3
    and r_par = +1/3.
    """
    eps = complex_permittivity(m, f)
    q = _slab_root(eps, cos_incidence)
    # vacuum half-space at grazing is a 0/0 whose physical limit is r = 0
    den_perp = cos_incidence + q
    den_par = eps * cos_incidence + q
    r_perp = (cos_incidence - q) / den_perp if den_perp != 0 else 0j
    r_par = (eps * cos_incidence - q) / den_par if den_par != 0 else 0j
    return complex(r_perp), complex(r_par)


def slab_transmission(m: Material, cos_incidence: float, f: float) -> tuple[complex, complex]:
    """Field transmission through a homogeneous slab of m.thickness in air.

    Two-interface response with internal multiple reflections summed in
    closed form; straight-through geometry (no lateral offset). The in-slab
    propagation phase is included, so a vacuum slab returns
    exp(-j k0 d cos(theta_i)).
    """
    eps = complex_permittivity(m, f)
    q = _slab_root(eps, cos_incidence)
    k0 = 2.0 * np.pi * f / 299_792_458.0
    phase = np.exp(-1j * k0 * m.thickness * q)
    out = []
    for r in fresnel_coefficients(m, cos_incidence, f):
        out.append(complex((1.0 - r * r) * phase / (1.0 - r * r * phase * phase)))
    return out[0], out[1]


_lobe_norm_cache: dict[int, float] = {}


def _lobe_normalization(alpha: int) -> float:
    """1/sqrt of the hemisphere integral of ((1+cos psi)/2)^alpha.

    Computed by quadrature with the specular direction at the surface
    normal; one constant per alpha.
    """
    if alpha not in _lobe_norm_cache:
        integral = 2.0 * np.pi * quad(
            lambda t: ((1.0 + np.cos(t)) / 2.0) ** alpha * np.sin(t), 0.0, np.pi / 2.0
        )[0]
        _lobe_norm_cache[alpha] = 1.0 / np.sqrt(integral)
    return _lobe_norm_cache[alpha]


def scattering_amplitude(m: Material, incident_dir: np.ndarray, scattered_dir: np.ndarray,
                         normal: np.ndarray) -> float:
    """Directive-lobe diffuse scattering amplitude factor.

    amplitude = scatter_s * K(alpha) * ((1 + cos psi)/2)^(alpha/2), psi the
    angle between scattered_dir and the specular direction of incident_dir.
    K(alpha) makes the hemisphere integral of amplitude^2 equal scatter_s^2
    when the specular direction is along the normal.
    """
    if m.scatter_s == 0.0:
        return 0.0
    spec = incident_dir - 2.0 * np.dot(incident_dir, normal) * normal
    cos_psi = float(np.clip(np.dot(spec, scattered_dir), -1.0, 1.0))
    lobe = ((1.0 + cos_psi) / 2.0) ** (m.lobe_alpha / 2.0)
    return m.scatter_s * _lobe_normalization(m.lobe_alpha) * lobe
