"""Engine configuration: ray budget, interaction bounds, capture rule."""

from __future__ import annotations

from dataclasses import dataclass, replace


class ConfigError(ValueError):
    """Inconsistent engine configuration."""


@dataclass(frozen=True)
class EngineConfig:
    n_rays: int = 16384
    max_order: int = 3                 # total interaction bound per path
    max_reflections: int = 3
    max_transmissions: int = 1
    max_diffractions: int = 1          # 0 or 1
    max_scatterings: int = 0           # 0 or 1
    rel_power_floor_db: float = -25.0  # relative to the strongest path
    rx_sphere_scale: float = 1.0
    seed: int = 0
    scatter_tile_m: float = 1.0
    im_supplement: bool = False        # union image-method paths on eligible scenes

    def __post_init__(self):
        if self.n_rays < 1:
            raise ConfigError("n_rays must be >= 1")
        if self.max_order < 0:
            raise ConfigError("max_order must be >= 0")
        for name in ("max_reflections", "max_transmissions"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0")
            if getattr(self, name) > self.max_order:
                raise ConfigError(f"{name} cannot exceed max_order")
        if self.max_diffractions not in (0, 1):
            raise ConfigError("max_diffractions must be 0 or 1")
        if self.max_scatterings not in (0, 1):
            raise ConfigError("max_scatterings must be 0 or 1")
        if self.rel_power_floor_db >= 0:
            raise ConfigError("rel_power_floor_db must be negative")
        if self.rx_sphere_scale <= 0:
            raise ConfigError("rx_sphere_scale must be positive")
        if self.scatter_tile_m <= 0:
            raise ConfigError("scatter_tile_m must be positive")

    def with_overrides(self, **kwargs) -> "EngineConfig":
        return replace(self, **kwargs)
