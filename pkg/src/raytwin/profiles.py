"""Task profiles: named engine presets for offline and online twin work.

Offline favors completeness (dense rays, order 4, image-method cross-check
on eligible scenes); online favors latency (fewer rays, order 3, higher
power floor, no diffuse scattering).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .rt.config import ConfigError, EngineConfig


class ProfileError(ValueError):
    """Unknown profile name or invalid override."""


@dataclass(frozen=True)
class TaskProfile:
    name: str
    engine: EngineConfig
    grid_step_default: float
    latency_budget_hint: float        # seconds per link


_OFFLINE = TaskProfile(
    name="offline",
    engine=EngineConfig(
        n_rays=2 ** 20, max_order=4, max_reflections=4, max_transmissions=2,
        max_diffractions=1, max_scatterings=1, rel_power_floor_db=-40.0,
        rx_sphere_scale=1.0, seed=0, im_supplement=True),
    grid_step_default=1.0,
    latency_budget_hint=10.0,
)

_ONLINE = TaskProfile(
    name="online",
    engine=EngineConfig(
        n_rays=2 ** 14, max_order=3, max_reflections=3, max_transmissions=1,
        max_diffractions=1, max_scatterings=0, rel_power_floor_db=-25.0,
        rx_sphere_scale=1.0, seed=0, im_supplement=False),
    grid_step_default=2.0,
    latency_budget_hint=0.1,
)

_MAX_ORDER = {"offline": 4, "online": 3}


def builtin(name: str) -> TaskProfile:
    if name == "offline":
        return _OFFLINE
    if name == "online":
        return _ONLINE
    raise ProfileError(f"unknown profile {name!r}; valid names: offline, online, custom")


def resolve(profile, overrides: dict | None = None) -> EngineConfig:
    """EngineConfig for a profile name / TaskProfile / EngineConfig, with
    field-wise overrides. Named presets keep their interaction-order
    contract; use 'custom' to escape it."""
    overrides = dict(overrides or {})
    if isinstance(profile, EngineConfig):
        base = profile
        name = "custom"
    elif isinstance(profile, TaskProfile):
        base = profile.engine
        name = profile.name
    elif isinstance(profile, str):
        if profile == "custom":
            base = EngineConfig()
            name = "custom"
        else:
            base = builtin(profile).engine
            name = profile
    else:
        raise ProfileError(f"cannot resolve profile from {type(profile).__name__}")
    try:
        cfg = replace(base, **overrides) if overrides else base
    except (TypeError, ConfigError) as e:
        raise ProfileError(str(e)) from e
    if name in _MAX_ORDER and cfg.max_order != _MAX_ORDER[name]:
        raise ProfileError(
            f"profile {name!r} fixes max_order={_MAX_ORDER[name]}; "
            f"use profile 'custom' for max_order={cfg.max_order}")
    return cfg
