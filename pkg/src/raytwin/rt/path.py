"""Propagation path and channel realization types plus their JSON wire form."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..antenna import AntennaPattern, ISOTROPIC
from ..geometry import SPEED_OF_LIGHT

MPC_SCHEMA_VERSION = 1

REFLECTION = "R"
TRANSMISSION = "T"
DIFFRACTION = "D"
SCATTERING = "S"

Signature = tuple[tuple[str, int], ...]


@dataclass(frozen=True)
class TerminalSpec:
    """One link endpoint: position plus its antenna."""

    position: np.ndarray
    pattern: AntennaPattern = ISOTROPIC

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=np.float64))


@dataclass
class Interaction:
    kind: str                 # R | T | D | S
    point: np.ndarray
    surface_id: int           # triangle id, or edge id for diffraction
    material_id: int


@dataclass
class PropagationPath:
    """One multipath component; empty interaction list means line of sight."""

    interactions: list[Interaction]
    path_length: float
    aod: tuple[float, float]            # (azimuth, elevation) degrees
    aoa: tuple[float, float]
    tx_point: np.ndarray | None = None
    rx_point: np.ndarray | None = None
    jones: np.ndarray | None = None     # 2x2 complex, antennas excluded
    spreading: float = 0.0              # 1/m amplitude spreading factor
    doppler: float = 0.0
    amplitude: complex = 0.0            # after antennas, unit tx power

    @property
    def delay(self) -> float:
        return self.path_length / SPEED_OF_LIGHT

    @property
    def signature(self) -> Signature:
        return tuple((i.kind, i.surface_id) for i in self.interactions)

    @property
    def power_db(self) -> float:
        p = abs(self.amplitude) ** 2
        return -np.inf if p == 0.0 else float(10.0 * np.log10(p))


@dataclass
class ChannelRealization:
    tx: TerminalSpec
    rx: TerminalSpec
    f: float
    paths: list[PropagationPath] = field(default_factory=list)
    time: float = 0.0
    compute_seconds: float = 0.0

    @property
    def n_paths(self) -> int:
        return len(self.paths)

    def total_power(self) -> float:
        return float(sum(abs(p.amplitude) ** 2 for p in self.paths))


def realization_to_dict(r: ChannelRealization) -> dict:
    mpcs = []
    for p in r.paths:
        mpcs.append({
            "delay_s": p.delay,
            "power_db": p.power_db,
            "phase_rad": float(np.angle(p.amplitude)),
            "aod_az_deg": p.aod[0], "aod_el_deg": p.aod[1],
            "aoa_az_deg": p.aoa[0], "aoa_el_deg": p.aoa[1],
            "doppler_hz": p.doppler,
            "signature": [[i.kind, int(i.surface_id)] for i in p.interactions],
        })
    return {
        "schema_version": MPC_SCHEMA_VERSION,
        "tx": r.tx.position.tolist(),
        "rx": r.rx.position.tolist(),
        "freq_hz": r.f,
        "time_s": r.time,
        "n_paths": r.n_paths,
        "mpcs": mpcs,
    }


def write_mpcs(r: ChannelRealization, path: str | Path) -> None:
    Path(path).write_text(json.dumps(realization_to_dict(r), indent=1))


def load_mpcs(path: str | Path) -> dict:
    doc = json.loads(Path(path).read_text())
    if not isinstance(doc, dict) or "mpcs" not in doc:
        raise ValueError(f"{path}: not an MPC file")
    return doc
