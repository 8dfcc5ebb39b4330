"""Channel twin derivations: path loss, spreads, band-limited CIR and the
similarity index between two multipath sets.

All power metrics work on linear path powers |a|^2 for unit transmit power;
"no coverage" is represented by None, never a sentinel number.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .rt.path import ChannelRealization


@dataclass(frozen=True)
class SimilarityGates:
    delay_gate: float = 10e-9       # seconds
    angle_gate: float = 10.0        # degrees, arrival azimuth

    def __post_init__(self):
        if self.delay_gate <= 0 or self.angle_gate <= 0:
            raise ValueError("gates must be positive")


@dataclass
class Cir:
    tap_spacing: float              # seconds
    taps: np.ndarray                # complex
    reference_delay: float          # delay of tap 0


def path_loss(r: ChannelRealization) -> float | None:
    """Narrowband path loss, dB: -20 log10 |sum a_i| (coherent sum, so
    two equal in-phase paths sit 6.02 dB above one alone). None when the
    realization is empty or fully cancelled."""
    if r.n_paths == 0:
        return None
    total = abs(sum(p.amplitude for p in r.paths)) ** 2
    if total <= 0.0:
        return None
    return float(-10.0 * np.log10(total))


def rsrp(r: ChannelRealization, tx_power_dbm: float) -> float | None:
    pl = path_loss(r)
    return None if pl is None else tx_power_dbm - pl


def rms_delay_spread(r: ChannelRealization) -> float:
    """Power-weighted RMS spread about the power-weighted mean delay."""
    if r.n_paths == 0:
        raise ValueError("delay spread of an empty realization")
    powers = np.array([abs(p.amplitude) ** 2 for p in r.paths])
    delays = np.array([p.delay for p in r.paths])
    w = powers / powers.sum()
    mean = float(np.dot(w, delays))
    return float(np.sqrt(np.dot(w, (delays - mean) ** 2)))


def angular_spread(r: ChannelRealization, side: str = "aoa") -> float:
    """Power-weighted circular azimuth spread, degrees.

    spread = (180/pi) * sqrt(2 * (1 - R)) with R the length of the
    power-weighted resultant of unit phasors at the path azimuths; matches
    the circular standard deviation for concentrated spreads and stays
    finite for antipodal power splits.
    """
    if r.n_paths == 0:
        raise ValueError("angular spread of an empty realization")
    if side not in ("aoa", "aod"):
        raise ValueError("side must be 'aoa' or 'aod'")
    az = np.radians([p.aoa[0] if side == "aoa" else p.aod[0] for p in r.paths])
    powers = np.array([abs(p.amplitude) ** 2 for p in r.paths])
    w = powers / powers.sum()
    resultant = abs(np.dot(w, np.exp(1j * az)))
    return float(np.degrees(np.sqrt(2.0 * max(0.0, 1.0 - resultant))))


def synthesize_cir(r: ChannelRealization, bandwidth: float, guard_taps: int = 64) -> Cir:
    """Band-limited CIR: taps at 1/bandwidth spacing, sinc interpolation of
    each path; the guard window keeps total tap energy within 1% of the path
    power sum."""
    if bandwidth <= 0:
        raise ValueError("bandwidth must be positive")
    if r.n_paths == 0:
        return Cir(tap_spacing=1.0 / bandwidth, taps=np.zeros(0, dtype=complex),
                   reference_delay=0.0)
    spacing = 1.0 / bandwidth
    delays = np.array([p.delay for p in r.paths])
    amps = np.array([p.amplitude for p in r.paths])
    first = int(np.floor(delays.min() / spacing)) - guard_taps
    last = int(np.ceil(delays.max() / spacing)) + guard_taps
    k = np.arange(first, last + 1)
    t = k * spacing
    taps = (amps[None, :] * np.sinc((t[:, None] - delays[None, :]) * bandwidth)).sum(axis=1)
    return Cir(tap_spacing=spacing, taps=taps, reference_delay=first * spacing)


def _mpc_tuples(obj) -> list[tuple[float, float, float]]:
    """(delay_s, power_linear, aoa_az_deg) items from a realization or an
    MPC JSON document."""
    if isinstance(obj, ChannelRealization):
        return [(p.delay, abs(p.amplitude) ** 2, p.aoa[0]) for p in obj.paths]
    return [(m["delay_s"], 10.0 ** (m["power_db"] / 10.0), m["aoa_az_deg"])
            for m in obj["mpcs"]]


def similarity_index(a, b, gates: SimilarityGates = SimilarityGates()) -> float:
    """Gated greedy matching score in percent.

    Paths are paired power-descending when both delay and arrival-azimuth
    gates hold; SI = 100 * sum(min(Pa, Pb)) / max(sum Pa, sum Pb). Symmetric,
    100 for identical sets, 0 when nothing pairs.
    """
    ta = sorted(_mpc_tuples(a), key=lambda x: -x[1])
    tb = sorted(_mpc_tuples(b), key=lambda x: -x[1])
    total_a = sum(p for _, p, _ in ta)
    total_b = sum(p for _, p, _ in tb)
    if total_a <= 0.0 and total_b <= 0.0:
        return 100.0
    if total_a <= 0.0 or total_b <= 0.0:
        return 0.0
    used = [False] * len(tb)
    matched = 0.0
    for delay_a, p_a, az_a in ta:
        for j, (delay_b, p_b, az_b) in enumerate(tb):
            if used[j]:
                continue
            if abs(delay_a - delay_b) > gates.delay_gate:
                continue
            dang = abs((az_a - az_b + 180.0) % 360.0 - 180.0)
            if dang > gates.angle_gate:
                continue
            used[j] = True
            matched += min(p_a, p_b)
            break
    return float(100.0 * matched / max(total_a, total_b))
