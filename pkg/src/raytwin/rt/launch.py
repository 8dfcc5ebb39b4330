"""Ray launch directions: deterministic Fibonacci sphere lattice."""

from __future__ import annotations

import numpy as np

GOLDEN_ANGLE = np.pi * (3.0 - np.sqrt(5.0))


def launch_directions(n: int) -> np.ndarray:
    """n near-uniform unit vectors on the sphere, deterministic in n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    i = np.arange(n, dtype=np.float64)
    z = 1.0 - (2.0 * i + 1.0) / n
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    phi = i * GOLDEN_ANGLE
    return np.ascontiguousarray(
        np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1))


def angular_separation(n: int) -> float:
    """Mean angular spacing of the lattice, used for the reception sphere."""
    return float(np.sqrt(4.0 * np.pi / n))
