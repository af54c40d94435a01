"""Color arithmetic for the ink-mixing task: RGB distance, the per-channel
success test, and the RGB <-> reflectance bridge used by the subtractive
mixing models.

Colors are float vectors in [0, 255]^3 (channels stay continuous; predicted
and noisy colors are fractional, quantization happens only at display time).
"""

from __future__ import annotations

import numpy as np

# Measured base-ink colors (cyan, magenta, yellow), one row per ink.
CYAN = np.array([42.0, 57.0, 101.0])
MAGENTA = np.array([101.0, 54.0, 71.0])
YELLOW = np.array([184.0, 181.0, 97.0])
BASE_INKS = np.stack([CYAN, MAGENTA, YELLOW])
BASE_INKS.setflags(write=False)
INK_NAMES = ("cyan", "magenta", "yellow")

# Largest possible RGB distance (black to white).
D_MAX = np.sqrt(3.0) * 255.0

# Reflectance floor: a zero band would annihilate the geometric mean and is
# physically implausible for inks, so bands live in [1/255, 1].
REFLECTANCE_FLOOR = 1.0 / 255.0


def as_rgb(c) -> np.ndarray:
    """Validate and return a color as a float array of shape (3,)."""
    c = np.asarray(c, dtype=float)
    if c.shape != (3,):
        raise ValueError(f"expected 3 channels, got shape {c.shape}")
    if np.any(c < 0.0) or np.any(c > 255.0):
        raise ValueError(f"channels out of [0, 255]: {c}")
    return c


def rgb_distance(a, b) -> float:
    """Euclidean distance between two RGB colors."""
    return float(np.linalg.norm(as_rgb(a) - as_rgb(b)))


def within_tolerance(current, target, tol: float) -> bool:
    """True iff every channel of `current` is within `tol` of `target`."""
    if tol < 0:
        raise ValueError("tolerance must be >= 0")
    return bool(np.all(np.abs(as_rgb(current) - as_rgb(target)) <= tol))


def to_reflectance(c) -> np.ndarray:
    """Map an RGB color to 3-band reflectance: channel/255, floored.

    R, G and B are treated as wide spectral bands; this is the only band
    mapping shipped, but the mixing code accepts any band count.
    """
    return np.maximum(as_rgb(c) / 255.0, REFLECTANCE_FLOOR)


def from_reflectance(s) -> np.ndarray:
    """Map per-band reflectance back to RGB, clamped to [0, 255]."""
    s = np.asarray(s, dtype=float)
    return np.clip(s * 255.0, 0.0, 255.0)
