"""The three color-prediction models behind one interface.

A mixture is a list of (ink_index, volume_ul) components; components of the
same ink are merged before weighting, so a sequence of incremental additions
predicts exactly like a one-shot mixture with the same composition. All three
models are memoryless functions of the volume-weighted composition:

* ``lerp`` -- volume-weighted arithmetic mean of the ink RGB vectors.
* ``km``   -- single-constant Kubelka-Munk: per band, absorption/scattering
  ratios k = (1-R)^2 / (2R) mix additively and the mixed k is inverted back
  to reflectance via R = 1 + k - sqrt(k^2 + 2k).
* ``wgm``  -- weighted geometric mean of reflectance bands with volume
  fractions as exponents.

The ``*_from_weights`` variants are vectorized over arrays of weight triples
(used by the reachability search); the ``mix_*`` functions take component
lists (used by the environment).
"""

from __future__ import annotations

import numpy as np

from .color import BASE_INKS, from_reflectance, to_reflectance

DYNAMICS_MODELS = ("lerp", "km", "wgm")

_INK_REFLECTANCE = to_reflectance(BASE_INKS[0]), to_reflectance(BASE_INKS[1]), to_reflectance(BASE_INKS[2])
_REFLECTANCE = np.stack(_INK_REFLECTANCE)
_LOG_REFLECTANCE = np.log(_REFLECTANCE)


def absorption_ratio(reflectance):
    """Kubelka-Munk k = K/S from reflectance, per band."""
    r = np.asarray(reflectance, dtype=float)
    return (1.0 - r) ** 2 / (2.0 * r)


def reflectance_from_absorption(k):
    """Invert the K/S map: R = 1 + k - sqrt(k^2 + 2k)."""
    k = np.asarray(k, dtype=float)
    return 1.0 + k - np.sqrt(k * k + 2.0 * k)


_INK_ABSORPTION = absorption_ratio(_REFLECTANCE)


def merge_components(components):
    """Sum volumes per ink; returns (ink_indices, volumes) sorted by ink."""
    if len(components) == 0:
        raise ValueError("empty mixture")
    totals: dict[int, float] = {}
    for ink, vol in components:
        ink = int(ink)
        if ink not in (0, 1, 2):
            raise ValueError(f"ink index out of range: {ink}")
        if vol <= 0:
            raise ValueError(f"component volume must be > 0, got {vol}")
        totals[ink] = totals.get(ink, 0.0) + float(vol)
    inks = sorted(totals)
    return np.array(inks, dtype=int), np.array([totals[i] for i in inks])


def mix_weights(components) -> np.ndarray:
    """Volume fractions of the distinct inks present, sorted by ink index."""
    _, volumes = merge_components(components)
    return volumes / volumes.sum()


def _full_weights(components) -> np.ndarray:
    """Weights padded to all three inks (zero weight is inert in every model)."""
    inks, volumes = merge_components(components)
    w = np.zeros(3)
    w[inks] = volumes / volumes.sum()
    return w


def lerp_from_weights(weights) -> np.ndarray:
    """Linear interpolation of ink colors; weights shape (..., 3)."""
    return np.asarray(weights, dtype=float) @ BASE_INKS


def wgm_from_weights(weights) -> np.ndarray:
    """Weighted geometric mean of ink reflectances, back to RGB."""
    s = np.exp(np.asarray(weights, dtype=float) @ _LOG_REFLECTANCE)
    return from_reflectance(s)


def km_from_weights(weights) -> np.ndarray:
    """Additive K/S mixing of ink absorptions, back to RGB."""
    k = np.asarray(weights, dtype=float) @ _INK_ABSORPTION
    return from_reflectance(reflectance_from_absorption(k))


_FROM_WEIGHTS = {"lerp": lerp_from_weights, "km": km_from_weights, "wgm": wgm_from_weights}


def mix_lerp(components) -> np.ndarray:
    return lerp_from_weights(_full_weights(components))


def mix_km(components) -> np.ndarray:
    return km_from_weights(_full_weights(components))


def mix_wgm(components) -> np.ndarray:
    return wgm_from_weights(_full_weights(components))


def predict(model: str, components) -> np.ndarray:
    """Predicted RGB color of a mixture under the named dynamics model."""
    return predict_from_weights(model, _full_weights(components))


def predict_from_weights(model: str, weights) -> np.ndarray:
    if model not in _FROM_WEIGHTS:
        raise ValueError(f"unknown dynamics model {model!r}; expected one of {DYNAMICS_MODELS}")
    return _FROM_WEIGHTS[model](weights)
