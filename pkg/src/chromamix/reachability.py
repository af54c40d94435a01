"""Brute-force reachability analysis over free mixing weights.

For a target color and a dynamics model, ``min_tolerance`` finds the
achievable color closest to the target (Euclidean distance over a simplex
grid of weight triples, optionally polished by Nelder-Mead) and reports the
per-channel tolerance required to count that color as reached, i.e. the
max-channel deviation at the closest achievable point.

``minmax_tolerance`` instead minimizes the max-channel deviation directly;
for the linear model that quantity has an exact linear-programming solution
(``lerp_minmax_exact``) used as an independent oracle, and the closest-point
stage has an exact triangle-projection oracle (``lerp_closest_exact``).
Both searches are embarrassingly parallel over the grid and vectorized here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog, minimize

from .color import BASE_INKS, as_rgb
from .mixing import DYNAMICS_MODELS, predict_from_weights

_grid_cache: dict = {}


def simplex_grid(resolution: float) -> np.ndarray:
    """All weight triples (w1, w2, 1-w1-w2) on a grid with the given step."""
    if not 0.0 < resolution <= 0.1:
        raise ValueError("resolution must be in (0, 0.1]")
    n = int(round(1.0 / resolution))
    key = ("grid", n)
    if key not in _grid_cache:
        i, j = np.meshgrid(np.arange(n + 1), np.arange(n + 1), indexing="ij")
        keep = (i + j) <= n
        w = np.stack([i[keep] / n, j[keep] / n], axis=1)
        _grid_cache[key] = np.concatenate([w, 1.0 - w.sum(axis=1, keepdims=True)], axis=1)
    return _grid_cache[key]


def _grid_colors(model: str, resolution: float) -> tuple[np.ndarray, np.ndarray]:
    n = int(round(1.0 / resolution))
    key = (model, n)
    if key not in _grid_cache:
        weights = simplex_grid(resolution)
        _grid_cache[key] = (weights, predict_from_weights(model, weights))
    return _grid_cache[key]


@dataclass
class ReachabilityEntry:
    target: np.ndarray
    model: str
    tau_min: float
    weights: np.ndarray     # argmin weight triple (sums to 1)
    color: np.ndarray       # achievable color realizing tau_min
    label: str = ""

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "target": [float(x) for x in self.target],
            "model": self.model,
            "tau_min": self.tau_min,
            "weights": [float(w) for w in self.weights],
            "color": [float(c) for c in self.color],
        }


def _refine(model: str, target: np.ndarray, w0: np.ndarray, objective) -> np.ndarray:
    """One Nelder-Mead pass over (w1, w2) around a grid argmin."""

    def f(x):
        w = np.array([x[0], x[1], 1.0 - x[0] - x[1]])
        if np.any(w < -1e-12):
            return 1e9
        return objective(predict_from_weights(model, np.clip(w, 0.0, 1.0)))

    res = minimize(f, w0[:2], method="Nelder-Mead",
                   options={"xatol": 1e-9, "fatol": 1e-12, "maxiter": 400})
    w = np.array([res.x[0], res.x[1], 1.0 - res.x[0] - res.x[1]])
    if np.any(w < 0.0):
        return w0
    return w if f(res.x) <= objective(predict_from_weights(model, w0)) else w0


def min_tolerance(model: str, target, resolution: float = 0.001,
                  refine: bool = True) -> ReachabilityEntry:
    """Tolerance needed to reach the closest achievable color to `target`.

    Stage 1 finds the achievable color minimizing the Euclidean distance to
    the target; stage 2 reports the max per-channel deviation of that color
    (the smallest tolerance for which it counts as reached).
    """
    target = as_rgb(target)
    weights, colors = _grid_colors(model, resolution)
    idx = int(np.linalg.norm(colors - target, axis=1).argmin())
    w = weights[idx]
    if refine:
        w = _refine(model, target, w, lambda c: float(np.linalg.norm(c - target)))
    color = predict_from_weights(model, w)
    return ReachabilityEntry(target=target, model=model,
                             tau_min=float(np.abs(color - target).max()),
                             weights=w, color=color)


def minmax_tolerance(model: str, target, resolution: float = 0.001,
                     refine: bool = True) -> ReachabilityEntry:
    """Smallest achievable max-channel deviation from `target` (direct search)."""
    target = as_rgb(target)
    weights, colors = _grid_colors(model, resolution)
    idx = int(np.abs(colors - target).max(axis=1).argmin())
    w = weights[idx]
    if refine:
        w = _refine(model, target, w, lambda c: float(np.abs(c - target).max()))
    color = predict_from_weights(model, w)
    return ReachabilityEntry(target=target, model=model,
                             tau_min=float(np.abs(color - target).max()),
                             weights=w, color=color)


def lerp_minmax_exact(target) -> tuple[float, np.ndarray]:
    """Exact linear min-max oracle for the linear model.

    minimize t  s.t.  |sum_i w_i ink_i,k - target_k| <= t for all channels,
    w on the simplex. Variables (w1, w2, w3, t).
    """
    target = as_rgb(target)
    m = BASE_INKS.T  # channels x inks
    a_ub, b_ub = [], []
    for k in range(3):
        a_ub.append(list(m[k]) + [-1.0])
        b_ub.append(target[k])
        a_ub.append(list(-m[k]) + [-1.0])
        b_ub.append(-target[k])
    res = linprog([0.0, 0.0, 0.0, 1.0], A_ub=a_ub, b_ub=b_ub,
                  A_eq=[[1.0, 1.0, 1.0, 0.0]], b_eq=[1.0],
                  bounds=[(0, 1)] * 3 + [(0, None)], method="highs")
    if not res.success:
        raise RuntimeError(f"min-max LP failed: {res.message}")
    return float(res.fun), res.x[:3]


def lerp_closest_exact(target) -> tuple[np.ndarray, np.ndarray]:
    """Exact Euclidean projection of `target` onto the ink triangle.

    Returns (closest color, weights). Solves the constrained least-squares
    problem by checking the unconstrained plane projection and falling back
    to edge/vertex projections.
    """
    target = as_rgb(target)
    v0, v1, v2 = BASE_INKS

    candidates: list[np.ndarray] = []
    # face: x = v0 + s (v1-v0) + t (v2-v0), solve normal equations
    e1, e2 = v1 - v0, v2 - v0
    a = np.array([[e1 @ e1, e1 @ e2], [e1 @ e2, e2 @ e2]])
    b = np.array([e1 @ (target - v0), e2 @ (target - v0)])
    s, t = np.linalg.solve(a, b)
    if s >= 0 and t >= 0 and s + t <= 1:
        candidates.append(np.array([1.0 - s - t, s, t]))
    # edges: clamp the segment projection parameter
    for i, j in ((0, 1), (0, 2), (1, 2)):
        p, q = BASE_INKS[i], BASE_INKS[j]
        u = q - p
        alpha = float(np.clip((target - p) @ u / (u @ u), 0.0, 1.0))
        w = np.zeros(3)
        w[i], w[j] = 1.0 - alpha, alpha
        candidates.append(w)
    best = min(candidates,
               key=lambda w: float(np.linalg.norm(w @ BASE_INKS - target)))
    return best @ BASE_INKS, best


def reachability_table(models=DYNAMICS_MODELS, targets=None,
                       resolution: float = 0.001,
                       refine: bool = True) -> list[ReachabilityEntry]:
    """min_tolerance over the cross product of targets and models."""
    from .metrics import EVAL_TARGETS

    if targets is None:
        targets = EVAL_TARGETS
    entries = []
    for label, target in targets.items():
        for model in models:
            entry = min_tolerance(model, target, resolution=resolution, refine=refine)
            entry.label = label
            entries.append(entry)
    return entries
