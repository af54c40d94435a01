"""Training-curve metrics and the cross-dynamics transfer protocol.

Curve metrics summarize an episode-reward-mean curve: final performance
(tail mean), steps to a reward threshold, tail coefficient of variation, and
forgetting events (window-to-window drops). A weighted composite score ranks
configurations across a comparison set.

The transfer evaluator replays a trained policy greedily in an environment
whose dynamics model differs from training (the stand-in for deploying on a
real system), with observation noise active, and aggregates final distance,
steps and success per target.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .color import as_rgb, rgb_distance, within_tolerance
from .env import ColorMixEnv, EnvConfig
from .ppo import PolicyParams, act

# Reward threshold used for the sample-efficiency metric.
DEFAULT_THRESHOLD = 7.5

# Step width for the forgetting-event windows.
FORGETTING_WINDOW = 5000

# Composite-score weights: (final performance, tail CV, steps-to-threshold,
# forgetting count).
CS_WEIGHTS = {"fp": 0.4, "cv": 0.3, "t75": 0.2, "nm": 0.1}

# Reference evaluation targets (diverse chromatic regions).
EVAL_TARGETS = {
    "C1": (128.0, 91.0, 67.0),
    "C2": (42.0, 76.0, 66.0),
    "C3": (39.0, 52.0, 56.0),
    "C4": (67.0, 64.0, 75.0),
}

# Control blends for transfer studies: yellow-dominant mixes (yellow weight
# >= 0.7) spanning the cyan side, the magenta side, and the interior. A
# goal-marginalized policy drifts from its start ink toward the gamut
# center, so it never forms bright yellow-heavy compositions; these are the
# targets where success certifies goal-directed behavior. The dark
# cyan-magenta corner is already covered by the reference targets above.
CONTROL_BLENDS = {
    "W1": (0.1, 0.0, 0.9),
    "W2": (0.3, 0.0, 0.7),
    "W3": (0.0, 0.3, 0.7),
    "W4": (0.2, 0.1, 0.7),
}


def control_targets(model: str) -> dict[str, np.ndarray]:
    """Targets reachable by construction under `model` (the control blends
    pushed through that dynamics model)."""
    from .mixing import predict_from_weights

    return {label: predict_from_weights(model, np.asarray(w))
            for label, w in CONTROL_BLENDS.items()}


def _steps_values(curve):
    curve = list(curve)
    if not curve:
        raise ValueError("empty curve")
    steps = np.array([s for s, _ in curve], dtype=float)
    vals = np.array([v for _, v in curve], dtype=float)
    if np.any(np.diff(steps) <= 0):
        raise ValueError("curve steps must be strictly increasing")
    return steps, vals


def final_performance(curve) -> float:
    """Mean curve value over the last 10% of training steps."""
    steps, vals = _steps_values(curve)
    tail = vals[steps > 0.9 * steps[-1]]
    return float(tail.mean())


def time_to_threshold(curve, threshold: float = DEFAULT_THRESHOLD) -> Optional[int]:
    """First step at which the curve reaches `threshold`; None if never."""
    steps, vals = _steps_values(curve)
    hits = np.nonzero(vals >= threshold)[0]
    return int(steps[hits[0]]) if len(hits) else None


def coefficient_of_variation(curve) -> float:
    """std/|mean| over the last 20% of steps; warns when the mean is negative."""
    steps, vals = _steps_values(curve)
    tail = vals[steps > 0.8 * steps[-1]]
    mean = tail.mean()
    if mean == 0.0:
        raise ValueError("undefined CV: tail mean is zero")
    if mean < 0.0:
        warnings.warn("tail mean is negative; CV computed on |mean|", RuntimeWarning)
    return float(tail.std() / abs(mean))


def forgetting_events(curve, window: int = FORGETTING_WINDOW) -> int:
    """Number of >5% drops between consecutive fixed-width step windows.

    Windows with a non-positive previous mean are skipped (a percentage drop
    is undefined there). Requires the curve to span at least two windows.
    """
    steps, vals = _steps_values(curve)
    n_windows = int(steps[-1] // window) + (1 if steps[-1] % window else 0)
    if n_windows < 2:
        raise ValueError("curve too short: needs at least two windows")
    bins = np.minimum(((steps - 1) // window).astype(int), n_windows - 1)
    means = [vals[bins == b].mean() if np.any(bins == b) else np.nan
             for b in range(n_windows)]
    events = 0
    prev = None
    for m in means:
        if np.isnan(m):
            continue
        if prev is not None and prev > 0 and m < 0.95 * prev:
            events += 1
        prev = m
    return events


@dataclass
class CurveMetrics:
    fp: float
    t75: Optional[int]
    cv: float
    nm: int

    def to_dict(self) -> dict:
        return {"fp": self.fp, "t75": self.t75, "cv": self.cv, "nm": self.nm}


def curve_metrics(curve, threshold: float = DEFAULT_THRESHOLD) -> CurveMetrics:
    return CurveMetrics(
        fp=final_performance(curve),
        t75=time_to_threshold(curve, threshold),
        cv=coefficient_of_variation(curve),
        nm=forgetting_events(curve),
    )


def _minmax(values: np.ndarray, higher_better: bool) -> np.ndarray:
    lo, hi = values.min(), values.max()
    if hi == lo:
        # No spread: the metric cannot differentiate the set; score everyone
        # equally (constant offset, ranking-neutral).
        return np.ones_like(values)
    norm = (values - lo) / (hi - lo)
    return norm if higher_better else 1.0 - norm


def composite_score(metrics: Sequence[CurveMetrics], total_steps: int) -> list[float]:
    """Weighted composite in [0, 1] across a comparison set (min-max per
    metric; FP higher-better, the rest lower-better). An unreached threshold
    is imputed as `total_steps`."""
    if len(metrics) < 2:
        raise ValueError("normalization undefined for fewer than 2 configs")
    fp = _minmax(np.array([m.fp for m in metrics]), higher_better=True)
    cv = _minmax(np.array([m.cv for m in metrics]), higher_better=False)
    t75 = _minmax(np.array([float(total_steps if m.t75 is None else m.t75)
                            for m in metrics]), higher_better=False)
    nm = _minmax(np.array([float(m.nm) for m in metrics]), higher_better=False)
    cs = (CS_WEIGHTS["fp"] * fp + CS_WEIGHTS["cv"] * cv
          + CS_WEIGHTS["t75"] * t75 + CS_WEIGHTS["nm"] * nm)
    return [float(x) for x in cs]


@dataclass
class TargetStats:
    distance_mean: float
    distance_std: float
    steps_mean: float
    success_rate: float
    episodes: int


@dataclass
class TransferReport:
    train_dynamics: str
    eval_dynamics: str
    horizon: int
    tolerance: float
    reps: int
    per_target: dict[str, TargetStats] = field(default_factory=dict)

    @property
    def overall(self) -> Optional[TargetStats]:
        if not self.per_target:
            return None
        stats = list(self.per_target.values())
        n = sum(s.episodes for s in stats)
        return TargetStats(
            distance_mean=float(np.mean([s.distance_mean for s in stats])),
            distance_std=float(np.std([s.distance_mean for s in stats])),
            steps_mean=float(np.mean([s.steps_mean for s in stats])),
            success_rate=float(np.mean([s.success_rate for s in stats])),
            episodes=n,
        )

    def to_dict(self) -> dict:
        d = {
            "train_dynamics": self.train_dynamics,
            "eval_dynamics": self.eval_dynamics,
            "horizon": self.horizon,
            "tolerance": self.tolerance,
            "reps": self.reps,
            "targets": {
                k: {"d_mean": s.distance_mean, "d_std": s.distance_std,
                    "s_mean": s.steps_mean, "success": s.success_rate,
                    "episodes": s.episodes}
                for k, s in self.per_target.items()
            },
        }
        o = self.overall
        if o is not None:
            d["overall"] = {"d_mean": o.distance_mean, "d_std": o.distance_std,
                            "s_mean": o.steps_mean, "success": o.success_rate,
                            "episodes": o.episodes}
        return d


def run_episode(policy: PolicyParams, env: ColorMixEnv, target, greedy: bool = True,
                rng=None):
    """One episode; returns (final true color, steps, success)."""
    obs = env.reset(target=target)
    done = False
    color, steps, success = None, 0, False
    while not done:
        action, _, _ = act(policy, obs, rng=rng, greedy=greedy)
        step = env.step(action)
        obs, done = step.observation, step.done
        color = step.info["true_color"]
        steps = step.info["step_count"]
        success = step.info["success"]
    return color, steps, success


def evaluate_transfer(policy: PolicyParams, train_cfg: EnvConfig, eval_dynamics: str,
                      targets=None, reps: int = 4, horizon: int = 5,
                      tolerance: float = 7.5, seed: int = 0) -> TransferReport:
    """Greedy evaluation in an env identical to training except the dynamics
    model (and the deployment episode protocol: `horizon`, `tolerance`).

    Observation noise stays active; the adversarial wrapper is a training
    mechanism and is disabled here. Success is per the true predicted color.
    """
    if targets is None:
        targets = EVAL_TARGETS
    eval_cfg = train_cfg.with_(dynamics=eval_dynamics, horizon=horizon,
                               tolerance=tolerance, adv_enabled=False, seed=seed)
    if eval_cfg.observation_dim != policy.obs_dim:
        raise ValueError(
            f"policy expects observation length {policy.obs_dim}, "
            f"eval config produces {eval_cfg.observation_dim}")
    report = TransferReport(train_dynamics=train_cfg.dynamics,
                            eval_dynamics=eval_dynamics, horizon=horizon,
                            tolerance=tolerance, reps=reps)
    env = ColorMixEnv(eval_cfg)
    for label, target in targets.items():
        target = as_rgb(target)
        dists, steps_taken, successes = [], [], []
        for _ in range(max(0, reps)):
            color, steps, success = run_episode(policy, env, target)
            dists.append(rgb_distance(color, target))
            steps_taken.append(steps)
            successes.append(success)
            assert not success or within_tolerance(color, target, tolerance)
        if dists:
            report.per_target[label] = TargetStats(
                distance_mean=float(np.mean(dists)),
                distance_std=float(np.std(dists)),
                steps_mean=float(np.mean(steps_taken)),
                success_rate=float(np.mean(successes)),
                episodes=len(dists),
            )
    return report
