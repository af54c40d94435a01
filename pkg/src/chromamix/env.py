"""Episodic color-mixing MDP.

An episode starts from the base ink closest to the target (same fixed
volume), and each step adds one of the three inks in one of ten magnitudes:
30 discrete actions. The resulting color comes from the configured dynamics
model; the agent observes a noise/adversarially perturbed color while reward
and success are always computed on the true predicted color (perturbations
model sensing, not mixing).

State variants control the volume encoding (see ``encode_state``); fraction
action spaces (variants 2-4) dispense a fraction of the current total volume
so relative encodings stay scale-consistent.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .color import BASE_INKS, D_MAX, as_rgb, rgb_distance, within_tolerance
from .mixing import DYNAMICS_MODELS, predict_from_weights

N_ACTIONS = 30
REWARD_IDS = ("R1", "R2", "R3")
STATE_VARIANTS = (0, 1, 2, 3, 4)
SUCCESS_BONUS = 10.0

# Per-channel max over the 3 pairwise ink distances (R2 normalizer).
MAX_INK_PAIR_DISTANCE = max(
    rgb_distance(BASE_INKS[i], BASE_INKS[j]) for i in range(3) for j in range(i + 1, 3)
)

# Volume-feature scale for the absolute encodings (variants 0-1).
ABSOLUTE_VOLUME_SCALE = 2000.0


@dataclass(frozen=True)
class EnvConfig:
    """Full MDP formulation: state/reward/termination plus robustness knobs."""

    state_variant: int
    include_target: bool
    reward_id: str
    horizon: int
    tolerance: float
    dynamics: str
    noise_std: tuple[float, float, float] = (2.0, 2.0, 2.0)
    adv_enabled: bool = True
    adv_prob: float = 0.8
    adv_eps: float = 3.0
    initial_volume: float = 200.0
    seed: int = 0

    def __post_init__(self):
        if self.state_variant not in STATE_VARIANTS:
            raise ValueError(f"state_variant must be in {STATE_VARIANTS}, got {self.state_variant}")
        if self.reward_id not in REWARD_IDS:
            raise ValueError(f"reward_id must be in {REWARD_IDS}, got {self.reward_id!r}")
        if self.dynamics not in DYNAMICS_MODELS:
            raise ValueError(f"dynamics must be in {DYNAMICS_MODELS}, got {self.dynamics!r}")
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be > 0")
        if not 0.0 <= self.adv_prob <= 1.0:
            raise ValueError("adv_prob must be in [0, 1]")
        if any(s < 0 for s in self.noise_std):
            raise ValueError("noise stds must be >= 0")
        if self.initial_volume <= 0:
            raise ValueError("initial_volume must be > 0")

    @property
    def uses_fraction_actions(self) -> bool:
        return self.state_variant >= 2

    @property
    def observation_dim(self) -> int:
        return 3 + (3 if self.include_target else 0) + (1 if self.state_variant in (0, 2) else 3)

    def with_(self, **kwargs) -> "EnvConfig":
        return replace(self, **kwargs)


@dataclass
class StepResult:
    observation: np.ndarray
    reward: float
    done: bool
    info: dict = field(default_factory=dict)


def decode_action(action: int, config: EnvConfig) -> tuple[int, float]:
    """Action index -> (ink index, dispensed volume in ul).

    Variants 0-1 use absolute volumes 20..200 ul in steps of 20; variants 2-4
    use fractions 0.1..1.0 of the current total volume (resolved by the env).
    """
    if not 0 <= action < N_ACTIONS:
        raise ValueError(f"action must be in [0, {N_ACTIONS}), got {action}")
    ink, magnitude_index = divmod(int(action), 10)
    if config.uses_fraction_actions:
        return ink, 0.1 * (magnitude_index + 1)
    return ink, 20.0 * (magnitude_index + 1)


def action_magnitude_norm(action: int, config: EnvConfig) -> float:
    """Action magnitude normalized to (0, 1]: volume/200 or the fraction itself."""
    _, mag = decode_action(action, config)
    return mag if config.uses_fraction_actions else mag / 200.0


def encode_state(color, volumes, config: EnvConfig, target=None) -> np.ndarray:
    """Flat observation: color/255, optional target/255, volume encoding.

    Volume encodings by variant: 0 total ul (scaled), 1 per-ink ul (scaled),
    2 total relative to the initial volume, 3 per-ink relative to the initial
    volume, 4 per-ink fraction of the current total.
    """
    volumes = np.asarray(volumes, dtype=float)
    total = volumes.sum()
    v = config.state_variant
    if v == 0:
        vol_part = np.array([total / ABSOLUTE_VOLUME_SCALE])
    elif v == 1:
        vol_part = volumes / ABSOLUTE_VOLUME_SCALE
    elif v == 2:
        vol_part = np.array([total / config.initial_volume])
    elif v == 3:
        vol_part = volumes / config.initial_volume
    else:
        vol_part = volumes / total
    parts = [np.asarray(color, dtype=float) / 255.0]
    if config.include_target:
        if target is None:
            raise ValueError("config includes the target but none was given")
        parts.append(np.asarray(target, dtype=float) / 255.0)
    parts.append(vol_part)
    return np.concatenate(parts)


def reward_r1(current, target, success: bool) -> float:
    """Negative normalized distance to target, plus the success bonus."""
    return -rgb_distance(current, target) / D_MAX + (SUCCESS_BONUS if success else 0.0)


def reward_r2_r3(added_ink_color, target, volume_norm: float, variant: str, success: bool) -> float:
    """Action penalty reward: -(d(added, target)/D) * V^2 plus the bonus.

    V is the action magnitude normalized to [0, 1]. The normalizer D is the
    max pairwise ink distance for R2 and the max ink-to-target distance for R3.
    """
    if variant == "R2":
        d_norm = MAX_INK_PAIR_DISTANCE
    elif variant == "R3":
        d_norm = max(rgb_distance(ink, target) for ink in BASE_INKS)
    else:
        raise ValueError(f"variant must be R2 or R3, got {variant!r}")
    penalty = -(rgb_distance(added_ink_color, target) / d_norm) * volume_norm**2
    return penalty + (SUCCESS_BONUS if success else 0.0)


def apply_observation_noise(color, noise_std, rng) -> np.ndarray:
    """Channel-wise Gaussian perturbation, clamped to [0, 255]."""
    noisy = np.asarray(color, dtype=float) + rng.normal(0.0, noise_std)
    return np.clip(noisy, 0.0, 255.0)


def apply_adversarial(color, target, rng, prob: float, eps: float) -> np.ndarray:
    """With probability `prob`, shift every channel by `eps` away from the
    target (ties shift upward); otherwise identity. Clamped to [0, 255]."""
    color = np.asarray(color, dtype=float)
    if prob <= 0.0 or rng.random() >= prob:
        return color
    shift = np.where(color >= np.asarray(target, dtype=float), eps, -eps)
    return np.clip(color + shift, 0.0, 255.0)


def sample_target(rng) -> np.ndarray:
    """Uniform sample from the lerp-reachable hull of the inks (so training
    goals are achievable): uniform simplex weights through the linear model."""
    return rng.dirichlet(np.ones(3)) @ BASE_INKS


def nearest_ink(target) -> int:
    """Index of the base ink closest to `target`; ties break to the lowest index."""
    return int(np.argmin(np.linalg.norm(BASE_INKS - as_rgb(target), axis=1)))


class ColorMixEnv:
    """Single-context episodic environment; run one instance per worker.

    Every episode runs at least one step: a zero-distance start still
    requires one addition before success can be declared.
    """

    n_actions = N_ACTIONS

    def __init__(self, config: EnvConfig):
        self.config = config
        self.rng = np.random.default_rng(config.seed)
        self._noise_std = np.asarray(config.noise_std, dtype=float)
        self._target: Optional[np.ndarray] = None
        self._volumes = np.zeros(3)
        self._steps = 0
        self._done = True

    @property
    def observation_dim(self) -> int:
        return self.config.observation_dim

    @property
    def target(self) -> np.ndarray:
        return self._target.copy()

    @property
    def volumes(self) -> np.ndarray:
        return self._volumes.copy()

    @property
    def steps(self) -> int:
        return self._steps

    def sample_target(self) -> np.ndarray:
        return sample_target(self.rng)

    def reset(self, target=None, seed: Optional[int] = None) -> np.ndarray:
        if seed is not None:
            self.rng = np.random.default_rng(seed)
        self._target = self.sample_target() if target is None else as_rgb(target)
        self._volumes = np.zeros(3)
        self._volumes[nearest_ink(self._target)] = self.config.initial_volume
        self._steps = 0
        self._done = False
        return self._observe(self._true_color())

    def step(self, action: int) -> StepResult:
        if self._done:
            raise RuntimeError("episode finished; call reset()")
        cfg = self.config
        ink, magnitude = decode_action(action, cfg)
        volume = magnitude * self._volumes.sum() if cfg.uses_fraction_actions else magnitude
        self._volumes[ink] += volume

        true_color = self._true_color()
        self._steps += 1
        success = within_tolerance(true_color, self._target, cfg.tolerance)
        self._done = success or self._steps >= cfg.horizon

        if cfg.reward_id == "R1":
            reward = reward_r1(true_color, self._target, success)
        else:
            reward = reward_r2_r3(
                BASE_INKS[ink], self._target, action_magnitude_norm(action, cfg),
                cfg.reward_id, success,
            )
        info = {
            "true_color": true_color,
            "distance": rgb_distance(true_color, self._target),
            "success": success,
            "step_count": self._steps,
            "total_volume": float(self._volumes.sum()),
        }
        return StepResult(self._observe(true_color), float(reward), self._done, info)

    def _true_color(self) -> np.ndarray:
        return predict_from_weights(self.config.dynamics, self._volumes / self._volumes.sum())

    def _observe(self, true_color) -> np.ndarray:
        cfg = self.config
        color = apply_observation_noise(true_color, self._noise_std, self.rng)
        if cfg.adv_enabled:
            color = apply_adversarial(color, self._target, self.rng, cfg.adv_prob, cfg.adv_eps)
        return encode_state(color, self._volumes, cfg, target=self._target)
