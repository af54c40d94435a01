"""Shared test utilities: tiny stub envs and the finite-difference oracle."""

from __future__ import annotations

import numpy as np

from chromamix.ppo import PARAM_NAMES, RolloutBatch, ppo_loss


class StubEnv:
    """Minimal env driven by a reward function; observation is a constant."""

    n_actions = 30

    def __init__(self, obs_dim=3, horizon=1, reward=10.0, seed=0):
        self.observation_dim = obs_dim
        self.horizon = horizon
        self.reward = reward
        self.rng = np.random.default_rng(seed)
        self._steps = 0

    def reset(self):
        self._steps = 0
        return self.rng.normal(size=self.observation_dim)

    def step(self, action):
        from chromamix.env import StepResult

        self._steps += 1
        done = self._steps >= self.horizon
        return StepResult(self.rng.normal(size=self.observation_dim),
                          float(self.reward), done, {})


class ConstantRewardEnv(StubEnv):
    """Never-terminating unit-reward env (within any finite training run)."""

    def __init__(self, obs_dim=3, seed=0):
        super().__init__(obs_dim=obs_dim, horizon=10**9, reward=1.0, seed=seed)


def gradient_max_rel_error(params, batch: RolloutBatch, config, h=1e-6,
                           sample_per_array=None, rng=None) -> float:
    """Max relative error between analytic gradients and central differences.

    With `sample_per_array`, checks a random subset of entries per parameter
    array instead of every entry.
    """
    _, _, grads = ppo_loss(params, batch, config)
    worst = 0.0
    for name, g in zip(PARAM_NAMES, grads):
        arr = getattr(params, name)
        if sample_per_array is None:
            indices = list(np.ndindex(arr.shape))
        else:
            flat = rng.choice(arr.size, size=min(sample_per_array, arr.size),
                              replace=False)
            indices = [np.unravel_index(i, arr.shape) for i in flat]
        for ix in indices:
            orig = arr[ix]
            arr[ix] = orig + h
            lp, _, _ = ppo_loss(params, batch, config, with_grads=False)
            arr[ix] = orig - h
            lm, _, _ = ppo_loss(params, batch, config, with_grads=False)
            arr[ix] = orig
            fd = (lp - lm) / (2 * h)
            denom = max(abs(fd), abs(float(g[ix])), 1e-8)
            worst = max(worst, abs(fd - float(g[ix])) / denom)
    return worst


def check_mixing_properties(n=10_000, seed=0) -> dict:
    """Randomized property suite over the three mixing models.

    Checks (n cases each, vectorized where possible): single-ink identity,
    volume-scale invariance, permutation invariance, lerp convexity,
    wgm <= lerp per band, and the absorption/reflectance round trip.
    Raises AssertionError on any violation; returns observed worst deviations.
    """
    from chromamix.color import BASE_INKS, REFLECTANCE_FLOOR
    from chromamix.mixing import (absorption_ratio, km_from_weights,
                                  lerp_from_weights, predict,
                                  reflectance_from_absorption, wgm_from_weights)

    rng = np.random.default_rng(seed)
    worst: dict[str, float] = {}

    # single-ink identity (round-trip error bound 0.5 channel units)
    dev = 0.0
    for model in ("lerp", "km", "wgm"):
        for ink in range(3):
            for vol in rng.uniform(1.0, 2000.0, size=max(4, n // 1000)):
                d = np.abs(predict(model, [(ink, vol)]) - BASE_INKS[ink]).max()
                dev = max(dev, d)
    assert dev <= 0.5, f"single-ink identity error {dev}"
    worst["single_ink"] = dev

    # permutation and volume-scale invariance (component-list machinery)
    dev_p = dev_s = 0.0
    for _ in range(n // 10):
        k = rng.integers(2, 6)
        comps = [(int(rng.integers(0, 3)), float(rng.uniform(1, 400))) for _ in range(k)]
        alpha = float(rng.uniform(0.01, 100.0))
        scaled = [(i, v * alpha) for i, v in comps]
        shuffled = list(comps)
        rng.shuffle(shuffled)
        for model in ("lerp", "km", "wgm"):
            base = predict(model, comps)
            dev_p = max(dev_p, np.abs(base - predict(model, shuffled)).max())
            dev_s = max(dev_s, np.abs(base - predict(model, scaled)).max())
    assert dev_p <= 1e-9, f"permutation invariance error {dev_p}"
    assert dev_s <= 1e-7, f"volume-scale invariance error {dev_s}"
    worst["permutation"] = dev_p
    worst["volume_scale"] = dev_s

    # weight-space properties, vectorized over n random simplex points
    w = rng.dirichlet(np.ones(3), size=n)
    lerp = lerp_from_weights(w)
    wgm = wgm_from_weights(w)
    km = km_from_weights(w)
    lo = np.min(BASE_INKS, axis=0)[None, :]
    hi = np.max(BASE_INKS, axis=0)[None, :]
    assert np.all(lerp >= lo - 1e-9) and np.all(lerp <= hi + 1e-9), "lerp convexity"
    gap = (wgm - lerp).max()
    assert gap <= 1e-9, f"wgm exceeds lerp by {gap}"
    worst["wgm_le_lerp"] = gap
    assert np.all(km > 0.0) and np.all(km <= 255.0 + 1e-9), "km output range"

    # absorption <-> reflectance round trip on a grid
    r = np.linspace(REFLECTANCE_FLOOR, 1.0, n)
    rt = reflectance_from_absorption(absorption_ratio(r))
    err = np.abs(rt - r).max()
    assert err <= 1e-12, f"k<->R round-trip error {err}"
    worst["km_round_trip"] = err

    # continuity: one-volume perturbation moves channels by O(delta)
    delta = 1e-3
    vols = rng.uniform(20.0, 400.0, size=(n, 3))
    bumped = vols.copy()
    j = rng.integers(0, 3, size=n)
    bumped[np.arange(n), j] += delta
    w0 = vols / vols.sum(axis=1, keepdims=True)
    w1 = bumped / bumped.sum(axis=1, keepdims=True)
    for model_fn in (lerp_from_weights, km_from_weights, wgm_from_weights):
        step = np.abs(model_fn(w1) - model_fn(w0)).max()
        assert step <= 50.0 * delta, f"continuity violated: {step} for delta {delta}"
        worst.setdefault("continuity", 0.0)
        worst["continuity"] = max(worst["continuity"], step)
    return worst


def make_frozen_batch(obs_dim, n_actions, size, seed):
    """Deterministic batch with spread ratios (old log-probs off-policy)."""
    from chromamix.ppo import PolicyParams, forward, log_softmax

    rng = np.random.default_rng(seed)
    obs = rng.normal(size=(size, obs_dim))
    actions = rng.integers(0, n_actions, size)
    other = PolicyParams.init(obs_dim, n_actions, rng, hidden=8)
    logits, _, _ = forward(other, obs)
    old_logp = log_softmax(logits)[np.arange(size), actions] + rng.normal(0, 0.2, size)
    return RolloutBatch(
        observations=obs,
        actions=actions,
        log_probs=old_logp,
        advantages=rng.normal(size=size),
        returns=rng.normal(size=size),
    )
