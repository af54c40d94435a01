"""Clipped-surrogate policy-gradient training (PPO) for the mixing env.

The approximator is a two-hidden-layer tanh MLP (shared trunk, default width
64) with an action-logits head and a scalar value head. Forward pass,
backprop and Adam are implemented directly on numpy arrays so the analytic
gradients can be verified against finite differences.

Hyperparameter defaults follow the standard PPO recipe: 2048-step rollouts,
10 epochs of minibatch 64, gamma 0.99, GAE lambda 0.95, clip 0.2, lr 3e-4
with Adam eps 1e-5, value coefficient 0.5, gradient-norm clip 0.5, advantage
normalization per minibatch.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field, replace

import numpy as np


class TrainingAbort(RuntimeError):
    """Raised when a loss or parameter goes non-finite during training."""


@dataclass(frozen=True)
class TrainConfig:
    total_steps: int = 500_000
    rollout_length: int = 2048
    minibatch_size: int = 64
    epochs_per_update: int = 10
    gamma: float = 0.99
    gae_lambda: float = 0.95
    clip_ratio: float = 0.2
    learning_rate: float = 3e-4
    value_coef: float = 0.5
    entropy_coef: float = 0.0
    max_grad_norm: float = 0.5
    hidden_width: int = 64
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.clip_ratio:
            raise ValueError("clip_ratio must be positive")
        for name in ("total_steps", "rollout_length", "minibatch_size",
                     "epochs_per_update", "learning_rate", "hidden_width"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    def with_(self, **kwargs) -> "TrainConfig":
        return replace(self, **kwargs)


def _orthogonal(shape, gain, rng) -> np.ndarray:
    a = rng.normal(size=shape)
    q, r = np.linalg.qr(a if shape[0] >= shape[1] else a.T)
    q = q * np.sign(np.diag(r))
    if shape[0] < shape[1]:
        q = q.T
    return gain * q[: shape[0], : shape[1]]


PARAM_NAMES = ("w1", "b1", "w2", "b2", "w_pi", "b_pi", "w_v", "b_v")


@dataclass
class PolicyParams:
    """Weights of the shared-trunk actor-critic MLP."""

    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    w_pi: np.ndarray
    b_pi: np.ndarray
    w_v: np.ndarray
    b_v: np.ndarray

    @classmethod
    def init(cls, obs_dim: int, n_actions: int, rng, hidden: int = 64) -> "PolicyParams":
        # Orthogonal init: sqrt(2) gain on the trunk, small policy head,
        # unit value head.
        return cls(
            w1=_orthogonal((obs_dim, hidden), np.sqrt(2.0), rng),
            b1=np.zeros(hidden),
            w2=_orthogonal((hidden, hidden), np.sqrt(2.0), rng),
            b2=np.zeros(hidden),
            w_pi=_orthogonal((hidden, n_actions), 0.01, rng),
            b_pi=np.zeros(n_actions),
            w_v=_orthogonal((hidden, 1), 1.0, rng),
            b_v=np.zeros(1),
        )

    def arrays(self) -> list[np.ndarray]:
        return [getattr(self, name) for name in PARAM_NAMES]

    def copy(self) -> "PolicyParams":
        return PolicyParams(*(a.copy() for a in self.arrays()))

    @property
    def obs_dim(self) -> int:
        return self.w1.shape[0]

    @property
    def n_actions(self) -> int:
        return self.w_pi.shape[1]

    def check_finite(self):
        if not all(np.all(np.isfinite(a)) for a in self.arrays()):
            raise TrainingAbort("non-finite parameter detected")


def log_softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=-1, keepdims=True))


def forward(params: PolicyParams, obs: np.ndarray):
    """Batched forward pass; returns (logits, values, trunk activations)."""
    h1 = np.tanh(obs @ params.w1 + params.b1)
    h2 = np.tanh(h1 @ params.w2 + params.b2)
    logits = h2 @ params.w_pi + params.b_pi
    values = (h2 @ params.w_v + params.b_v)[:, 0]
    return logits, values, (h1, h2)


def act(params: PolicyParams, obs: np.ndarray, rng=None, greedy: bool = False):
    """Sample (or argmax) an action; returns (action, log_prob, value)."""
    obs = np.asarray(obs, dtype=float)
    if obs.shape != (params.obs_dim,):
        raise ValueError(f"observation shape {obs.shape} != ({params.obs_dim},)")
    logits, values, _ = forward(params, obs[None])
    lsm = log_softmax(logits)[0]
    if greedy:
        action = int(np.argmax(logits[0]))
    else:
        p = np.exp(lsm)
        action = int(rng.choice(len(p), p=p / p.sum()))
    return action, float(lsm[action]), float(values[0])


def compute_gae(rewards, values, dones, gamma: float, lam: float, last_value: float = 0.0):
    """Exponentially-weighted TD residuals, reset at episode boundaries.

    `last_value` bootstraps the tail when the rollout ends mid-episode.
    Returns raw (unnormalized) advantages and returns = advantages + values.
    """
    rewards = np.asarray(rewards, dtype=float)
    values = np.asarray(values, dtype=float)
    dones = np.asarray(dones, dtype=bool)
    if not rewards.shape == values.shape == dones.shape:
        raise ValueError("rewards, values and dones must have equal length")
    n = len(rewards)
    advantages = np.zeros(n)
    gae = 0.0
    for t in range(n - 1, -1, -1):
        nonterminal = 0.0 if dones[t] else 1.0
        next_value = last_value if t == n - 1 else values[t + 1]
        delta = rewards[t] + gamma * next_value * nonterminal - values[t]
        gae = delta + gamma * lam * nonterminal * gae
        advantages[t] = gae
    return advantages, advantages + values


def normalize_advantages(advantages: np.ndarray) -> np.ndarray:
    return (advantages - advantages.mean()) / (advantages.std() + 1e-8)


@dataclass
class RolloutBatch:
    observations: np.ndarray
    actions: np.ndarray
    log_probs: np.ndarray
    advantages: np.ndarray
    returns: np.ndarray

    def __len__(self):
        return len(self.actions)


def ppo_loss(params: PolicyParams, batch: RolloutBatch, config: TrainConfig,
             with_grads: bool = True):
    """Clipped-surrogate loss on a (mini)batch.

    loss = policy + value_coef * value - entropy_coef * entropy. Returns
    (loss, stats, grads); grads is None when with_grads is False, otherwise
    a list aligned with PARAM_NAMES. Advantages are used as given (callers
    normalize per minibatch).
    """
    obs = batch.observations
    acts = batch.actions
    n = len(acts)
    idx = np.arange(n)

    logits, values, (h1, h2) = forward(params, obs)
    lsm = log_softmax(logits)
    probs = np.exp(lsm)
    logp = lsm[idx, acts]
    ratio = np.exp(logp - batch.log_probs)
    adv = batch.advantages

    surr1 = ratio * adv
    surr2 = np.clip(ratio, 1.0 - config.clip_ratio, 1.0 + config.clip_ratio) * adv
    policy_loss = -np.minimum(surr1, surr2).mean()
    value_err = values - batch.returns
    value_loss = np.mean(value_err**2)
    entropy = -np.sum(probs * lsm, axis=1)
    loss = (policy_loss + config.value_coef * value_loss
            - config.entropy_coef * entropy.mean())
    if not np.isfinite(loss):
        raise TrainingAbort(
            f"non-finite loss (policy {policy_loss}, value {value_loss}, "
            f"entropy {entropy.mean()})")
    stats = {
        "policy_loss": float(policy_loss),
        "value_loss": float(value_loss),
        "entropy": float(entropy.mean()),
        "clip_fraction": float(np.mean(np.abs(ratio - 1.0) > config.clip_ratio)),
    }
    if not with_grads:
        return loss, stats, None

    # d policy_loss / d logp: active only where the unclipped branch is the min.
    g_logp = np.where(surr1 <= surr2, ratio * adv, 0.0) * (-1.0 / n)
    g_logits = g_logp[:, None] * (-probs)
    g_logits[idx, acts] += g_logp
    # entropy term: d(-H)/dz_k = p_k (lsm_k + H)
    g_logits += (config.entropy_coef / n) * probs * (lsm + entropy[:, None])
    g_values = (2.0 * config.value_coef / n) * value_err

    g_w_pi = h2.T @ g_logits
    g_b_pi = g_logits.sum(axis=0)
    g_v_col = g_values[:, None]
    g_w_v = h2.T @ g_v_col
    g_b_v = g_v_col.sum(axis=0)
    g_h2 = g_logits @ params.w_pi.T + g_v_col @ params.w_v.T
    g_a2 = g_h2 * (1.0 - h2**2)
    g_w2 = h1.T @ g_a2
    g_b2 = g_a2.sum(axis=0)
    g_a1 = (g_a2 @ params.w2.T) * (1.0 - h1**2)
    g_w1 = obs.T @ g_a1
    g_b1 = g_a1.sum(axis=0)
    grads = [g_w1, g_b1, g_w2, g_b2, g_w_pi, g_b_pi, g_w_v, g_b_v]
    return loss, stats, grads


def clip_grad_norm(grads, max_norm: float) -> float:
    total = float(np.sqrt(sum(float((g**2).sum()) for g in grads)))
    if total > max_norm:
        scale = max_norm / total
        for g in grads:
            g *= scale
    return total


class Adam:
    def __init__(self, params: PolicyParams, lr: float, beta1=0.9, beta2=0.999, eps=1e-5):
        self.lr = lr
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.m = [np.zeros_like(a) for a in params.arrays()]
        self.v = [np.zeros_like(a) for a in params.arrays()]
        self.t = 0

    def step(self, params: PolicyParams, grads):
        self.t += 1
        bc1 = 1.0 - self.beta1**self.t
        bc2 = 1.0 - self.beta2**self.t
        for p, g, m, v in zip(params.arrays(), grads, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p -= self.lr * (m / bc1) / (np.sqrt(v / bc2) + self.eps)


def ppo_update(params: PolicyParams, batch: RolloutBatch, config: TrainConfig,
               optimizer: Adam, rng) -> dict:
    """Epochs of shuffled minibatch updates on one rollout; returns mean stats."""
    n = len(batch)
    order = np.arange(n)
    agg: dict[str, list] = {}
    for _ in range(config.epochs_per_update):
        rng.shuffle(order)
        for start in range(0, n, config.minibatch_size):
            mb = order[start:start + config.minibatch_size]
            mini = RolloutBatch(
                observations=batch.observations[mb],
                actions=batch.actions[mb],
                log_probs=batch.log_probs[mb],
                advantages=normalize_advantages(batch.advantages[mb]),
                returns=batch.returns[mb],
            )
            _, stats, grads = ppo_loss(params, mini, config)
            clip_grad_norm(grads, config.max_grad_norm)
            optimizer.step(params, grads)
            for k, v in stats.items():
                agg.setdefault(k, []).append(v)
    params.check_finite()
    return {k: float(np.mean(v)) for k, v in agg.items()}


@dataclass
class TrainResult:
    params: PolicyParams            # final parameters
    best_params: PolicyParams       # snapshot at the best rolling reward
    curve: list = field(default_factory=list)   # (global_step, ep_rew_mean)
    best_reward: float = float("-inf")


def train(env_factory, config: TrainConfig, curve_callback=None) -> TrainResult:
    """Run collect/update cycles until total_steps environment steps.

    The training curve samples the rolling mean of the last 100 completed
    episodes' total rewards at every rollout boundary. The parameter snapshot
    with the best rolling mean is retained alongside the final parameters.
    """
    env = env_factory()
    rng = np.random.default_rng(config.seed)
    params = PolicyParams.init(env.observation_dim, env.n_actions, rng,
                               hidden=config.hidden_width)
    optimizer = Adam(params, config.learning_rate)
    episode_rewards: deque = deque(maxlen=100)
    result = TrainResult(params=params, best_params=params.copy())

    n = config.rollout_length
    obs = env.reset()
    episode_total = 0.0
    global_step = 0
    while global_step < config.total_steps:
        observations = np.empty((n, env.observation_dim))
        actions = np.empty(n, dtype=int)
        rewards = np.empty(n)
        dones = np.empty(n, dtype=bool)
        log_probs = np.empty(n)
        values = np.empty(n)
        for t in range(n):
            a, lp, v = act(params, obs, rng)
            observations[t] = obs
            actions[t], log_probs[t], values[t] = a, lp, v
            step = env.step(a)
            obs = step.observation
            rewards[t], dones[t] = step.reward, step.done
            episode_total += step.reward
            if step.done:
                episode_rewards.append(episode_total)
                episode_total = 0.0
                obs = env.reset()
        global_step += n

        last_value = float(forward(params, obs[None])[1][0])
        advantages, returns = compute_gae(
            rewards, values, dones, config.gamma, config.gae_lambda,
            last_value=0.0 if dones[-1] else last_value)
        batch = RolloutBatch(observations, actions, log_probs, advantages, returns)
        ppo_update(params, batch, config, optimizer, rng)

        if episode_rewards:
            mean_reward = float(np.mean(episode_rewards))
            result.curve.append((global_step, mean_reward))
            if mean_reward > result.best_reward:
                result.best_reward = mean_reward
                result.best_params = params.copy()
            if curve_callback is not None:
                curve_callback(global_step, mean_reward)
    return result
