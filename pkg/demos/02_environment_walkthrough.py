"""One hand-driven episode of the mixing MDP, with every moving part visible.

The episode starts from the base ink nearest the target at a fixed volume;
each of the 30 discrete actions adds one ink at one of ten magnitudes. The
agent observes a noise-perturbed color; reward and the success test always
use the true predicted color.
"""

import numpy as np

from chromamix import ColorMixEnv, EnvConfig

config = EnvConfig(
    state_variant=4,        # volume encoding: per-ink fraction of total
    include_target=True,    # goal-conditioned observation
    reward_id="R1",         # negative normalized distance + success bonus
    horizon=20,
    tolerance=10.0,         # per-channel success band
    dynamics="lerp",
    noise_std=(2.0, 2.0, 2.0),
    adv_enabled=True,       # bounded worst-case observation shifts
    seed=7,
)
env = ColorMixEnv(config)

target = [90.0, 75.0, 85.0]
obs = env.reset(target=target)
print(f"target {target}, start volumes {env.volumes} (nearest ink wins)")
print(f"observation ({env.observation_dim} values): {np.round(obs, 3)}")
print("  = color/255 (3) + target/255 (3) + volume ratios (3)\n")

# Hand policy: one-step lookahead through the dynamics model.
from chromamix.env import decode_action
from chromamix.mixing import predict


def lookahead_action(env, target):
    best, best_d = 0, np.inf
    for action in range(env.n_actions):
        ink, mag = decode_action(action, env.config)
        vol = mag * env.volumes.sum()  # fraction actions under variant 4
        trial = env.volumes
        trial = [(i, v) for i, v in enumerate(trial) if v > 0] + [(ink, vol)]
        d = np.linalg.norm(predict(env.config.dynamics, trial) - np.asarray(target))
        if d < best_d:
            best, best_d = action, d
    return best


step = 0
done = False
while not done:
    action = lookahead_action(env, target)
    result = env.step(action)
    obs = result.observation
    done = result.done
    step += 1
    info = result.info
    print(f"step {step}: action {action:2d} -> true {np.round(info['true_color'], 1)} "
          f"distance {info['distance']:6.2f} reward {result.reward:7.3f} "
          f"success {info['success']}")
print(f"\nepisode ended after {step} steps, total volume {env.volumes.sum():.0f} ul")
