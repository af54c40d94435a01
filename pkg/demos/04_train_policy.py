"""Train a goal-conditioned policy at desk scale and inspect its curve.

About a minute of CPU. The same run through the CLI:

    chromamix train --spec demos/specs/desk.spec --out runs/

which additionally persists the manifest, curve CSV, checkpoint, and metrics.
"""

import numpy as np

from chromamix import ColorMixEnv, EnvConfig, TrainConfig, train
from chromamix.metrics import (coefficient_of_variation, final_performance,
                               forgetting_events, time_to_threshold)

env_cfg = EnvConfig(state_variant=4, include_target=True, reward_id="R1",
                    horizon=20, tolerance=10.0, dynamics="lerp", seed=0)
train_cfg = TrainConfig(total_steps=150_000, seed=0)

print(f"observation dim {env_cfg.observation_dim}, 30 actions, "
      f"{train_cfg.total_steps} steps")
result = train(lambda: ColorMixEnv(env_cfg), train_cfg,
               curve_callback=lambda step, mean: print(
                   f"  step {step:7d}  rolling reward {mean:7.3f}", flush=True)
               if step % 16384 == 0 else None)

curve = result.curve
print(f"\nfinal performance (last 10% of steps): {final_performance(curve):.3f}")
print(f"steps to rolling reward 7.5:            {time_to_threshold(curve)}")
print(f"tail coefficient of variation:          {coefficient_of_variation(curve):.4f}")
print(f"forgetting events (>5% window drops):   {forgetting_events(curve)}")
print(f"best rolling reward seen:               {result.best_reward:.3f}")

# Greedy behavior of the trained policy on a fresh goal:
from chromamix.metrics import run_episode

env = ColorMixEnv(env_cfg.with_(seed=123))
target = np.array([120.0, 100.0, 90.0])
color, steps, success = run_episode(result.best_params, env, target)
print(f"\ngreedy episode to {target}: reached {np.round(color, 1)} "
      f"in {steps} steps, success={success}")
