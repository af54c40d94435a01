import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from chromamix.env import ColorMixEnv, EnvConfig
from chromamix.ppo import TrainConfig, train


@pytest.fixture(scope="session")
def small_policy():
    """A modestly trained policy on the relaxed linear-dynamics task.

    Shared across test modules that need competent (not perfect) behavior;
    about 40k steps, a few seconds.
    """
    env_cfg = EnvConfig(state_variant=4, include_target=True, reward_id="R1",
                        horizon=20, tolerance=10.0, dynamics="lerp", seed=0)
    train_cfg = TrainConfig(total_steps=81_920, seed=0)
    result = train(lambda: ColorMixEnv(env_cfg), train_cfg)
    return result, env_cfg


@pytest.fixture
def reachable_targets():
    """Four linear-hull colors (reachable under lerp by construction)."""
    from chromamix.mixing import lerp_from_weights

    weights = np.array([[0.7, 0.1, 0.2], [0.2, 0.6, 0.2],
                        [0.25, 0.25, 0.5], [0.4, 0.4, 0.2]])
    return {f"T{i + 1}": lerp_from_weights(w) for i, w in enumerate(weights)}
