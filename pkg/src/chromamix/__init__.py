"""chromamix: goal-conditioned color-mixing RL environment and ablation harness.

The package provides:

1. Color arithmetic and the fixed base-ink constants (:mod:`chromamix.color`).
2. Three mixing-dynamics models behind one interface (:mod:`chromamix.mixing`).
3. The episodic mixing MDP with configurable state/reward/termination and
   robustness wrappers (:mod:`chromamix.env`).
4. A from-scratch clipped-surrogate policy-gradient trainer with
   finite-difference-checkable gradients (:mod:`chromamix.ppo`).
5. Training-curve metrics and the cross-dynamics transfer protocol
   (:mod:`chromamix.metrics`).
6. Reachability analysis over free mixing weights (:mod:`chromamix.reachability`).
7. A config-driven experiment harness and CLI (:mod:`chromamix.harness`,
   ``chromamix`` entry point).
"""

__version__ = "0.1.0"

from .color import (BASE_INKS, CYAN, D_MAX, MAGENTA, YELLOW, from_reflectance,
                    rgb_distance, to_reflectance, within_tolerance)
from .env import ColorMixEnv, EnvConfig, StepResult
from .metrics import (CurveMetrics, TransferReport, coefficient_of_variation,
                      composite_score, curve_metrics, evaluate_transfer,
                      final_performance, forgetting_events, time_to_threshold)
from .mixing import (DYNAMICS_MODELS, mix_km, mix_lerp, mix_weights, mix_wgm,
                     predict)
from .ppo import (PolicyParams, TrainConfig, TrainResult, act, compute_gae,
                  ppo_update, train)
from .reachability import (ReachabilityEntry, lerp_minmax_exact, min_tolerance,
                           minmax_tolerance, reachability_table)
from .specfile import EvalProtocol, ExperimentSpec, SpecError, parse_spec_file

__all__ = [
    "BASE_INKS", "CYAN", "MAGENTA", "YELLOW", "D_MAX",
    "rgb_distance", "within_tolerance", "to_reflectance", "from_reflectance",
    "DYNAMICS_MODELS", "mix_weights", "mix_lerp", "mix_km", "mix_wgm", "predict",
    "EnvConfig", "ColorMixEnv", "StepResult",
    "TrainConfig", "TrainResult", "PolicyParams", "act", "compute_gae",
    "ppo_update", "train",
    "CurveMetrics", "TransferReport", "curve_metrics", "final_performance",
    "time_to_threshold", "coefficient_of_variation", "forgetting_events",
    "composite_score", "evaluate_transfer",
    "ReachabilityEntry", "min_tolerance", "minmax_tolerance",
    "lerp_minmax_exact", "reachability_table",
    "ExperimentSpec", "EvalProtocol", "SpecError", "parse_spec_file",
]
