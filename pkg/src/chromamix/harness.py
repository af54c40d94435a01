"""Experiment runner: trains from spec files, persists comparable artifacts.

Every run writes a self-sufficient artifact directory::

    <out>/<name>/seed<k>/
        manifest.json    resolved configs + code version + seed
        training.csv     columns: step, ep_rew_mean
        checkpoint.npz   best-rolling-reward parameters + embedded manifest
        metrics.json     fp / t75 / cv / nm (cs added by sweeps)
        transfer.json    written when the spec has an eval block

Artifacts are regenerable from the manifest alone; repeated runs with the
same spec and seed overwrite byte-identical files (single-instance mode).
"""

from __future__ import annotations

import csv
import dataclasses
import json
import os
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .env import ColorMixEnv, EnvConfig
from .metrics import (CurveMetrics, coefficient_of_variation, composite_score,
                      evaluate_transfer, final_performance, forgetting_events,
                      time_to_threshold)
from .mixing import DYNAMICS_MODELS
from .ppo import PARAM_NAMES, PolicyParams, TrainConfig, train
from .reachability import reachability_table
from .specfile import EvalProtocol, ExperimentSpec, spec_manifest

CHECKPOINT_FORMAT = 1
OUT_ENV_VAR = "CHROMAMIX_OUT"


def default_out_root() -> Path:
    return Path(os.environ.get(OUT_ENV_VAR, "runs"))


def resolve_out(spec: ExperimentSpec, out: Optional[str]) -> Path:
    if out:
        return Path(out)
    if spec.out:
        return Path(spec.out)
    return default_out_root()


def write_curve_csv(path, curve):
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["step", "ep_rew_mean"])
        for step, value in curve:
            writer.writerow([step, f"{value:.6f}"])


def read_curve_csv(path) -> list[tuple[int, float]]:
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        return [(int(row["step"]), float(row["ep_rew_mean"])) for row in reader]


def save_checkpoint(path, params: PolicyParams, manifest: dict):
    arrays = {name: arr for name, arr in zip(PARAM_NAMES, params.arrays())}
    np.savez(path, format_version=CHECKPOINT_FORMAT,
             manifest=json.dumps(manifest, sort_keys=True), **arrays)


def load_checkpoint(path) -> tuple[PolicyParams, dict]:
    with np.load(path, allow_pickle=False) as data:
        if int(data["format_version"]) != CHECKPOINT_FORMAT:
            raise ValueError(f"unsupported checkpoint format {data['format_version']}")
        params = PolicyParams(*(data[name] for name in PARAM_NAMES))
        manifest = json.loads(str(data["manifest"]))
    return params, manifest


def _write_json(path, payload: dict):
    with open(path, "w") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")


def safe_curve_metrics(curve) -> dict:
    """Per-metric curve summary; undefined metrics (e.g. a run too short to
    span two forgetting windows) become null instead of failing the run."""
    out: dict = {}
    for key, fn in (("fp", final_performance), ("t75", time_to_threshold),
                    ("cv", coefficient_of_variation), ("nm", forgetting_events)):
        try:
            out[key] = fn(curve)
        except ValueError:
            out[key] = None
    return out


def run_training(spec: ExperimentSpec, seed: int, out_root) -> Path:
    """Train one seed of a spec and write its artifact directory."""
    run_dir = Path(out_root) / spec.name / f"seed{seed}"
    run_dir.mkdir(parents=True, exist_ok=True)
    env_cfg = spec.env.with_(seed=seed)
    train_cfg = spec.train.with_(seed=seed)
    manifest = spec_manifest(spec)
    manifest.update({"seed": seed, "code_version": __version__,
                     "env": dataclasses.asdict(env_cfg),
                     "train": dataclasses.asdict(train_cfg)})
    _write_json(run_dir / "manifest.json", manifest)

    result = train(lambda: ColorMixEnv(env_cfg), train_cfg)
    write_curve_csv(run_dir / "training.csv", result.curve)
    save_checkpoint(run_dir / "checkpoint.npz", result.best_params, manifest)
    _write_json(run_dir / "metrics.json", safe_curve_metrics(result.curve))

    if spec.eval is not None:
        report = evaluate_transfer(
            result.best_params, env_cfg, spec.eval.dynamics,
            targets=spec.eval.targets_dict(), reps=spec.eval.reps,
            horizon=spec.eval.horizon, tolerance=spec.eval.tolerance, seed=seed)
        _write_json(run_dir / "transfer.json", report.to_dict())
    return run_dir


def cmd_train(spec: ExperimentSpec, out: Optional[str] = None,
              seed: Optional[int] = None) -> list[Path]:
    out_root = resolve_out(spec, out)
    seeds = [seed] if seed is not None else list(spec.seeds)
    return [run_training(spec, s, out_root) for s in seeds]


# --- phase sweeps -----------------------------------------------------------

PHASE1_FIXED = dict(horizon=20, tolerance=10.0, dynamics="lerp")
PHASE2_STATE, PHASE2_REWARD = 4, "R1"   # phase-1 winner
FINAL_HORIZON, FINAL_TOLERANCE = 5, 7.5  # phase-2 winner


def phase_configs(phase: int) -> list[tuple[str, EnvConfig, TrainConfig]]:
    """The tested configuration grid of a sweep phase."""
    items: list[tuple[str, EnvConfig, TrainConfig]] = []
    if phase == 1:
        for include_target in (True, False):
            for state in (0, 1, 2, 3, 4):
                for reward in ("R1", "R2", "R3"):
                    cid = f"p1-target_{'yes' if include_target else 'no'}-state{state}-{reward}"
                    env = EnvConfig(state_variant=state, include_target=include_target,
                                    reward_id=reward, **PHASE1_FIXED)
                    items.append((cid, env, TrainConfig(total_steps=500_000)))
    elif phase == 2:
        for horizon in (5, 10, 20, 30):
            for tolerance in (2.5, 5.0, 7.5):
                cid = f"p2-T{horizon}-tau{tolerance:g}"
                env = EnvConfig(state_variant=PHASE2_STATE, include_target=True,
                                reward_id=PHASE2_REWARD, horizon=horizon,
                                tolerance=tolerance, dynamics="lerp")
                items.append((cid, env, TrainConfig(total_steps=250_000)))
    elif phase == 3:
        for dynamics in ("km", "wgm"):
            cid = f"p3-{dynamics}"
            env = EnvConfig(state_variant=PHASE2_STATE, include_target=True,
                            reward_id=PHASE2_REWARD, horizon=FINAL_HORIZON,
                            tolerance=FINAL_TOLERANCE, dynamics=dynamics)
            items.append((cid, env, TrainConfig(total_steps=500_000)))
    else:
        raise ValueError(f"phase must be 1, 2 or 3, got {phase}")
    return items


def _sweep_one(args) -> tuple[str, dict, Optional[dict]]:
    cid, env_cfg, train_cfg, seeds, out_root = args
    spec = ExperimentSpec(name=cid, env=env_cfg, train=train_cfg, seeds=tuple(seeds))
    per_seed = []
    for seed in seeds:
        run_dir = run_training(spec, seed, out_root)
        per_seed.append(json.loads((run_dir / "metrics.json").read_text()))
    if any(m["fp"] is None or m["cv"] is None or m["nm"] is None for m in per_seed):
        raise ValueError(
            f"{cid}: run too short for sweep metrics; increase total_steps")
    # average metrics over seeds; t75 averages only when every seed reached it
    t75s = [m["t75"] for m in per_seed if m["t75"] is not None]
    mean = {
        "fp": float(np.mean([m["fp"] for m in per_seed])),
        "cv": float(np.mean([m["cv"] for m in per_seed])),
        "nm": float(np.mean([m["nm"] for m in per_seed])),
        "t75": float(np.mean(t75s)) if len(t75s) == len(per_seed) else None,
    }
    return cid, mean, None


def cmd_phase_sweep(phase: int, out: Optional[str] = None,
                    seeds: Sequence[int] = (0, 1, 2), parallel: int = 1,
                    total_steps: Optional[int] = None) -> Path:
    """Train every configuration of a phase and rank them by composite score.

    `total_steps` overrides the phase budget (useful for desk-scale smoke
    runs). Writes `<out>/phase<k>/comparison.csv` ranked best-first.
    """
    out_root = Path(out) if out else default_out_root()
    sweep_dir = out_root / f"phase{phase}"
    items = phase_configs(phase)
    if total_steps is not None:
        items = [(cid, env, tc.with_(total_steps=total_steps)) for cid, env, tc in items]
    jobs = [(cid, env, tc, list(seeds), sweep_dir) for cid, env, tc in items]
    if parallel > 1:
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            results = list(pool.map(_sweep_one, jobs))
    else:
        results = [_sweep_one(job) for job in jobs]

    budget = total_steps or items[0][2].total_steps
    metrics = [CurveMetrics(fp=m["fp"], t75=m["t75"], cv=m["cv"], nm=m["nm"])
               for _, m, _ in results]
    if len(metrics) >= 2:
        scores = composite_score(metrics, total_steps=budget)
    else:
        scores = [float("nan")] * len(metrics)

    rows = sorted(
        ({"config": cid, "fp": m["fp"], "cv": m["cv"],
          "t75": "--" if m["t75"] is None else int(m["t75"]),
          "nm": m["nm"], "cs": cs}
         for (cid, m, _), cs in zip(results, scores)),
        key=lambda r: -r["cs"])
    path = sweep_dir / "comparison.csv"
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=["config", "fp", "cv", "t75", "nm", "cs"])
        writer.writeheader()
        for row in rows:
            writer.writerow({k: (f"{v:.4f}" if isinstance(v, float) else v)
                             for k, v in row.items()})
    return path


# --- transfer / reachability / metrics / plots ------------------------------

def cmd_transfer(checkpoint_path, protocol: EvalProtocol,
                 out: Optional[str] = None, seed: int = 0) -> dict:
    """Evaluate a checkpoint across the surrogate gap; writes JSON + CSV."""
    params, manifest = load_checkpoint(checkpoint_path)
    env_cfg = EnvConfig(**manifest["env"])
    if env_cfg.observation_dim != params.obs_dim:
        raise ValueError("checkpoint incompatible with its manifest observation shape")
    report = evaluate_transfer(params, env_cfg, protocol.dynamics,
                               targets=protocol.targets_dict(), reps=protocol.reps,
                               horizon=protocol.horizon, tolerance=protocol.tolerance,
                               seed=seed)
    payload = report.to_dict()
    if out:
        out = Path(out)
        out.mkdir(parents=True, exist_ok=True)
        _write_json(out / "transfer.json", payload)
        with open(out / "transfer.csv", "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["target", "d_mean", "d_std", "s_mean", "success"])
            for label, s in report.per_target.items():
                writer.writerow([label, f"{s.distance_mean:.2f}", f"{s.distance_std:.2f}",
                                 f"{s.steps_mean:.2f}", f"{s.success_rate:.4f}"])
            overall = report.overall
            if overall is not None:
                writer.writerow(["Avg", f"{overall.distance_mean:.2f}",
                                 f"{overall.distance_std:.2f}",
                                 f"{overall.steps_mean:.2f}",
                                 f"{overall.success_rate:.4f}"])
    return payload


def cmd_reachability(models=DYNAMICS_MODELS, targets=None, resolution: float = 0.001,
                     out: Optional[str] = None) -> list:
    """Minimum-tolerance table (targets x models); writes CSV + JSON."""
    entries = reachability_table(models=models, targets=targets, resolution=resolution)
    if out:
        out = Path(out)
        out.mkdir(parents=True, exist_ok=True)
        by_label: dict[str, dict] = {}
        for e in entries:
            by_label.setdefault(e.label, {})[e.model] = e
        with open(out / "reachability.csv", "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["target"] + list(models))
            for label, per_model in by_label.items():
                writer.writerow([label] + [f"{per_model[m].tau_min:.1f}" for m in models])
        _write_json(out / "reachability.json", {
            "resolution": resolution,
            "entries": [e.to_dict() for e in entries],
        })
    return entries


def cmd_metrics(run_dirs: Sequence, out: Optional[str] = None) -> dict:
    """Recompute curve metrics for run dirs; adds composite scores for >= 2."""
    per_run = {}
    budget = 0
    for run_dir in run_dirs:
        run_dir = Path(run_dir)
        curve = read_curve_csv(run_dir / "training.csv")
        budget = max(budget, curve[-1][0])
        per_run[str(run_dir)] = safe_curve_metrics(curve)
    payload = {"runs": per_run}
    rows = list(per_run.values())
    if len(rows) >= 2 and all(r["fp"] is not None and r["cv"] is not None
                              and r["nm"] is not None for r in rows):
        metrics_list = [CurveMetrics(fp=r["fp"], t75=r["t75"], cv=r["cv"],
                                     nm=r["nm"]) for r in rows]
        scores = composite_score(metrics_list, total_steps=budget)
        for key, cs in zip(per_run, scores):
            per_run[key]["cs"] = cs
    if out:
        out = Path(out)
        out.mkdir(parents=True, exist_ok=True)
        _write_json(out / "metrics.json", payload)
    return payload


def cmd_plot(run_dirs: Sequence, out) -> list[Path]:
    """Emit plot-ready CSV series for training curves.

    One file per run plus, when several runs share a name prefix (multi-seed),
    an aligned mean/std band file. Metric comparisons come from sweep CSVs.
    """
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    groups: dict[str, list[tuple[str, list]]] = {}
    for run_dir in run_dirs:
        run_dir = Path(run_dir)
        comparison = run_dir / "comparison.csv"
        if comparison.exists():
            # sweep directory: grouped bar data keyed by config id
            path = out / f"bars_{run_dir.name}.csv"
            path.write_text(comparison.read_text())
            written.append(path)
            continue
        curve = read_curve_csv(run_dir / "training.csv")
        name = run_dir.parent.name if run_dir.name.startswith("seed") else run_dir.name
        label = f"{name}-{run_dir.name}" if run_dir.name.startswith("seed") else name
        path = out / f"curve_{label}.csv"
        write_curve_csv(path, curve)
        written.append(path)
        groups.setdefault(name, []).append((label, curve))
    for name, curves in groups.items():
        if len(curves) < 2:
            continue
        n = min(len(c) for _, c in curves)
        steps = [s for s, _ in curves[0][1][:n]]
        values = np.array([[v for _, v in c[:n]] for _, c in curves])
        path = out / f"band_{name}.csv"
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["step", "mean", "std", "lo", "hi"])
            mean, std = values.mean(axis=0), values.std(axis=0)
            for i, step in enumerate(steps):
                writer.writerow([step, f"{mean[i]:.6f}", f"{std[i]:.6f}",
                                 f"{mean[i] - std[i]:.6f}", f"{mean[i] + std[i]:.6f}"])
        written.append(path)
    return written
