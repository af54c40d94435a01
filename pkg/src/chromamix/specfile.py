"""Flat key-value experiment specs.

A spec file is line-oriented ``key = value`` with ``#`` comments and dotted
sections (``env.*``, ``train.*``, ``eval.*``), e.g.::

    name = phase1-best
    seeds = 0, 1, 2
    env.state_variant = 4
    env.include_target = true
    env.reward_id = R1
    env.horizon = 20
    env.tolerance = 10
    env.dynamics = lerp
    train.total_steps = 500000
    eval.dynamics = wgm
    eval.targets = C1: 128,91,67; C2: 42,76,66

Unknown keys and missing required fields raise SpecError naming the field.
"""

from __future__ import annotations

import dataclasses
import typing
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .env import EnvConfig
from .metrics import EVAL_TARGETS
from .ppo import TrainConfig


class SpecError(ValueError):
    pass


@dataclass(frozen=True)
class EvalProtocol:
    dynamics: str
    targets: tuple = tuple(EVAL_TARGETS.items())
    reps: int = 4
    horizon: int = 5
    tolerance: float = 7.5

    def targets_dict(self) -> dict:
        return dict(self.targets)


@dataclass(frozen=True)
class ExperimentSpec:
    name: str
    env: EnvConfig
    train: TrainConfig
    seeds: tuple[int, ...] = (0,)
    eval: Optional[EvalProtocol] = None
    out: Optional[str] = None

    def __post_init__(self):
        if len(self.seeds) < 1:
            raise SpecError("seeds: at least one seed required")


def _parse_scalar(field_name: str, text: str, typ):
    text = text.strip()
    try:
        if typ is bool:
            low = text.lower()
            if low in ("true", "yes", "1"):
                return True
            if low in ("false", "no", "0"):
                return False
            raise ValueError(f"not a boolean: {text!r}")
        if typ is int:
            return int(text)
        if typ is float:
            return float(text)
        return text
    except ValueError as e:
        raise SpecError(f"{field_name}: {e}") from None


def _parse_targets(field_name: str, text: str) -> tuple:
    targets = []
    for i, part in enumerate(filter(None, (p.strip() for p in text.split(";")))):
        if ":" in part:
            label, triple = part.split(":", 1)
            label = label.strip()
        else:
            label, triple = f"T{i + 1}", part
        channels = [c for c in triple.split(",") if c.strip()]
        if len(channels) != 3:
            raise SpecError(f"{field_name}: target {label!r} needs 3 channels, got {triple!r}")
        targets.append((label, tuple(_parse_scalar(field_name, c, float) for c in channels)))
    if not targets:
        raise SpecError(f"{field_name}: empty target list")
    return tuple(targets)


def _build_section(cls, section: str, values: dict, required: set):
    kwargs = {}
    hints = typing.get_type_hints(cls)
    field_names = {f.name for f in dataclasses.fields(cls)}
    for key, raw in values.items():
        if key not in field_names:
            raise SpecError(f"{section}.{key}: unknown field")
        if key == "noise_std":
            parts = [p for p in raw.split(",") if p.strip()]
            if len(parts) == 1:
                parts = parts * 3
            if len(parts) != 3:
                raise SpecError(f"{section}.noise_std: expected 1 or 3 values")
            kwargs[key] = tuple(_parse_scalar(f"{section}.{key}", p, float) for p in parts)
            continue
        typ = hints.get(key, str)
        if typ not in (int, float, bool, str):
            typ = str
        kwargs[key] = _parse_scalar(f"{section}.{key}", raw, typ)
    for name in required:
        if name not in kwargs:
            raise SpecError(f"{section}.{name}: missing required field")
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as e:
        raise SpecError(f"{section}: {e}") from None


ENV_REQUIRED = {"state_variant", "include_target", "reward_id", "horizon",
                "tolerance", "dynamics"}


def parse_spec_text(text: str, name_hint: str = "") -> ExperimentSpec:
    top: dict[str, str] = {}
    sections: dict[str, dict[str, str]] = {"env": {}, "train": {}, "eval": {}}
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise SpecError(f"line {lineno}: expected 'key = value', got {raw_line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if "." in key:
            section, field_key = key.split(".", 1)
            if section not in sections:
                raise SpecError(f"{key}: unknown section {section!r}")
            sections[section][field_key] = value
        else:
            top[key] = value

    for key in top:
        if key not in ("name", "seeds", "out"):
            raise SpecError(f"{key}: unknown top-level field")
    name = top.get("name", name_hint)
    if not name:
        raise SpecError("name: missing required field")
    seeds = tuple(_parse_scalar("seeds", s, int)
                  for s in top.get("seeds", "0").split(",") if s.strip())

    env = _build_section(EnvConfig, "env", sections["env"], ENV_REQUIRED)
    train = _build_section(TrainConfig, "train", sections["train"], set())

    eval_proto = None
    if sections["eval"]:
        ev = dict(sections["eval"])
        if "dynamics" not in ev:
            raise SpecError("eval.dynamics: missing required field")
        targets = (_parse_targets("eval.targets", ev.pop("targets"))
                   if "targets" in ev else tuple(EVAL_TARGETS.items()))
        eval_proto = EvalProtocol(
            dynamics=_parse_scalar("eval.dynamics", ev.pop("dynamics"), str),
            targets=targets,
            reps=_parse_scalar("eval.reps", ev.pop("reps", "4"), int),
            horizon=_parse_scalar("eval.horizon", ev.pop("horizon", "5"), int),
            tolerance=_parse_scalar("eval.tolerance", ev.pop("tolerance", "7.5"), float),
        )
        if ev:
            raise SpecError(f"eval.{next(iter(ev))}: unknown field")
    return ExperimentSpec(name=name, env=env, train=train, seeds=seeds,
                          eval=eval_proto, out=top.get("out"))


def parse_spec_file(path) -> ExperimentSpec:
    path = Path(path)
    return parse_spec_text(path.read_text(), name_hint=path.stem)


def spec_manifest(spec: ExperimentSpec) -> dict:
    """JSON-ready dict of the fully resolved spec."""
    d = {
        "name": spec.name,
        "seeds": list(spec.seeds),
        "env": dataclasses.asdict(spec.env),
        "train": dataclasses.asdict(spec.train),
    }
    if spec.eval is not None:
        d["eval"] = {
            "dynamics": spec.eval.dynamics,
            "targets": {k: list(v) for k, v in spec.eval.targets},
            "reps": spec.eval.reps,
            "horizon": spec.eval.horizon,
            "tolerance": spec.eval.tolerance,
        }
    if spec.out:
        d["out"] = spec.out
    return d
