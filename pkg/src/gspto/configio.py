"""Strict YAML experiment configuration loading.

Configurations are nested key-value files; unknown keys are rejected at every
level so a typo cannot silently corrupt a sweep. Shipped presets live in the
package's ``presets`` directory and can be addressed by bare name.
"""

from __future__ import annotations

import dataclasses
from importlib import resources
from pathlib import Path

import numpy as np
import yaml

from .errors import ConfigError, GsptoError
from .harness import METRICS, AttackSettings, ExperimentConfig
from .optimizers import (
    GSPTO_ALGORITHMS,
    HomotopyParams,
    InitialPoint,
    LearningRateSchedule,
    OptimizerConfig,
)
from .transforms import TransformMode

_OBJECTIVE_KEYS = {
    "ackley": {"box", "shift"},
    "rosenbrock": {"box", "shift", "positive_domain"},
    "two_log": {"box", "shift", "dimension", "m1", "m2"},
    "quadratic": {"box", "shift", "dimension"},
    "affine_attack": {"dimension"},
}


def _mapping(node, context):
    if node is None:
        return {}
    if not isinstance(node, dict):
        raise ConfigError(f"{context} must be a mapping, got {type(node).__name__}")
    return node


def _take(mapping, context, required=(), optional=()):
    unknown = set(mapping) - set(required) - set(optional)
    if unknown:
        raise ConfigError(f"unknown keys {sorted(unknown)} under {context}")
    missing = set(required) - set(mapping)
    if missing:
        raise ConfigError(f"missing keys {sorted(missing)} under {context}")


def _schedule(node) -> LearningRateSchedule:
    node = _mapping(node, "optimizer.schedule")
    _take(node, "optimizer.schedule", required=("kind",), optional=("alpha0", "gamma"))
    return LearningRateSchedule(
        kind=node["kind"],
        alpha0=float(node.get("alpha0", 1.0)),
        gamma=float(node["gamma"]) if "gamma" in node else None,
    )


def _init(node) -> InitialPoint:
    node = _mapping(node, "optimizer.init")
    _take(node, "optimizer.init", required=("kind",),
          optional=("point", "center", "cov_scale", "low", "high"))
    kwargs = {"kind": node["kind"]}
    if "point" in node:
        kwargs["point"] = np.asarray(node["point"], dtype=float)
    if "center" in node:
        kwargs["center"] = np.asarray(node["center"], dtype=float)
    for key in ("cov_scale", "low", "high"):
        if key in node:
            kwargs[key] = float(node[key])
    return InitialPoint(**kwargs)


def _homotopy(node) -> HomotopyParams:
    node = _mapping(node, "optimizer.homotopy")
    _take(node, "optimizer.homotopy",
          required=("sigma_updates", "inner_updates", "tolerance", "decay"))
    return HomotopyParams(
        sigma_updates=int(node["sigma_updates"]),
        inner_updates=int(node["inner_updates"]),
        tolerance=int(node["tolerance"]),
        decay=float(node["decay"]),
    )


def _optimizer(node, attack_mode) -> OptimizerConfig:
    node = _mapping(node, "optimizer")
    _take(
        node, "optimizer",
        required=("algorithm", "sigma", "updates"),
        optional=("samples", "power", "stable_weighting", "normalize_updates",
                  "schedule", "init", "homotopy"),
    )
    algorithm = node["algorithm"]
    mode = None
    if algorithm in GSPTO_ALGORITHMS:
        mode = TransformMode(
            kind=algorithm,
            power=float(node.get("power", 1.0)),
            stable_weighting=bool(node.get("stable_weighting", True)),
        )
    elif "power" in node or "stable_weighting" in node:
        raise ConfigError(f"power/stable_weighting only apply to {GSPTO_ALGORITHMS}")
    if "init" in node:
        init = _init(node["init"])
    elif attack_mode:
        init = None  # filled with a zero perturbation once the dimension is known
    else:
        raise ConfigError("missing keys ['init'] under optimizer")
    if "schedule" not in node:
        raise ConfigError("missing keys ['schedule'] under optimizer")
    kwargs = dict(
        algorithm=algorithm,
        sigma=float(node["sigma"]),
        samples=int(node.get("samples", 100)),
        updates=int(node["updates"]),
        schedule=_schedule(node["schedule"]),
        init=init,
        mode=mode,
    )
    if "homotopy" in node:
        kwargs["homotopy"] = _homotopy(node["homotopy"])
    if "normalize_updates" in node:
        kwargs["normalize_updates"] = bool(node["normalize_updates"])
    return OptimizerConfig(**kwargs)


def _attack(node) -> AttackSettings:
    node = _mapping(node, "attack")
    _take(node, "attack",
          optional=("kappa", "lam", "classes", "weight_scale", "r2_convention"))
    kwargs = {}
    for key in ("kappa", "lam", "weight_scale"):
        if key in node:
            kwargs[key] = float(node[key])
    if "classes" in node:
        kwargs["classes"] = int(node["classes"])
    if "r2_convention" in node:
        kwargs["r2_convention"] = str(node["r2_convention"])
    return AttackSettings(**kwargs)


def parse_config(data, source="<config>") -> ExperimentConfig:
    data = _mapping(data, source)
    _take(data, source, required=("objective", "optimizer"), optional=("experiment", "attack"))

    objective = _mapping(data["objective"], "objective")
    _take(objective, "objective", required=("name",),
          optional=tuple(set().union(*_OBJECTIVE_KEYS.values())))
    name = objective["name"]
    if name not in _OBJECTIVE_KEYS:
        raise ConfigError(f"unknown objective {name!r}; available: {sorted(_OBJECTIVE_KEYS)}")
    extra = set(objective) - {"name"} - _OBJECTIVE_KEYS[name]
    if extra:
        raise ConfigError(f"keys {sorted(extra)} do not apply to objective {name!r}")
    kwargs = {k: v for k, v in objective.items() if k != "name"}
    if "dimension" in kwargs:
        kwargs["dimension"] = int(kwargs["dimension"])

    attack_mode = name == "affine_attack"
    attack = _attack(data.get("attack")) if (attack_mode or "attack" in data) else None
    if attack_mode and attack is None:
        attack = AttackSettings()

    optimizer = _optimizer(data["optimizer"], attack_mode)
    if optimizer.init is None:
        dimension = int(kwargs.get("dimension", 20))
        optimizer = dataclasses.replace(
            optimizer, init=InitialPoint(kind="fixed", point=np.zeros(dimension))
        )

    experiment = _mapping(data.get("experiment"), "experiment")
    _take(experiment, "experiment",
          optional=("trials", "seed", "metrics", "sweep", "label", "workers", "output_dir"))
    metrics = tuple(experiment.get("metrics", METRICS))
    sweep = experiment.get("sweep")
    try:
        return ExperimentConfig(
            objective_name=name,
            objective_kwargs=kwargs,
            optimizer=optimizer,
            trials=int(experiment.get("trials", 100)),
            seed=int(experiment.get("seed", 0)),
            sweep_powers=tuple(float(p) for p in sweep) if sweep is not None else None,
            metrics=metrics,
            output_dir=experiment.get("output_dir"),
            label=str(experiment.get("label", "")),
            attack=attack,
            workers=int(experiment.get("workers", 1)),
        )
    except GsptoError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid configuration value: {exc}") from exc


def preset_dir() -> Path:
    return Path(resources.files("gspto") / "presets")


def list_presets() -> list[str]:
    return sorted(p.stem for p in preset_dir().glob("*.yaml"))


def load_config(path_or_name) -> ExperimentConfig:
    """Load a config file, or a shipped preset when given a bare name."""
    path = Path(path_or_name)
    if not path.exists():
        candidate = preset_dir() / f"{path_or_name}.yaml"
        if candidate.exists():
            path = candidate
        else:
            raise ConfigError(
                f"no config file {path_or_name!r} and no preset of that name; "
                f"presets: {list_presets()}"
            )
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh)
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    try:
        return parse_config(data, source=str(path))
    except GsptoError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
