"""Experiment orchestration: repeated seeded trials, statistics, and reports.

Trials are the unit of parallelism; each trial owns the random stream
``(seed, trial_index)`` so results do not depend on execution order, and all
file writes happen once after aggregation. Reported fitness is the base
objective value, i.e. any configured positivity shift is removed again.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import ConfigError, InvalidInputError, RunAbortedError
from .kernels import BACKEND
from .objectives import (
    AttackLossParams,
    attack_objective,
    build_objective,
    make_affine_instance,
)
from .optimizers import OptimizerConfig, run
from .samplers import RngStream

METRICS = ("fitness", "mse", "iterations_to_best")


def aggregate_stats(values) -> tuple[float, float]:
    """Mean and sample standard deviation (n-1 denominator; n=1 gives 0)."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise InvalidInputError("cannot aggregate an empty list")
    mean = float(np.mean(values))
    std = 0.0 if values.size == 1 else float(np.std(values, ddof=1))
    return mean, std


def r_squared(perturbation, image, convention="conventional") -> float:
    """Perturbation-fidelity score between an input and its perturbed copy.

    ``conventional`` is 1 - sum(mu_i^2) / sum((a_i - mean(a))^2); ``ratio`` is
    the literal ratio sum((a_i - mean(a))^2) / sum(mu_i^2), which exceeds 1
    for small perturbations (and is +inf at zero perturbation).
    """
    perturbation = np.asarray(perturbation, dtype=float)
    image = np.asarray(image, dtype=float)
    total = float(np.sum((image - image.mean()) ** 2))
    size = float(np.sum(perturbation**2))
    if convention == "conventional":
        return 1.0 - size / total
    if convention == "ratio":
        return math.inf if size == 0.0 else total / size
    raise InvalidInputError(f"unknown R^2 convention {convention!r}")


@dataclass(frozen=True)
class AttackSettings:
    """Synthetic targeted-attack setup; stands in for full image campaigns."""

    kappa: float = 0.01
    lam: float = 1.0
    classes: int = 5
    weight_scale: float = 5.0
    r2_convention: str = "conventional"

    def __post_init__(self):
        if self.classes < 2 or self.classes > 5:
            raise ConfigError(f"attack classes must be in [2, 5], got {self.classes}")
        if self.r2_convention not in ("conventional", "ratio"):
            raise ConfigError(f"unknown R^2 convention {self.r2_convention!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    objective_name: str
    optimizer: OptimizerConfig
    objective_kwargs: dict = field(default_factory=dict)
    trials: int = 100
    seed: int = 0
    sweep_powers: Optional[tuple] = None
    metrics: tuple = METRICS
    output_dir: Optional[str] = None
    label: str = ""
    attack: Optional[AttackSettings] = None
    workers: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        unknown = set(self.metrics) - set(METRICS)
        if unknown:
            raise ConfigError(f"unknown metrics {sorted(unknown)}; available: {METRICS}")
        if self.sweep_powers is not None:
            powers = tuple(self.sweep_powers)
            if not powers:
                raise ConfigError("sweep list must be non-empty")
            if any(b <= a for a, b in zip(powers, powers[1:])):
                raise ConfigError("sweep powers must be strictly increasing")
            object.__setattr__(self, "sweep_powers", powers)

    def build_objective(self):
        if self.objective_name == "affine_attack":
            raise ConfigError("affine_attack configs run through toy_attack_run / the attack command")
        return build_objective(self.objective_name, **self.objective_kwargs)

    def stem(self) -> str:
        return self.label or f"{self.objective_name}_{self.optimizer.algorithm}"


@dataclass
class TrialResult:
    trial: int
    best_fitness: float = math.nan  # base objective value (shift removed)
    mse: float = math.nan
    iterations_to_best: int = -1
    solution: Optional[np.ndarray] = None
    error: Optional[str] = None

    @property
    def completed(self) -> bool:
        return self.error is None


@dataclass
class ExperimentReport:
    label: str
    trials: list
    aggregates: dict  # metric -> {"mean": float, "std": float}
    completed: int
    failed: int
    partial: bool
    meta: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "label": self.label,
            "meta": self.meta,
            "completed": self.completed,
            "failed": self.failed,
            "partial": self.partial,
            "aggregates": self.aggregates,
            "errors": {str(t.trial): t.error for t in self.trials if t.error},
        }


def _metric_values(trials, metric):
    rows = [t for t in trials if t.completed]
    if metric == "fitness":
        return [t.best_fitness for t in rows]
    if metric == "mse":
        return [t.mse for t in rows]
    return [t.iterations_to_best for t in rows]


def _aggregate(trials, metrics):
    done = [t for t in trials if t.completed]
    out = {}
    for metric in metrics:
        if not done:
            out[metric] = {"mean": math.nan, "std": math.nan}
            continue
        values = _metric_values(trials, metric)
        if any(math.isnan(v) for v in values):
            out[metric] = {"mean": math.nan, "std": math.nan}
            continue
        mean, std = aggregate_stats(values)
        out[metric] = {"mean": mean, "std": std}
    return out


def _run_trial(objective, optimizer: OptimizerConfig, seed: int, index: int) -> TrialResult:
    config = dataclasses.replace(optimizer, seed=seed, stream=index)
    try:
        trace = run(objective, config)
    except RunAbortedError as exc:
        return TrialResult(trial=index, error=str(exc))
    solution = trace.best_solution
    mse = math.nan
    if objective.known_optimum is not None:
        delta = solution - objective.known_optimum
        mse = float(delta @ delta) / objective.dimension
    return TrialResult(
        trial=index,
        best_fitness=trace.best_fitness - objective.shift,
        mse=mse,
        iterations_to_best=trace.iterations_to_best,
        solution=solution,
    )


def run_experiment(config: ExperimentConfig, out_dir=None) -> ExperimentReport:
    """Execute the configured trials, aggregate, and optionally write reports.

    Aborted trials are recorded with their error and excluded from the
    aggregates; the report's ``partial`` flag marks such runs.
    """
    objective = config.build_objective()
    indices = range(config.trials)
    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            trials = list(pool.map(
                lambda i: _run_trial(objective, config.optimizer, config.seed, i), indices
            ))
    else:
        trials = [_run_trial(objective, config.optimizer, config.seed, i) for i in indices]
    trials.sort(key=lambda t: t.trial)
    completed = sum(t.completed for t in trials)
    report = ExperimentReport(
        label=config.stem(),
        trials=trials,
        aggregates=_aggregate(trials, config.metrics),
        completed=completed,
        failed=config.trials - completed,
        partial=completed < config.trials,
        meta={
            "objective": config.objective_name,
            "objective_kwargs": {k: _jsonable(v) for k, v in config.objective_kwargs.items()},
            "algorithm": config.optimizer.algorithm,
            "power": config.optimizer.mode.power if config.optimizer.mode else None,
            "sigma": config.optimizer.sigma,
            "samples": config.optimizer.samples,
            "updates": config.optimizer.updates,
            "trials": config.trials,
            "seed": config.seed,
            "backend": BACKEND,
        },
    )
    target = out_dir or config.output_dir
    if target is not None:
        write_report(report, target, objective.dimension)
    return report


def _jsonable(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    return value


def _fmt(value) -> str:
    # repr round-trips float64 exactly, which keeps the CSV byte-deterministic
    # and lets aggregates be recomputed from it without loss.
    return repr(float(value))


def write_report(report: ExperimentReport, out_dir, dimension) -> tuple[Path, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"{report.label}_trials.csv"
    json_path = out / f"{report.label}_report.json"
    coords = [f"x{i}" for i in range(dimension)]
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["trial", "best_fitness", "mse", "iterations_to_best", *coords, "error"])
        for t in report.trials:
            if t.completed:
                writer.writerow([
                    t.trial, _fmt(t.best_fitness), _fmt(t.mse), t.iterations_to_best,
                    *(_fmt(v) for v in t.solution), "",
                ])
            else:
                writer.writerow([t.trial, "", "", "", *([""] * dimension), t.error])
    with open(json_path, "w") as fh:
        json.dump(report.to_json_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return csv_path, json_path


def n_sweep(config: ExperimentConfig, out_dir=None) -> list[tuple[float, ExperimentReport]]:
    """Run the experiment once per transform power and emit the trend table.

    The trend CSV holds one row per power with the aggregate MSE and fitness,
    the data behind the power-ladder figures.
    """
    if config.sweep_powers is None:
        raise ConfigError("n_sweep needs a sweep list in the configuration")
    if config.optimizer.mode is None:
        raise ConfigError("n_sweep applies to the power-transform algorithms only")
    results = []
    for power in config.sweep_powers:
        mode = dataclasses.replace(config.optimizer.mode, power=float(power))
        sub = dataclasses.replace(
            config,
            optimizer=dataclasses.replace(config.optimizer, mode=mode),
            sweep_powers=None,
            label=f"{config.stem()}_N{power:g}",
            output_dir=None,
        )
        results.append((float(power), run_experiment(sub, out_dir=out_dir)))
    target = out_dir or config.output_dir
    if target is not None:
        out = Path(target)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / f"{config.stem()}_trend.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["power", "mean_mse", "std_mse", "mean_fitness", "std_fitness"])
            for power, report in results:
                writer.writerow([
                    _fmt(power),
                    _fmt(report.aggregates["mse"]["mean"]),
                    _fmt(report.aggregates["mse"]["std"]),
                    _fmt(report.aggregates["fitness"]["mean"]),
                    _fmt(report.aggregates["fitness"]["std"]),
                ])
    return results


@dataclass
class AttackInstanceResult:
    instance: int
    target_label: int
    success: bool
    r2: float = math.nan
    iterations_to_best: int = -1
    best_margin: float = math.nan
    perturbation_norm: float = math.nan
    error: Optional[str] = None


@dataclass
class AttackReport:
    label: str
    instances: list
    success_rate: float
    aggregates: dict
    meta: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "label": self.label,
            "meta": self.meta,
            "success_rate": self.success_rate,
            "aggregates": self.aggregates,
            "errors": {str(r.instance): r.error for r in self.instances if r.error},
        }


def toy_attack_run(config: ExperimentConfig, out_dir=None) -> AttackReport:
    """Targeted attacks on seeded synthetic affine classifiers.

    Per instance: draw a fresh classifier and clean input, aim at the class
    with the smallest clean logit, and ascend the negated attack loss from a
    zero perturbation. An instance succeeds when any iterate clears the
    certainty margin; its reported perturbation is the successful iterate with
    the highest fidelity score.
    """
    if config.attack is None:
        raise ConfigError("toy_attack_run needs attack settings in the configuration")
    settings = config.attack
    dimension = int(config.objective_kwargs.get("dimension", 20))
    if dimension > 20:
        raise ConfigError(f"toy attack covers dimension <= 20, got {dimension}")
    rows = []
    for m in range(config.trials):
        # Streams 2m / 2m+1: one for the instance, one for the optimizer.
        instance_gen = RngStream(config.seed, 2 * m).generator()
        logit_map = make_affine_instance(
            dimension, settings.classes, instance_gen, settings.weight_scale
        )
        target = logit_map.target_label()
        params = AttackLossParams(target, kappa=settings.kappa, lam=settings.lam)
        objective = attack_objective(logit_map, params)
        optimizer = dataclasses.replace(config.optimizer, seed=config.seed, stream=2 * m + 1)
        try:
            trace = run(objective, optimizer)
        except RunAbortedError as exc:
            rows.append(AttackInstanceResult(m, target, False, error=str(exc)))
            continue
        logits = logit_map.logits_batch(trace.iterates)
        others = np.delete(logits, target, axis=1)
        margins = logits[:, target] - others.max(axis=1)
        winners = np.flatnonzero(margins > settings.kappa)
        if winners.size == 0:
            rows.append(AttackInstanceResult(
                m, target, False, best_margin=float(margins.max())
            ))
            continue
        scores = np.array([
            r_squared(trace.iterates[i], logit_map.image, settings.r2_convention)
            for i in winners
        ])
        best = winners[int(np.argmax(scores))]
        rows.append(AttackInstanceResult(
            instance=m,
            target_label=target,
            success=True,
            r2=float(scores.max()),
            iterations_to_best=int(best),
            best_margin=float(margins.max()),
            perturbation_norm=float(np.linalg.norm(trace.iterates[best])),
        ))
    successes = [r for r in rows if r.success]
    aggregates = {}
    for name, values in (
        ("r2", [r.r2 for r in successes]),
        ("iterations_to_best", [r.iterations_to_best for r in successes]),
    ):
        if values:
            mean, std = aggregate_stats(values)
            aggregates[name] = {"mean": mean, "std": std}
        else:
            aggregates[name] = {"mean": math.nan, "std": math.nan}
    report = AttackReport(
        label=config.stem(),
        instances=rows,
        success_rate=len(successes) / len(rows) if rows else math.nan,
        aggregates=aggregates,
        meta={
            "dimension": dimension,
            "classes": settings.classes,
            "kappa": settings.kappa,
            "lam": settings.lam,
            "instances": config.trials,
            "seed": config.seed,
            "power": config.optimizer.mode.power if config.optimizer.mode else None,
            "backend": BACKEND,
        },
    )
    target_dir = out_dir or config.output_dir
    if target_dir is not None:
        _write_attack_report(report, target_dir)
    return report


def _write_attack_report(report: AttackReport, out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / f"{report.label}_instances.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([
            "instance", "target_label", "success", "r2", "iterations_to_best",
            "best_margin", "perturbation_norm", "error",
        ])
        for r in report.instances:
            writer.writerow([
                r.instance, r.target_label, int(r.success),
                _fmt(r.r2) if r.success else "",
                r.iterations_to_best if r.success else "",
                _fmt(r.best_margin) if not math.isnan(r.best_margin) else "",
                _fmt(r.perturbation_norm) if r.success else "",
                r.error or "",
            ])
    with open(out / f"{report.label}_report.json", "w") as fh:
        json.dump(report.to_json_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def default_output_dir() -> str:
    return os.environ.get("GSPTO_OUTPUT_DIR", "gspto_out")
